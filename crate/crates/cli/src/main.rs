//! `entbound` command-line tool.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use entbound::ascent::AscentConfig;
use entbound::bounds::{BoundOptions, LowerBoundMethod};
use entbound::harness::{
    compare_bounds, construct_state, estimate_input, run_sweep, write_report, write_rows,
    CompareSpec, Experiment, Grid, GridPoints, OutputFormat, Range, SweepSpec,
};
use entbound::tensor::{read_matrix_file, InputState, MatrixFile};

#[derive(Parser)]
#[command(
    name = "entbound",
    version,
    about = "Bounds on the geometric entanglement of multipartite states"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bracket the entanglement of one state.
    Estimate(EstimateArgs),
    /// Evaluate an experiment over a parameter grid.
    Sweep(SweepArgs),
    /// Run every lower bound on random states and tabulate accuracy and time.
    CompareBounds(CompareArgs),
    /// Write a constructed state as a matrix file.
    ExportState(ExportArgs),
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Lower bound: lb1, lb2k2, lb2k3, lb3 or lb4.
    #[arg(long)]
    lb: Option<String>,
    /// SDP solver tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Iteration cap of the ascent.
    #[arg(long)]
    max_iter: Option<usize>,
    /// Ascent restarts.
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long)]
    workers: Option<usize>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or json.
    #[arg(long)]
    format: Option<String>,
}

impl Common {
    fn lb(&self) -> Result<Option<LowerBoundMethod>> {
        Ok(self.lb.as_deref().map(str::parse).transpose()?)
    }

    fn format(&self) -> Result<Option<OutputFormat>> {
        Ok(self.format.as_deref().map(str::parse).transpose()?)
    }

    fn apply_ascent(&self, cfg: &mut AscentConfig) {
        if let Some(n) = self.max_iter {
            cfg.max_iterations = n;
        }
        if let Some(r) = self.restarts {
            cfg.restarts = r;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
    }
}

#[derive(Args)]
struct EstimateArgs {
    /// Constructor such as `ghz(3)` or `horodecki(0.3)`, or a matrix file.
    state: String,
    /// Append the ascent's per-iteration fidelities as JSON lines.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct SweepArgs {
    /// JSON file mirroring the sweep specification; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    experiment: Option<String>,
    /// `start:stop:step`, several ranges joined by `;`, or `v1,v2,...`.
    #[arg(long)]
    grid: Option<String>,
    /// Fixed experiment parameter `key=value` (j, h, beta, parties, state, file).
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
    /// Skip the ascent.
    #[arg(long)]
    lower_only: bool,
    /// Write zero wall times so repeated runs give identical bytes.
    #[arg(long)]
    no_timings: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long, default_value_t = 10)]
    samples: usize,
    /// Subsystem dimensions such as `3x3`.
    #[arg(long, default_value = "3x3")]
    dims: String,
    /// Rank of the random states; full rank when absent.
    #[arg(long)]
    rank: Option<usize>,
    /// Comma-separated methods; all five when absent.
    #[arg(long)]
    methods: Option<String>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct ExportArgs {
    /// Constructor such as `xx(0.7, -1)`.
    state: String,
    #[arg(long)]
    out: Option<PathBuf>,
    /// text or json; inferred from the output extension when absent.
    #[arg(long)]
    format: Option<String>,
}

/// Failure with a dedicated exit code.
struct SolverFailure(String);

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn load_state(arg: &str) -> Result<InputState> {
    let path = Path::new(arg);
    if path.is_file() {
        return Ok(read_matrix_file(path)?.into_state()?);
    }
    if !arg.contains('(') {
        bail!("`{arg}` is neither a file nor a state constructor");
    }
    Ok(construct_state(arg)?)
}

fn estimate(args: EstimateArgs) -> Result<Option<SolverFailure>> {
    let input = load_state(&args.state)?;
    let lb = args.common.lb()?.unwrap_or(LowerBoundMethod::PurityFull);
    let opts = match args.common.tol {
        Some(t) => BoundOptions::with_tolerance(t),
        None => BoundOptions::default(),
    };
    let mut ascent = match input {
        InputState::Pure(_) => AscentConfig::pure(),
        InputState::Mixed(_) => AscentConfig::mixed(),
    };
    args.common.apply_ascent(&mut ascent);
    ascent.trace_path = args.trace;
    let report = estimate_input(&input, lb, &opts, &ascent)?;
    eprintln!(
        "{} <= E_G <= {}  (gap {:.3e}, {} {} / {})",
        report.lower,
        report.upper,
        report.gap,
        report.lower_method,
        report.lb_status,
        report.upper_method
    );
    let mut out = output(&args.common.out)?;
    match args.common.format()?.unwrap_or(OutputFormat::Json) {
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut out, &report)?;
            writeln!(out)?;
        }
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.serialize(&report)?;
            w.flush()?;
        }
    }
    Ok((!report.solver_ok())
        .then(|| SolverFailure(format!("lower bound solver status: {}", report.lb_status))))
}

fn parse_range(s: &str) -> Result<Range> {
    let parts: Vec<f64> = s
        .split(':')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [start, stop, step] => Ok(Range { start, stop, step }),
        _ => bail!("range `{s}` must be start:stop:step"),
    }
}

fn parse_grid(s: &str) -> Result<Grid> {
    let points = if s.contains(':') {
        let segments = s.split(';').map(parse_range).collect::<Result<Vec<_>>>()?;
        if segments.len() == 1 {
            GridPoints::Range(segments[0])
        } else {
            GridPoints::Segments { segments }
        }
    } else {
        GridPoints::Values {
            values: s
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .with_context(|| format!("bad grid `{s}`"))?,
        }
    };
    Ok(Grid {
        parameter: None,
        points,
    })
}

fn sweep_spec(args: &SweepArgs) -> Result<SweepSpec> {
    let mut spec = match (&args.config, &args.experiment) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("cannot read {}", path.display()))?;
            SweepSpec::from_json(&text)
                .with_context(|| format!("invalid sweep config {}", path.display()))?
        }
        (None, Some(_)) => SweepSpec::new(Experiment::Horodecki),
        (None, None) => bail!("sweep needs --config or --experiment"),
    };
    if let Some(e) = &args.experiment {
        spec.experiment = e.parse()?;
    }
    if let Some(g) = &args.grid {
        spec.grid = Some(parse_grid(g)?);
    }
    for kv in &args.params {
        let (k, v) = kv
            .split_once('=')
            .with_context(|| format!("parameter `{kv}` must be key=value"))?;
        let num = || {
            v.parse::<f64>()
                .with_context(|| format!("parameter {k} needs a number, got `{v}`"))
        };
        let p = &mut spec.params;
        match k {
            "j" => p.j = Some(num()?),
            "h" => p.h = Some(num()?),
            "beta" => p.beta = Some(num()?),
            "parties" => {
                p.parties = Some(
                    v.parse()
                        .with_context(|| format!("parties needs a count, got `{v}`"))?,
                )
            }
            "state" => p.state = Some(v.parse()?),
            "file" => p.file = Some(v.to_string()),
            _ => bail!("unknown parameter `{k}` (expected j, h, beta, parties, state, file)"),
        }
    }
    let c = &args.common;
    if let Some(lb) = c.lb()? {
        spec.lb_method = lb;
    }
    if let Some(t) = c.tol {
        spec.tolerance = t;
    }
    c.apply_ascent(&mut spec.ascent);
    if let Some(w) = c.workers {
        spec.workers = w;
    }
    if let Some(o) = &c.out {
        spec.output = Some(o.clone());
    }
    if let Some(f) = c.format()? {
        spec.format = f;
    }
    spec.lower_only |= args.lower_only;
    if args.no_timings {
        spec.record_timings = false;
    }
    spec.validate()?;
    Ok(spec)
}

fn sweep(args: SweepArgs) -> Result<()> {
    let spec = sweep_spec(&args)?;
    log::info!(
        "sweeping {} over {} points",
        spec.experiment,
        spec.points()?.len()
    );
    let rows = run_sweep(&spec)?;
    let failed = rows
        .iter()
        .filter(|r| r.status.starts_with("error"))
        .count();
    if failed > 0 {
        eprintln!(
            "{failed} of {} points failed; see the status column",
            rows.len()
        );
    }
    let mut out = output(&spec.output)?;
    write_rows(&spec, &rows, spec.format, &mut out)?;
    out.flush()?;
    Ok(())
}

fn compare(args: CompareArgs) -> Result<()> {
    let dims = args
        .dims
        .split(['x', ','])
        .map(|d| d.trim().parse::<usize>())
        .collect::<Result<Vec<_>, _>>()
        .with_context(|| format!("bad dimensions `{}`", args.dims))?;
    let c = &args.common;
    let mut spec = CompareSpec::new(args.samples, dims, c.seed.unwrap_or(0));
    spec.rank = args.rank;
    if let Some(t) = c.tol {
        spec.tolerance = t;
    }
    if let Some(w) = c.workers {
        spec.workers = w;
    }
    if let Some(m) = &args.methods {
        spec.methods = m.split(',').map(str::parse).collect::<Result<_, _>>()?;
    } else if let Some(lb) = c.lb()? {
        spec.methods = vec![lb];
    }
    let report = compare_bounds(&spec)?;
    for s in &report.summary {
        eprintln!(
            "{:>6}  wins {:>3}  evaluated {:>3}  skipped {:>3}  mean {}",
            s.method,
            s.wins,
            s.evaluated,
            s.skipped,
            s.mean_seconds.map_or("-".into(), |t| format!("{t:.3}s"))
        );
    }
    let mut out = output(&c.out)?;
    write_report(&report, c.format()?.unwrap_or(OutputFormat::Csv), &mut out)?;
    out.flush()?;
    Ok(())
}

fn export(args: ExportArgs) -> Result<()> {
    let file = match construct_state(&args.state)? {
        InputState::Pure(psi) => MatrixFile::from_pure(&psi),
        InputState::Mixed(rho) => MatrixFile::from_density(&rho),
    };
    let json = match args.format.as_deref() {
        Some("json") => true,
        Some("text") => false,
        Some(other) => bail!("export-state writes text or json, not `{other}`"),
        None => args
            .out
            .as_ref()
            .is_some_and(|p| p.extension().is_some_and(|e| e == "json")),
    };
    let mut out = output(&args.out)?;
    out.write_all(if json { file.to_json() } else { file.to_text() }.as_bytes())?;
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("ENTBOUND_LOG", "warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Estimate(a) => estimate(a),
        Command::Sweep(a) => sweep(a).map(|_| None),
        Command::CompareBounds(a) => compare(a).map(|_| None),
        Command::ExportState(a) => export(a).map(|_| None),
    };
    match result {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(SolverFailure(msg))) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
