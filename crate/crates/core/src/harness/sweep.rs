use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::construct::{
    damped, depolarized, hexagon_reduced, xx_thermal, xxx_thermal, Resource, HEXAGON_SITES,
};
use super::spec::{Experiment, OutputFormat, SweepSpec};
use crate::ascent::AscentConfig;
use crate::bounds::{
    bracket, exact_two_qubit, lower_bound, BoundOptions, BoundResult, LowerBoundMethod,
    BRACKET_SLACK,
};
use crate::error::{Error, Result};
use crate::states::{ghz_w_mixture, horodecki_3x3};
use crate::tensor::{negativity, partial_trace, read_matrix_file, DensityMatrix, InputState};

/// Identifier of the sweep output layout. Bumped whenever a column is
/// added, removed or renamed.
pub const SWEEP_SCHEMA: &str = "entbound-sweep/1";

/// CSV header, in column order.
pub const SWEEP_COLUMNS: [&str; 13] = [
    "parameter",
    "method",
    "lower",
    "upper",
    "gap",
    "lb_status",
    "ub_iterations",
    "wall_time_seconds",
    "status",
    "negativity",
    "pair_01",
    "pair_02",
    "pair_12",
];

/// JSON Schema describing the JSON sweep output.
pub const SWEEP_JSON_SCHEMA: &str = include_str!("../../schema/sweep.schema.json");

/// Negativities below this count as PPT.
pub const PPT_TOLERANCE: f64 = 1e-9;

/// Lower bounds tried, in order, when the requested one exceeds the
/// dimension cap.
const FALLBACK: [LowerBoundMethod; 2] = [
    LowerBoundMethod::KExtension(2),
    LowerBoundMethod::PptFidelity,
];

/// One grid point of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub parameter: f64,
    /// Lower-bound method that produced `lower`; differs from the requested
    /// one when capacity forced a fallback.
    pub method: String,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    /// `upper − lower`.
    pub gap: Option<f64>,
    pub lb_status: String,
    pub ub_iterations: usize,
    pub wall_time_seconds: f64,
    /// `ok`, `precision-limited`, `skipped-npt` or `error: …`.
    pub status: String,
    /// Largest negativity over single-subsystem cuts.
    pub negativity: Option<f64>,
    /// Two-qubit values of the pairwise marginals of a three-qubit state.
    pub pair_01: Option<f64>,
    pub pair_02: Option<f64>,
    pub pair_12: Option<f64>,
}

impl SweepRow {
    fn empty(parameter: f64, method: LowerBoundMethod) -> Self {
        Self {
            parameter,
            method: method.tag(),
            lower: None,
            upper: None,
            gap: None,
            lb_status: String::new(),
            ub_iterations: 0,
            wall_time_seconds: 0.0,
            status: "ok".into(),
            negativity: None,
            pair_01: None,
            pair_02: None,
            pair_12: None,
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

/// The state a sweep evaluates at grid value `x`.
pub fn experiment_state(spec: &SweepSpec, x: f64) -> Result<DensityMatrix> {
    let p = &spec.params;
    let resource = p.state.unwrap_or(Resource::Ghz);
    match spec.experiment {
        Experiment::Horodecki => horodecki_3x3(x),
        Experiment::GhzWMix => ghz_w_mixture(x, p.parties.unwrap_or(3)),
        Experiment::XxThermal | Experiment::XxPptWindow => xx_thermal(x, p.j.unwrap_or(1.0), 3),
        Experiment::XxxField => xxx_thermal(p.beta.unwrap_or(10.0), x, p.j.unwrap_or(-1.0)),
        Experiment::XxxBeta => xxx_thermal(x, p.h.unwrap_or(1.0), p.j.unwrap_or(-1.0)),
        Experiment::Hexagon => {
            hexagon_reduced(p.beta.unwrap_or(5.0), x, p.j.unwrap_or(1.0), &HEXAGON_SITES)
        }
        Experiment::NoiseAd => damped(x, resource),
        Experiment::NoiseDep => depolarized(x, resource),
        Experiment::CustomFile => {
            let pattern = p
                .file
                .as_deref()
                .ok_or_else(|| Error::usage("custom-file needs params.file"))?;
            let path = PathBuf::from(pattern.replace("{}", &x.to_string()));
            match read_matrix_file(&path)?.into_state()? {
                InputState::Pure(psi) => Ok(psi.to_density()),
                InputState::Mixed(rho) => Ok(rho),
            }
        }
    }
}

/// Largest negativity over the cuts separating one subsystem from the rest.
pub fn max_single_cut_negativity(rho: &DensityMatrix) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for i in 0..rho.layout().len() {
        worst = worst.max(negativity(rho, &[i])?);
    }
    Ok(worst)
}

/// Two-qubit values of the marginals on sites (0,1), (0,2), (1,2).
pub fn pairwise_two_qubit(rho: &DensityMatrix) -> Result<[f64; 3]> {
    if rho.layout().dims() != [2, 2, 2] {
        return Err(Error::usage(format!(
            "pairwise values need three qubits, got {}",
            rho.layout()
        )));
    }
    let pair = |a, b| exact_two_qubit(&partial_trace(rho, &[a, b])?);
    Ok([pair(0, 1)?, pair(0, 2)?, pair(1, 2)?])
}

/// Runs `method`, falling back to cheaper bounds on a capacity error. The
/// returned method is the one that produced the result.
pub fn lower_bound_with_fallback(
    rho: &DensityMatrix,
    method: LowerBoundMethod,
    opts: &BoundOptions,
) -> Result<(BoundResult, LowerBoundMethod)> {
    let first = match lower_bound(rho, method, opts) {
        Err(e @ Error::Capacity { .. }) => e,
        other => return other.map(|r| (r, method)),
    };
    for fb in FALLBACK.into_iter().filter(|&m| m != method) {
        match lower_bound(rho, fb, opts) {
            Err(Error::Capacity { .. }) => continue,
            other => {
                log::info!("{method} exceeds capacity, fell back to {fb}");
                return other.map(|r| (r, fb));
            }
        }
    }
    Err(first)
}

fn evaluate(
    spec: &SweepSpec,
    x: f64,
    opts: &BoundOptions,
    ascent: &AscentConfig,
) -> Result<SweepRow> {
    let mut row = SweepRow::empty(x, spec.lb_method);
    let rho = experiment_state(spec, x)?;
    if rho.layout().len() >= 2 {
        row.negativity = Some(max_single_cut_negativity(&rho)?);
    }
    if rho.layout().dims() == [2, 2, 2] {
        let [a, b, c] = pairwise_two_qubit(&rho)?;
        (row.pair_01, row.pair_02, row.pair_12) = (Some(a), Some(b), Some(c));
    }
    if spec.experiment == Experiment::XxPptWindow && row.negativity.unwrap_or(0.0) > PPT_TOLERANCE {
        row.status = "skipped-npt".into();
        return Ok(row);
    }
    let (lower, used) = lower_bound_with_fallback(&rho, spec.lb_method, opts)?;
    row.method = used.tag();
    row.lb_status = lower.status.to_string();
    if spec.lower_only {
        row.lower = Some(lower.value);
        if lower.precision_limited {
            row.status = "precision-limited".into();
        }
        return Ok(row);
    }
    let est = bracket(&rho, lower, used, opts, ascent)?;
    row.lower = Some(est.lower.value);
    row.upper = Some(est.upper.value);
    row.gap = Some(est.width());
    row.ub_iterations = est.upper.iterations;
    if est.lower.precision_limited || est.width() < -BRACKET_SLACK {
        row.status = "precision-limited".into();
    }
    Ok(row)
}

fn evaluate_guarded(
    spec: &SweepSpec,
    x: f64,
    opts: &BoundOptions,
    ascent: &AscentConfig,
) -> SweepRow {
    let started = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(|| evaluate(spec, x, opts, ascent)));
    let mut row = match outcome {
        Ok(Ok(row)) => row,
        Ok(Err(e)) => {
            log::warn!(
                "{} at {} = {x}: {e}",
                spec.experiment,
                spec.experiment.parameter()
            );
            SweepRow {
                status: format!("error: {e}"),
                ..SweepRow::empty(x, spec.lb_method)
            }
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            SweepRow {
                status: format!("error: {msg}"),
                ..SweepRow::empty(x, spec.lb_method)
            }
        }
    };
    if spec.record_timings {
        row.wall_time_seconds = started.elapsed().as_secs_f64();
    }
    log::debug!(
        "{} {} = {x}: {}",
        spec.experiment,
        spec.experiment.parameter(),
        row.status
    );
    row
}

/// Evaluates every grid point on a pool of `spec.workers` threads. Rows come
/// back in grid order; failures are recorded in the row status.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let points = spec.points()?;
    let opts = BoundOptions::with_tolerance(spec.tolerance);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.workers)
        .build()
        .map_err(|e| Error::usage(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| {
        points
            .par_iter()
            .map(|&x| evaluate_guarded(spec, x, &opts, &spec.ascent))
            .collect()
    }))
}

#[derive(Serialize)]
struct SweepJson<'a> {
    schema: &'a str,
    experiment: &'a str,
    parameter: &'a str,
    rows: &'a [SweepRow],
}

/// Writes rows in the requested format.
pub fn write_rows(
    spec: &SweepSpec,
    rows: &[SweepRow],
    format: OutputFormat,
    out: impl Write,
) -> Result<()> {
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for r in rows {
                w.serialize(r)
                    .map_err(|e| Error::usage(format!("CSV output failed: {e}")))?;
            }
            if rows.is_empty() {
                w.write_record(SWEEP_COLUMNS)
                    .map_err(|e| Error::usage(format!("CSV output failed: {e}")))?;
            }
            w.flush()?;
        }
        OutputFormat::Json => {
            let doc = SweepJson {
                schema: SWEEP_SCHEMA,
                experiment: spec.experiment.tag(),
                parameter: spec.experiment.parameter(),
                rows,
            };
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, &doc)?;
            writeln!(out)?;
        }
    }
    Ok(())
}

/// Reads back a CSV sweep table.
pub fn read_csv_rows(text: &str) -> Result<Vec<SweepRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = r
        .headers()
        .map_err(|e| Error::Parse {
            line: Some(1),
            msg: e.to_string(),
        })?
        .iter()
        .map(str::to_string)
        .collect();
    if header != SWEEP_COLUMNS {
        return Err(Error::Parse {
            line: Some(1),
            msg: format!("unexpected sweep header {header:?}"),
        });
    }
    r.deserialize()
        .enumerate()
        .map(|(i, row)| {
            row.map_err(|e| Error::Parse {
                line: Some(i + 2),
                msg: e.to_string(),
            })
        })
        .collect()
}
