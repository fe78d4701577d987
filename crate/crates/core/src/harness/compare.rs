use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::spec::OutputFormat;
use crate::bounds::{lower_bound, BoundOptions, LowerBoundMethod};
use crate::error::{Error, Result};
use crate::sdp::{SolveStatus, DEFAULT_TOLERANCE};
use crate::tensor::{random_density_matrix, SubsystemLayout};

/// Bounds within this distance of the best value on a sample all count as
/// winners.
pub const WIN_TIE: f64 = 3e-8;

#[derive(Clone, Debug)]
pub struct CompareSpec {
    pub samples: usize,
    pub dims: Vec<usize>,
    /// Rank of the random states; `None` means full rank.
    pub rank: Option<usize>,
    pub seed: u64,
    pub tolerance: f64,
    pub methods: Vec<LowerBoundMethod>,
    pub workers: usize,
}

impl CompareSpec {
    pub fn new(samples: usize, dims: Vec<usize>, seed: u64) -> Self {
        Self {
            samples,
            dims,
            rank: None,
            seed,
            tolerance: DEFAULT_TOLERANCE,
            methods: vec![
                LowerBoundMethod::PptFidelity,
                LowerBoundMethod::KExtension(2),
                LowerBoundMethod::KExtension(3),
                LowerBoundMethod::PurityReduced,
                LowerBoundMethod::PurityFull,
            ],
            workers: 1,
        }
    }
}

/// Outcome of one bound on one sample.
#[derive(Clone, Debug, Serialize)]
pub struct Cell {
    pub value: Option<f64>,
    pub seconds: Option<f64>,
    /// `ok`, `skipped` (capacity) or the error or solver status.
    pub status: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundSummary {
    pub method: String,
    pub evaluated: usize,
    pub skipped: usize,
    pub mean_seconds: Option<f64>,
    /// Samples on which this bound was best or tied for best within [`WIN_TIE`].
    pub wins: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct PairDeviation {
    pub a: String,
    pub b: String,
    /// Largest `|a − b|` over samples where both were computed.
    pub max_abs: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CompareReport {
    pub dims: Vec<usize>,
    pub seed: u64,
    pub methods: Vec<String>,
    /// `cells[sample][method]`.
    pub cells: Vec<Vec<Cell>>,
    pub summary: Vec<BoundSummary>,
    pub deviations: Vec<PairDeviation>,
}

impl CompareReport {
    pub fn summary_for(&self, method: LowerBoundMethod) -> Option<&BoundSummary> {
        self.summary.iter().find(|s| s.method == method.tag())
    }

    pub fn deviation(&self, a: LowerBoundMethod, b: LowerBoundMethod) -> Option<f64> {
        let (a, b) = (a.tag(), b.tag());
        self.deviations
            .iter()
            .find(|d| (d.a == a && d.b == b) || (d.a == b && d.b == a))
            .and_then(|d| d.max_abs)
    }
}

fn run_cell(rho: &crate::DensityMatrix, method: LowerBoundMethod, opts: &BoundOptions) -> Cell {
    let started = Instant::now();
    match lower_bound(rho, method, opts) {
        Ok(r) => Cell {
            value: Some(r.value),
            seconds: Some(started.elapsed().as_secs_f64()),
            status: if r.status == SolveStatus::Optimal {
                "ok".into()
            } else {
                r.status.to_string()
            },
        },
        Err(Error::Capacity { .. }) => Cell {
            value: None,
            seconds: None,
            status: "skipped".into(),
        },
        Err(e) => Cell {
            value: None,
            seconds: None,
            status: format!("error: {e}"),
        },
    }
}

/// Runs every method on `samples` random states, seeded `seed, seed + 1, …`.
pub fn compare_bounds(spec: &CompareSpec) -> Result<CompareReport> {
    if spec.samples == 0 {
        return Err(Error::usage("compare-bounds needs at least one sample"));
    }
    if spec.methods.is_empty() {
        return Err(Error::usage("compare-bounds needs at least one method"));
    }
    let layout = SubsystemLayout::new(spec.dims.clone())?;
    let rank = spec.rank.unwrap_or(layout.total());
    let states = (0..spec.samples)
        .map(|i| random_density_matrix(&layout, rank, spec.seed.wrapping_add(i as u64)))
        .collect::<Result<Vec<_>>>()?;
    let opts = BoundOptions::with_tolerance(spec.tolerance);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.workers.max(1))
        .build()
        .map_err(|e| Error::usage(format!("cannot start worker pool: {e}")))?;
    let cells: Vec<Vec<Cell>> = pool.install(|| {
        states
            .par_iter()
            .enumerate()
            .map(|(i, rho)| {
                let row: Vec<Cell> = spec
                    .methods
                    .iter()
                    .map(|&m| run_cell(rho, m, &opts))
                    .collect();
                log::debug!("compare-bounds sample {i} done");
                row
            })
            .collect()
    });
    Ok(summarize(spec, cells))
}

fn summarize(spec: &CompareSpec, cells: Vec<Vec<Cell>>) -> CompareReport {
    let n = spec.methods.len();
    let mut wins = vec![0usize; n];
    for row in &cells {
        let best = row
            .iter()
            .filter_map(|c| c.value)
            .fold(f64::NEG_INFINITY, f64::max);
        for (k, c) in row.iter().enumerate() {
            if c.value.is_some_and(|v| v >= best - WIN_TIE) {
                wins[k] += 1;
            }
        }
    }
    let summary = spec
        .methods
        .iter()
        .enumerate()
        .map(|(k, m)| {
            let times: Vec<f64> = cells.iter().filter_map(|r| r[k].seconds).collect();
            BoundSummary {
                method: m.tag(),
                evaluated: cells.iter().filter(|r| r[k].value.is_some()).count(),
                skipped: cells.iter().filter(|r| r[k].status == "skipped").count(),
                mean_seconds: (!times.is_empty())
                    .then(|| times.iter().sum::<f64>() / times.len() as f64),
                wins: wins[k],
            }
        })
        .collect();
    let mut deviations = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            let max_abs = cells
                .iter()
                .filter_map(|r| Some((r[a].value? - r[b].value?).abs()))
                .reduce(f64::max);
            deviations.push(PairDeviation {
                a: spec.methods[a].tag(),
                b: spec.methods[b].tag(),
                max_abs,
            });
        }
    }
    CompareReport {
        dims: spec.dims.clone(),
        seed: spec.seed,
        methods: spec.methods.iter().map(|m| m.tag()).collect(),
        cells,
        summary,
        deviations,
    }
}

/// CSV gives the per-method summary; JSON the full report.
pub fn write_report(
    report: &CompareReport,
    format: OutputFormat,
    mut out: impl Write,
) -> Result<()> {
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for s in &report.summary {
                w.serialize(s)
                    .map_err(|e| Error::usage(format!("CSV output failed: {e}")))?;
            }
            w.flush()?;
        }
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut out, report)?;
            writeln!(out)?;
        }
    }
    Ok(())
}
