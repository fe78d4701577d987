//! Experiment harness behind the command-line tool: state constructors,
//! parameter sweeps, bound comparison and single-state estimates.

mod compare;
mod construct;
mod spec;
mod sweep;

use std::time::Instant;

use serde::Serialize;

pub use compare::{
    compare_bounds, write_report, BoundSummary, Cell, CompareReport, CompareSpec, PairDeviation,
    WIN_TIE,
};
pub use construct::{construct_state, Constructor, Resource, HEXAGON_SITES};
pub use spec::{Experiment, ExperimentParams, Grid, GridPoints, OutputFormat, Range, SweepSpec};
pub use sweep::{
    experiment_state, lower_bound_with_fallback, max_single_cut_negativity, pairwise_two_qubit,
    read_csv_rows, run_sweep, write_rows, SweepRow, PPT_TOLERANCE, SWEEP_COLUMNS,
    SWEEP_JSON_SCHEMA, SWEEP_SCHEMA,
};

use crate::ascent::{closest_product_state, AscentConfig};
use crate::bounds::{bracket, pure_sdp_estimate_with, BoundOptions, LowerBoundMethod};
use crate::error::Result;
use crate::sdp::SolveStatus;
use crate::tensor::InputState;

/// Result of a single-state estimate as printed by the CLI.
#[derive(Clone, Debug, Serialize)]
pub struct EstimateReport {
    pub lower: f64,
    pub upper: f64,
    pub gap: f64,
    pub lower_method: String,
    pub upper_method: String,
    pub lb_status: SolveStatus,
    pub ub_status: SolveStatus,
    pub solver_tolerance: f64,
    pub ascent_tolerance: f64,
    pub lower_seconds: f64,
    pub upper_seconds: f64,
    pub precision_limited: bool,
    /// Accuracy radius of the pure-state estimate; absent for mixed input.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<f64>,
}

impl EstimateReport {
    pub fn solver_ok(&self) -> bool {
        self.lb_status == SolveStatus::Optimal
    }
}

/// Brackets the entanglement of `input`. Pure states use the pure-state
/// SDP and the product-state ascent; mixed states use `lb` (with the
/// capacity fallback) and the ensemble ascent.
pub fn estimate_input(
    input: &InputState,
    lb: LowerBoundMethod,
    opts: &BoundOptions,
    ascent: &AscentConfig,
) -> Result<EstimateReport> {
    match input {
        InputState::Pure(psi) => {
            let est = pure_sdp_estimate_with(psi, opts)?;
            let started = Instant::now();
            let (_, overlap) = closest_product_state(psi, ascent)?;
            let upper = 1.0 - overlap * overlap;
            Ok(EstimateReport {
                lower: est.value,
                upper,
                gap: upper - est.value,
                lower_method: "pure".into(),
                upper_method: "ascent".into(),
                lb_status: est.status,
                ub_status: SolveStatus::Optimal,
                solver_tolerance: opts.solver.tolerance,
                ascent_tolerance: ascent.tolerance,
                lower_seconds: est.seconds,
                upper_seconds: started.elapsed().as_secs_f64(),
                precision_limited: est.value > upper + crate::bounds::BRACKET_SLACK,
                accuracy: Some(est.accuracy),
            })
        }
        InputState::Mixed(rho) => {
            let (lower, used) = lower_bound_with_fallback(rho, lb, opts)?;
            let est = bracket(rho, lower, used, opts, ascent)?;
            Ok(EstimateReport {
                lower: est.lower.value,
                upper: est.upper.value,
                gap: est.width(),
                lower_method: used.tag(),
                upper_method: "ascent".into(),
                lb_status: est.lower.status,
                ub_status: est.upper.status,
                solver_tolerance: opts.solver.tolerance,
                ascent_tolerance: ascent.tolerance,
                lower_seconds: est.lower.seconds,
                upper_seconds: est.upper.seconds,
                precision_limited: est.lower.precision_limited,
                accuracy: None,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ghz_pure_path_gives_one_half() {
        let input = construct_state("ghz(3)").unwrap();
        let r = estimate_input(
            &input,
            LowerBoundMethod::PurityFull,
            &BoundOptions::default(),
            &AscentConfig::pure(),
        )
        .unwrap();
        assert_eq!(r.lower_method, "pure");
        assert!((r.lower - 0.5).abs() < 1e-6, "{}", r.lower);
        assert!((r.upper - 0.5).abs() < 1e-6, "{}", r.upper);
        assert!(r.solver_ok());
    }

    #[test]
    fn mixed_path_brackets() {
        let input = construct_state("ghz-w(0.4)").unwrap();
        let r = estimate_input(
            &input,
            LowerBoundMethod::PptFidelity,
            &BoundOptions::default(),
            &AscentConfig::mixed(),
        )
        .unwrap();
        assert_eq!(r.lower_method, "lb1");
        assert!(r.gap >= -crate::bounds::BRACKET_SLACK);
        assert!(r.accuracy.is_none());
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["lb_status"], "optimal");
    }
}
