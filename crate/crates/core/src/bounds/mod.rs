//! Lower bounds on the geometric entanglement from SDP relaxations, the
//! pure-state estimate, the two-qubit closed form, and [`estimate`], which
//! brackets the value between a lower bound and an ascent upper bound.

mod pure;
mod relax;

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

pub use pure::{concurrence, exact_two_qubit, pure_sdp_estimate_with, PureEstimate};
pub use relax::{
    lb_k_extension_with, lb_ppt_fidelity_with, lb_purity_full_with, lb_purity_reduced_with,
};

use crate::ascent::{ub_mixed, AscentConfig, ProductEnsemble};
use crate::error::{Error, Result};
use crate::sdp::{SolveStatus, SolverOptions};
use crate::tensor::{CMat, DensityMatrix, PureState};

/// Slack allowed between a lower and an upper bound before they are
/// treated as contradictory.
pub const BRACKET_SLACK: f64 = 1e-7;

/// Default cap on the total dimension of a k-extended state.
pub const DEFAULT_DIMENSION_CAP: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Lower,
    Upper,
}

/// Which computation produced a bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    PptFidelity,
    KExtension(usize),
    PurityReduced,
    PurityFull,
    PureSdp,
    Ascent,
    ExactTwoQubit,
}

impl Method {
    pub fn tag(self) -> String {
        match self {
            Method::PptFidelity => "lb1".into(),
            Method::KExtension(k) => format!("lb2k{k}"),
            Method::PurityReduced => "lb3".into(),
            Method::PurityFull => "lb4".into(),
            Method::PureSdp => "pure".into(),
            Method::Ascent => "ascent".into(),
            Method::ExactTwoQubit => "exact2q".into(),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tag())
    }
}

impl Serialize for Method {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.tag())
    }
}

/// The SDP lower bounds selectable by name.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LowerBoundMethod {
    PptFidelity,
    KExtension(usize),
    PurityReduced,
    PurityFull,
}

impl LowerBoundMethod {
    pub fn method(self) -> Method {
        match self {
            LowerBoundMethod::PptFidelity => Method::PptFidelity,
            LowerBoundMethod::KExtension(k) => Method::KExtension(k),
            LowerBoundMethod::PurityReduced => Method::PurityReduced,
            LowerBoundMethod::PurityFull => Method::PurityFull,
        }
    }

    pub fn tag(self) -> String {
        self.method().tag()
    }
}

impl fmt::Display for LowerBoundMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tag())
    }
}

impl FromStr for LowerBoundMethod {
    type Err = Error;

    /// Accepts `lb1`, `lb2k<k>`, `lb3`, `lb4`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        match t.as_str() {
            "lb1" => Ok(LowerBoundMethod::PptFidelity),
            "lb3" => Ok(LowerBoundMethod::PurityReduced),
            "lb4" => Ok(LowerBoundMethod::PurityFull),
            _ => t
                .strip_prefix("lb2k")
                .and_then(|k| k.parse::<usize>().ok())
                .filter(|&k| k >= 1)
                .map(LowerBoundMethod::KExtension)
                .ok_or_else(|| {
                    Error::usage(format!(
                        "unknown lower-bound method `{s}` (expected lb1, lb2k2, lb2k3, lb3, lb4)"
                    ))
                }),
        }
    }
}

impl Serialize for LowerBoundMethod {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.tag())
    }
}

impl<'de> serde::Deserialize<'de> for LowerBoundMethod {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Prefactor of `√ε` in the pure-state accuracy radius. Two candidates are
/// in circulation for M parties; `4(M-1)` is the larger and is the default.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum AccuracyFactor {
    #[default]
    FourMMinusOne,
    FourMMinusTwo,
}

#[derive(Clone, Debug)]
pub struct BoundOptions {
    pub solver: SolverOptions,
    /// Impose PPT across every bipartition instead of single subsystems only.
    pub all_bipartitions: bool,
    /// Cap on the total dimension of a k-extended state.
    pub dimension_cap: usize,
    /// In the bipartite k-extension, restrict the extension to states
    /// invariant under permuting the copies. The optimum is unchanged (the
    /// constraints are permutation invariant, so any feasible extension can
    /// be averaged) and the problem shrinks by roughly `k!`.
    pub symmetric_extension: bool,
    pub accuracy_factor: AccuracyFactor,
}

impl Default for BoundOptions {
    fn default() -> Self {
        Self {
            solver: SolverOptions::default(),
            all_bipartitions: false,
            dimension_cap: DEFAULT_DIMENSION_CAP,
            symmetric_extension: true,
            accuracy_factor: AccuracyFactor::default(),
        }
    }
}

impl BoundOptions {
    pub fn with_tolerance(tolerance: f64) -> Self {
        Self {
            solver: SolverOptions::with_tolerance(tolerance),
            ..Self::default()
        }
    }
}

/// Named matrices witnessing a bound (optimal σ, X, ...).
#[derive(Clone, Debug, Default)]
pub struct Certificate {
    pub matrices: Vec<(String, CMat)>,
}

impl Certificate {
    pub fn with(mut self, name: &str, m: CMat) -> Self {
        self.matrices.push((name.to_string(), m));
        self
    }

    pub fn get(&self, name: &str) -> Option<&CMat> {
        self.matrices
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, m)| m)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundResult {
    /// Bound clamped to `[0, 1]`.
    pub value: f64,
    /// Value before clamping.
    pub raw_value: f64,
    pub direction: Direction,
    pub method: Method,
    #[serde(skip)]
    pub certificate: Option<Certificate>,
    pub solver_tolerance: f64,
    pub status: SolveStatus,
    /// Set when a reconciliation with the opposite bound failed.
    pub precision_limited: bool,
    pub iterations: usize,
    pub duality_gap: f64,
    pub seconds: f64,
}

impl BoundResult {
    pub fn new(
        method: Method,
        direction: Direction,
        raw: f64,
        status: SolveStatus,
        tolerance: f64,
    ) -> Self {
        Self {
            value: raw.clamp(0.0, 1.0),
            raw_value: raw,
            direction,
            method,
            certificate: None,
            solver_tolerance: tolerance,
            status,
            precision_limited: false,
            iterations: 0,
            duality_gap: 0.0,
            seconds: 0.0,
        }
    }

    pub fn with_certificate(mut self, c: Certificate) -> Self {
        self.certificate = Some(c);
        self
    }

    pub fn with_solver_stats(mut self, iterations: usize, gap: f64, seconds: f64) -> Self {
        self.iterations = iterations;
        self.duality_gap = gap;
        self.seconds = seconds;
        self
    }
}

pub fn lb_ppt_fidelity(rho: &DensityMatrix, tolerance: f64) -> Result<BoundResult> {
    lb_ppt_fidelity_with(rho, &BoundOptions::with_tolerance(tolerance))
}

pub fn lb_k_extension(rho: &DensityMatrix, k: usize, tolerance: f64) -> Result<BoundResult> {
    lb_k_extension_with(rho, k, &BoundOptions::with_tolerance(tolerance))
}

pub fn lb_purity_reduced(rho: &DensityMatrix, tolerance: f64) -> Result<BoundResult> {
    lb_purity_reduced_with(rho, &BoundOptions::with_tolerance(tolerance))
}

pub fn lb_purity_full(rho: &DensityMatrix, tolerance: f64) -> Result<BoundResult> {
    lb_purity_full_with(rho, &BoundOptions::with_tolerance(tolerance))
}

pub fn pure_sdp_estimate(psi: &PureState, tolerance: f64) -> Result<PureEstimate> {
    pure_sdp_estimate_with(psi, &BoundOptions::with_tolerance(tolerance))
}

/// Runs the selected lower bound.
pub fn lower_bound(
    rho: &DensityMatrix,
    method: LowerBoundMethod,
    opts: &BoundOptions,
) -> Result<BoundResult> {
    match method {
        LowerBoundMethod::PptFidelity => lb_ppt_fidelity_with(rho, opts),
        LowerBoundMethod::KExtension(k) => lb_k_extension_with(rho, k, opts),
        LowerBoundMethod::PurityReduced => lb_purity_reduced_with(rho, opts),
        LowerBoundMethod::PurityFull => lb_purity_full_with(rho, opts),
    }
}

/// A lower and an upper bound on the same state.
#[derive(Clone, Debug)]
pub struct Estimate {
    pub lower: BoundResult,
    pub upper: BoundResult,
    /// Separable decomposition certifying the upper bound.
    pub ensemble: ProductEnsemble,
}

impl Estimate {
    pub fn width(&self) -> f64 {
        self.upper.value - self.lower.value
    }
}

pub fn estimate(rho: &DensityMatrix, lb: LowerBoundMethod, ub: &AscentConfig) -> Result<Estimate> {
    estimate_with(rho, lb, &BoundOptions::default(), ub)
}

/// Brackets the entanglement of `rho`. If the raw lower bound exceeds the
/// upper one by more than [`BRACKET_SLACK`], the SDP is re-solved at a
/// tighter tolerance and the ascent is rerun with more restarts; if the
/// conflict persists both results are flagged `precision_limited`.
pub fn estimate_with(
    rho: &DensityMatrix,
    lb: LowerBoundMethod,
    opts: &BoundOptions,
    ub: &AscentConfig,
) -> Result<Estimate> {
    let lower = lower_bound(rho, lb, opts)?;
    bracket(rho, lower, lb, opts, ub)
}

/// Pairs an already computed lower bound from `lb` with an ascent upper
/// bound, reconciling them as [`estimate_with`] does.
pub(crate) fn bracket(
    rho: &DensityMatrix,
    mut lower: BoundResult,
    lb: LowerBoundMethod,
    opts: &BoundOptions,
    ub: &AscentConfig,
) -> Result<Estimate> {
    let (mut upper, mut ensemble) = ub_mixed(rho, ub)?;
    if lower.value > upper.value + BRACKET_SLACK {
        let mut tight = opts.clone();
        tight.solver.tolerance = (opts.solver.tolerance * 1e-2).max(1e-11);
        let relower = lower_bound(rho, lb, &tight)?;
        if relower.value < lower.value {
            lower = relower;
        }
        let mut more = ub.clone();
        more.restarts = ub.restarts * 2;
        more.seed = ub.seed.wrapping_add(1);
        let (reupper, reens) = ub_mixed(rho, &more)?;
        if reupper.value < upper.value {
            upper = reupper;
            ensemble = reens;
        }
        if lower.value > upper.value + BRACKET_SLACK {
            lower.precision_limited = true;
            upper.precision_limited = true;
        }
    }
    Ok(Estimate {
        lower,
        upper,
        ensemble,
    })
}

#[cfg(test)]
mod tests;
