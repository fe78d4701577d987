//! Pure-state SDP estimate with its accuracy radius, and the closed form
//! for two qubits.

use std::time::Instant;

use serde::Serialize;

use super::relax::ppt_sets;
use super::{AccuracyFactor, BoundOptions};
use crate::error::{Error, Result};
use crate::sdp::{solve_with, LinearTerm, SdpProblem, Sense, SolveStatus};
use crate::tensor::linalg::{identity, kron, max_eigenvalue, outer, pauli, singular_values};
use crate::tensor::ops::psd_factor;
use crate::tensor::{partial_trace_matrix, DensityMatrix, PureState};

#[derive(Clone, Debug, Serialize)]
pub struct PureEstimate {
    /// `1 - max Tr(ρ_red σ)` over PPT `σ`, a lower bound on the entanglement.
    pub value: f64,
    /// `1 - λ_max(σ*)`.
    pub epsilon: f64,
    /// Radius `factor · √ε`; the true value lies in `[value, value + accuracy]`.
    pub accuracy: f64,
    pub status: SolveStatus,
    pub seconds: f64,
}

/// Estimate for a pure state from the marginal on all but the last factor.
pub fn pure_sdp_estimate_with(psi: &PureState, opts: &BoundOptions) -> Result<PureEstimate> {
    let m = psi.layout().len();
    if m < 2 {
        return Err(Error::usage(
            "pure-state estimate needs at least two subsystems",
        ));
    }
    let started = Instant::now();
    let dims = psi.layout().dims();
    let keep: Vec<usize> = (0..m - 1).collect();
    let reduced = partial_trace_matrix(&outer(psi.amplitudes()), dims, &keep);
    let rdims = &dims[..m - 1];
    let n: usize = rdims.iter().product();
    let mut p = SdpProblem::new(Sense::Maximize);
    let sigma = p.psd_hermitian("sigma", n)?;
    p.add_equality(vec![LinearTerm::new(sigma).trace(n)], identity(1))?;
    for s in ppt_sets(rdims, opts.all_bipartitions) {
        p.add_psd(
            n,
            None,
            vec![LinearTerm::new(sigma).partial_transpose(rdims, &s)],
        )?;
    }
    p.add_objective(sigma, reduced)?;
    let sol = solve_with(&p, &opts.solver)?;
    let lmax = max_eigenvalue(&sol.primal_blocks[sigma.index()]);
    let epsilon = (1.0 - lmax).clamp(0.0, 1.0);
    Ok(PureEstimate {
        value: (1.0 - sol.objective_value).clamp(0.0, 1.0),
        epsilon,
        accuracy: opts.accuracy_factor.factor(m) * epsilon.sqrt(),
        status: sol.status,
        seconds: started.elapsed().as_secs_f64(),
    })
}

impl AccuracyFactor {
    pub fn factor(self, parties: usize) -> f64 {
        let m = parties as f64;
        match self {
            AccuracyFactor::FourMMinusOne => 4.0 * (m - 1.0),
            AccuracyFactor::FourMMinusTwo => 4.0 * (m - 2.0),
        }
    }
}

/// Wootters concurrence of a two-qubit state. With `ρ = F F†`, the values
/// entering the formula are the singular values of `Fᵀ (σy⊗σy) F`, which
/// avoids square roots of noisy near-zero eigenvalues for low-rank input.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    if rho.layout().dims() != [2, 2] {
        return Err(Error::usage(format!(
            "concurrence needs a 2⊗2 layout, got {}",
            rho.layout()
        )));
    }
    let yy = kron(&pauli(2), &pauli(2));
    let f = psd_factor(rho.matrix(), 1e-14);
    let tau = f.transpose() * yy * &f;
    let mut sv: Vec<f64> = singular_values(&tau).iter().copied().collect();
    sv.resize(4.max(sv.len()), 0.0);
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok((sv[0] - sv[1..].iter().sum::<f64>()).max(0.0))
}

/// Geometric entanglement of a two-qubit state, `(1 - √(1 - C²))/2`.
pub fn exact_two_qubit(rho: &DensityMatrix) -> Result<f64> {
    let c = concurrence(rho)?.min(1.0);
    Ok(0.5 * (1.0 - (1.0 - c * c).sqrt()))
}
