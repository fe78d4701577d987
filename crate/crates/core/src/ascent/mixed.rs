//! Ensemble refinement for mixed states.
//!
//! State: a decomposition `ρ = Σ p_i |ψ_i⟩⟨ψ_i|` and a separable
//! `σ = Σ q_i |φ_i⟩⟨φ_i|` with product `φ_i`, of equal length `N`.
//! One iteration re-mixes the decomposition of `ρ` to line it up with `σ`,
//! moves each `φ_i` toward its partner `ψ_i`, and re-weights `q`.

use std::io::Write;

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use super::product::ascend;
use super::{AscentConfig, ProductEnsemble};
use crate::bounds::{BoundResult, Direction, Method};
use crate::error::Result;
use crate::sdp::SolveStatus;
use crate::tensor::linalg::{eigh, svd};
use crate::tensor::ops::{fidelity_from_factors, psd_factor};
use crate::tensor::{random_unit_vector, seeded_rng, CMat, CVec, DensityMatrix, ProductState};

#[derive(Clone, Debug, Serialize)]
pub struct IterationRecord {
    pub restart: usize,
    pub iteration: usize,
    pub fidelity: f64,
    pub delta: f64,
}

/// Haar-like random unitary from the QR factorization of a Ginibre matrix.
fn random_unitary<R: Rng>(n: usize, rng: &mut R) -> CMat {
    let cols: Vec<CVec> = (0..n).map(|_| random_unit_vector(n, rng)).collect();
    let g = CMat::from_columns(&cols);
    g.qr().q()
}

/// Columns `√p_i ψ_i` of the eigen-decomposition padded to `size` columns.
fn initial_decomposition<R: Rng>(rho: &CMat, size: usize, rng: &mut R) -> CMat {
    let d = rho.nrows();
    let (vals, vecs) = eigh(rho);
    let top = vals[d - 1].max(0.0);
    let mut cols: Vec<CVec> = Vec::with_capacity(size);
    for k in (0..d).rev() {
        if vals[k] > 1e-14 * top && cols.len() < size {
            cols.push(vecs.column(k) * Complex64::new(vals[k].sqrt(), 0.0));
        }
    }
    while cols.len() < size {
        cols.push(CVec::zeros(d));
    }
    let a = CMat::from_columns(&cols);
    // one mixing step spreads the weight over all members
    a * random_unitary(size, rng).transpose()
}

struct Members {
    /// Columns `√p_i ψ_i`.
    alpha: CMat,
    phi: Vec<Vec<CVec>>,
    q: Vec<f64>,
}

fn split(alpha: &CMat, i: usize) -> (f64, CVec) {
    let col = alpha.column(i).into_owned();
    let n = col.norm();
    if n > 0.0 {
        (n * n, col / Complex64::new(n, 0.0))
    } else {
        (0.0, col)
    }
}

/// Columns `√q_i φ_i`, a factor of σ.
fn sigma_factor(m: &Members, d: usize) -> CMat {
    let mut b = CMat::zeros(d, m.phi.len());
    for (i, f) in m.phi.iter().enumerate() {
        let v = ProductState::new_unchecked(f.clone()).to_vector()
            * Complex64::new(m.q[i].max(0.0).sqrt(), 0.0);
        b.set_column(i, &v);
    }
    b
}

/// Refines each `φ_i` toward `ψ_i` and recomputes the optimal weights
/// `q_i ∝ p_i |⟨φ_i|ψ_i⟩|²`.
fn refine<R: Rng>(m: &mut Members, dims: &[usize], cfg: &AscentConfig, rng: &mut R) {
    let n = m.phi.len();
    let mut scores = vec![0.0; n];
    for (i, score) in scores.iter_mut().enumerate() {
        let (p, psi) = split(&m.alpha, i);
        if p <= 0.0 {
            continue;
        }
        let ov = ascend(&psi, dims, &mut m.phi[i], 0.0, cfg.inner_sweeps, rng);
        *score = p * ov * ov;
    }
    let total: f64 = scores.iter().sum();
    if total > 0.0 {
        m.q = scores.iter().map(|s| s / total).collect();
    }
}

/// Re-mixes the decomposition of ρ. With `A_ij = √q_i ⟨φ_i|(√p_j ψ_j)⟩` the
/// new columns `α'_i = Σ_j U_ij α_j` give matched overlaps summing to
/// `Tr(U Aᵀ)`; writing `Aᵀ = V D W†`, the unitary `U = W V†` makes that
/// sum `Tr D`, its maximum. Returns `Tr D`.
fn align(m: &mut Members) -> f64 {
    let phis = sigma_factor(m, m.alpha.nrows());
    let a = phis.adjoint() * &m.alpha;
    let (v, d, w) = svd(&a.transpose());
    let u = &w * v.adjoint();
    m.alpha = &m.alpha * u.transpose();
    d.iter().sum()
}

fn run_restart(
    rho: &DensityMatrix,
    cfg: &AscentConfig,
    restart: usize,
    history: &mut Vec<IterationRecord>,
) -> (f64, Members, SolveStatus) {
    let dims = rho.layout().dims().to_vec();
    let d = rho.dim();
    let size = cfg.ensemble_size.unwrap_or(d * d).max(1);
    let mut rng = seeded_rng(cfg.seed.wrapping_add(1000 * restart as u64 + 1));
    let alpha = initial_decomposition(rho.matrix(), size, &mut rng);
    let mut m = Members {
        phi: (0..size)
            .map(|_| {
                dims.iter()
                    .map(|&k| random_unit_vector(k, &mut rng))
                    .collect()
            })
            .collect(),
        q: vec![1.0 / size as f64; size],
        alpha,
    };
    // settle the random product states once before the first alignment
    refine(
        &mut m,
        &dims,
        &AscentConfig {
            inner_sweeps: cfg.inner_sweeps.max(1) * 3,
            ..cfg.clone()
        },
        &mut rng,
    );
    let root = psd_factor(rho.matrix(), 1e-14);
    let mut best_f = fidelity_from_factors(&root, &sigma_factor(&m, d));
    let mut best = (m.alpha.clone(), m.phi.clone(), m.q.clone());
    let mut status = SolveStatus::MaxIterations;
    for it in 0..cfg.max_iterations {
        align(&mut m);
        refine(&mut m, &dims, cfg, &mut rng);
        let f = fidelity_from_factors(&root, &sigma_factor(&m, d));
        let delta = f - best_f;
        log::trace!(
            "ascent restart {restart} iteration {}: fidelity {f:.12} delta {delta:.3e}",
            it + 1
        );
        history.push(IterationRecord {
            restart,
            iteration: it + 1,
            fidelity: f,
            delta,
        });
        if f > best_f {
            best_f = f;
            best = (m.alpha.clone(), m.phi.clone(), m.q.clone());
        }
        if delta < cfg.tolerance {
            // converged, or a non-increasing step tripped the monotonicity guard
            status = SolveStatus::Optimal;
            break;
        }
    }
    let (alpha, phi, q) = best;
    (best_f, Members { alpha, phi, q }, status)
}

/// Upper bound `1 - F(ρ, σ)` for the best separable `σ` found, with its
/// product-state decomposition.
pub fn ub_mixed(rho: &DensityMatrix, cfg: &AscentConfig) -> Result<(BoundResult, ProductEnsemble)> {
    let (b, e, _) = ub_mixed_with_history(rho, cfg)?;
    Ok((b, e))
}

/// As [`ub_mixed`], also returning the per-iteration fidelity trace.
pub fn ub_mixed_with_history(
    rho: &DensityMatrix,
    cfg: &AscentConfig,
) -> Result<(BoundResult, ProductEnsemble, Vec<IterationRecord>)> {
    cfg.validate()?;
    let started = std::time::Instant::now();
    let mut history = Vec::new();
    let mut best: Option<(f64, Members, SolveStatus)> = None;
    for r in 0..cfg.restarts.max(1) {
        let (f, m, st) = run_restart(rho, cfg, r, &mut history);
        log::debug!("ascent restart {r}: fidelity {f:.12} ({st})");
        if best.as_ref().is_none_or(|b| f > b.0) {
            best = Some((f, m, st));
        }
    }
    if let Some(path) = &cfg.trace_path {
        let mut file = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)?;
        for rec in &history {
            writeln!(file, "{}", serde_json::to_string(rec)?)?;
        }
    }
    let (f, m, status) = best.expect("at least one restart");
    let mut weights = Vec::new();
    let mut members = Vec::new();
    for (i, phi) in m.phi.into_iter().enumerate() {
        if m.q[i] > 0.0 {
            weights.push(m.q[i]);
            members.push(ProductState::new_unchecked(phi));
        }
    }
    let iterations = history.len();
    let bound = BoundResult::new(
        Method::Ascent,
        Direction::Upper,
        1.0 - f,
        status,
        cfg.tolerance,
    )
    .with_solver_stats(iterations, 0.0, started.elapsed().as_secs_f64());
    Ok((bound, ProductEnsemble { weights, members }, history))
}
