use super::layout::Radix;
use super::linalg::{eigh, singular_values, trace_norm_hermitian};
use super::state::RANK_THRESHOLD;
use super::{cr, CMat, CVec, DensityMatrix, PureState};
use crate::error::{Error, Result};

/// Kronecker product in left-to-right order.
pub fn tensor_product(factors: &[CMat]) -> Result<CMat> {
    let (first, rest) = factors
        .split_first()
        .ok_or_else(|| Error::usage("tensor product of an empty list"))?;
    for f in factors {
        if f.nrows() != f.ncols() {
            return Err(Error::dim("tensor product factors must be square"));
        }
    }
    Ok(rest.iter().fold(first.clone(), |acc, f| acc.kronecker(f)))
}

fn sorted_unique(idx: &[usize]) -> Vec<usize> {
    let mut v = idx.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}

/// Partial trace of a raw matrix over every subsystem not in `keep`.
/// Kept subsystems stay in ascending order. An empty `keep` gives the 1×1 trace.
pub fn partial_trace_matrix(m: &CMat, dims: &[usize], keep: &[usize]) -> CMat {
    let keep = sorted_unique(keep);
    let radix = Radix::new(dims);
    let traced: Vec<usize> = (0..dims.len()).filter(|i| !keep.contains(i)).collect();
    let dk: usize = keep.iter().map(|&i| dims[i]).product();
    let dt: usize = traced.iter().map(|&i| dims[i]).product();
    let mut groups: Vec<Vec<(usize, usize)>> = vec![Vec::with_capacity(dk); dt];
    for full in 0..radix.total() {
        groups[radix.sub_index(full, &traced)].push((radix.sub_index(full, &keep), full));
    }
    let mut out = CMat::zeros(dk, dk);
    for g in &groups {
        for &(k1, f1) in g {
            for &(k2, f2) in g {
                out[(k1, k2)] += m[(f1, f2)];
            }
        }
    }
    out
}

/// Reduced state on the subsystems in `keep`.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    if keep.is_empty() {
        return Err(Error::usage(
            "partial trace must keep at least one subsystem",
        ));
    }
    rho.layout().check_indices(keep)?;
    let m = partial_trace_matrix(rho.matrix(), rho.layout().dims(), keep);
    Ok(DensityMatrix::new_unchecked(m, rho.layout().restrict(keep)))
}

/// Transposes the tensor indices of the listed subsystems.
pub fn partial_transpose_matrix(m: &CMat, dims: &[usize], transposed: &[usize]) -> CMat {
    let radix = Radix::new(dims);
    let n = radix.total();
    let swap = |r: usize, c: usize| -> (usize, usize) {
        let (mut r2, mut c2) = (r, c);
        for &s in transposed {
            let (dr, dc) = (radix.digit(r, s), radix.digit(c, s));
            r2 = radix.with_digit(r2, s, dc);
            c2 = radix.with_digit(c2, s, dr);
        }
        (r2, c2)
    };
    let mut out = CMat::zeros(n, n);
    for r in 0..n {
        for c in 0..n {
            let (r2, c2) = swap(r, c);
            out[(r2, c2)] = m[(r, c)];
        }
    }
    out
}

pub fn partial_transpose(rho: &DensityMatrix, transposed: &[usize]) -> Result<CMat> {
    rho.layout().check_indices(transposed)?;
    Ok(partial_transpose_matrix(
        rho.matrix(),
        rho.layout().dims(),
        &sorted_unique(transposed),
    ))
}

/// Purification with the ancilla as the first tensor factor.
///
/// The ancilla dimension is the numerical rank of `rho` (eigenvalues above
/// `1e-12 · λ_max`), so a pure input gets a one-dimensional ancilla.
pub fn purify(rho: &DensityMatrix) -> PureState {
    let (vals, vecs) = eigh(rho.matrix());
    let n = rho.dim();
    let max = vals[n - 1];
    let support: Vec<usize> = (0..n).filter(|&k| vals[k] > RANK_THRESHOLD * max).collect();
    let r = support.len();
    let mut amp = CVec::zeros(r * n);
    for (a, &k) in support.iter().rev().enumerate() {
        let w = cr(vals[k].sqrt());
        for i in 0..n {
            amp[a * n + i] = w * vecs[(i, k)];
        }
    }
    let norm = amp.norm();
    amp /= cr(norm);
    PureState::new(amp, rho.layout().prepend(r)).expect("purification is normalized")
}

/// `C` with `C C† = m` for a PSD matrix, dropping eigenvalues below
/// `cutoff · λ_max`.
pub(crate) fn psd_factor(m: &CMat, cutoff: f64) -> CMat {
    let (vals, vecs) = eigh(m);
    let n = m.nrows();
    let max = vals[n - 1].max(0.0);
    let keep: Vec<usize> = (0..n).filter(|&k| vals[k] > cutoff * max).collect();
    let mut f = CMat::zeros(n, keep.len().max(1));
    for (j, &k) in keep.iter().enumerate() {
        let s = cr(vals[k].sqrt());
        for i in 0..n {
            f[(i, j)] = vecs[(i, k)] * s;
        }
    }
    f
}

/// `F(ρ, σ)` when `ρ = C C†` and `σ = B B†`: the squared nuclear norm of `C† B`.
pub(crate) fn fidelity_from_factors(c: &CMat, b: &CMat) -> f64 {
    let prod = c.adjoint() * b;
    let root: f64 = singular_values(&prod).iter().sum();
    root * root
}

/// Eigenvalues below this fraction of the largest are treated as zero when
/// factoring inputs to [`fidelity`].
const FIDELITY_CUTOFF: f64 = 1e-14;

/// `(Tr √(√ρ σ √ρ))²`, evaluated as the squared nuclear norm of
/// `√ρ √σ` through PSD factors of both arguments, which keeps it symmetric.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::dim(format!(
            "fidelity between dimensions {} and {}",
            rho.dim(),
            sigma.dim()
        )));
    }
    Ok(fidelity_matrices(rho.matrix(), sigma.matrix()).clamp(0.0, 1.0))
}

pub(crate) fn fidelity_matrices(rho: &CMat, sigma: &CMat) -> f64 {
    fidelity_from_factors(
        &psd_factor(rho, FIDELITY_CUTOFF),
        &psd_factor(sigma, FIDELITY_CUTOFF),
    )
}

/// `(‖ρ^{T_S}‖₁ − 1)/2` for a proper nonempty subsystem set `S`.
pub fn negativity(rho: &DensityMatrix, bipartition: &[usize]) -> Result<f64> {
    let s = sorted_unique(bipartition);
    rho.layout().check_indices(&s)?;
    if s.is_empty() || s.len() == rho.layout().len() {
        return Err(Error::usage(
            "negativity needs a proper nonempty bipartition",
        ));
    }
    let pt = partial_transpose_matrix(rho.matrix(), rho.layout().dims(), &s);
    Ok(((trace_norm_hermitian(&pt) - 1.0) / 2.0).max(0.0))
}
