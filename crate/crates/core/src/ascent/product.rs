//! Alternating search for the product state closest to a pure state.

use num_complex::Complex64;
use rand::Rng;

use super::AscentConfig;
use crate::error::{Error, Result};
use crate::tensor::linalg::eigh;
use crate::tensor::{
    partial_trace_matrix, random_unit_vector, seeded_rng, CVec, ProductState, PureState,
};

/// `⟨⊗_{j≠i} φ_j | ψ⟩` as a vector on factor `i`.
pub(crate) fn contract_except(psi: &CVec, dims: &[usize], factors: &[CVec], i: usize) -> CVec {
    let m = dims.len();
    let mut out = CVec::zeros(dims[i]);
    let mut digits = vec![0usize; m];
    for &amp in psi.iter() {
        let mut w = amp;
        for j in 0..m {
            if j != i {
                w *= factors[j][digits[j]].conj();
            }
        }
        out[digits[i]] += w;
        // increment big-endian digits
        for j in (0..m).rev() {
            digits[j] += 1;
            if digits[j] < dims[j] {
                break;
            }
            digits[j] = 0;
        }
    }
    out
}

/// `|⟨φ₁⊗…⊗φ_M|ψ⟩|`.
pub(crate) fn product_overlap(psi: &CVec, dims: &[usize], factors: &[CVec]) -> f64 {
    let v = contract_except(psi, dims, factors, 0);
    v.iter()
        .zip(factors[0].iter())
        .map(|(a, b)| b.conj() * a)
        .sum::<Complex64>()
        .norm()
}

/// One full sweep of factor updates; returns the overlap after the sweep.
/// A vanishing contraction re-randomizes the factor and reports `true`.
pub(crate) fn sweep<R: Rng>(
    psi: &CVec,
    dims: &[usize],
    factors: &mut [CVec],
    rng: &mut R,
) -> (f64, bool) {
    let mut overlap = 0.0;
    let mut reseeded = false;
    for i in 0..dims.len() {
        let v = contract_except(psi, dims, factors, i);
        let n = v.norm();
        if n < 1e-14 {
            factors[i] = random_unit_vector(dims[i], rng);
            reseeded = true;
            overlap = 0.0;
        } else {
            factors[i] = v / Complex64::new(n, 0.0);
            overlap = n;
        }
    }
    (overlap, reseeded)
}

/// Top eigenvector of each single-factor marginal.
fn spectral_start(psi: &CVec, dims: &[usize]) -> Vec<CVec> {
    let rho = psi * psi.adjoint();
    (0..dims.len())
        .map(|i| {
            let (_, vecs) = eigh(&partial_trace_matrix(&rho, dims, &[i]));
            vecs.column(dims[i] - 1).into_owned()
        })
        .collect()
}

/// Runs alternating sweeps from `factors` until the overlap gain drops
/// below the tolerance.
pub(crate) fn ascend<R: Rng>(
    psi: &CVec,
    dims: &[usize],
    factors: &mut [CVec],
    tolerance: f64,
    max_sweeps: usize,
    rng: &mut R,
) -> f64 {
    let mut last = product_overlap(psi, dims, factors);
    for _ in 0..max_sweeps {
        let (ov, reseeded) = sweep(psi, dims, factors, rng);
        if !reseeded && ov - last < tolerance {
            return ov.max(last);
        }
        last = ov;
    }
    last
}

/// Product state maximizing `|⟨φ|ψ⟩|` found by alternating updates from
/// several starting points (the marginal eigenvectors first, then random
/// product states). Returns the state and the overlap; `1 - overlap²` is an
/// upper bound on the geometric entanglement.
pub fn closest_product_state(
    psi: &PureState,
    config: &AscentConfig,
) -> Result<(ProductState, f64)> {
    let dims = psi.layout().dims().to_vec();
    if dims.len() < 2 {
        return Err(Error::usage(
            "closest product state needs at least two subsystems",
        ));
    }
    config.validate()?;
    let amp = psi.amplitudes();
    let mut best: Option<(Vec<CVec>, f64)> = None;
    for r in 0..config.restarts.max(1) {
        let mut rng = seeded_rng(config.seed.wrapping_add(r as u64));
        let mut factors = if r == 0 {
            spectral_start(amp, &dims)
        } else {
            dims.iter()
                .map(|&d| random_unit_vector(d, &mut rng))
                .collect()
        };
        let ov = ascend(
            amp,
            &dims,
            &mut factors,
            config.tolerance,
            config.max_iterations,
            &mut rng,
        );
        // ties keep the earliest restart
        if best.as_ref().is_none_or(|b| ov > b.1) {
            best = Some((factors, ov));
        }
    }
    let (factors, ov) = best.expect("at least one restart");
    Ok((ProductState::new_unchecked(factors), ov.min(1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{random_pure_state, CMat, SubsystemLayout};
    use num_complex::Complex64;

    fn state(dims: &[usize], amps: &[(usize, f64)]) -> PureState {
        let mut v = CVec::zeros(dims.iter().product());
        for &(i, a) in amps {
            v[i] = Complex64::new(a, 0.0);
        }
        PureState::normalized(v, SubsystemLayout::new(dims.to_vec()).unwrap()).unwrap()
    }

    #[test]
    fn product_input_is_a_fixed_point() {
        let layout = SubsystemLayout::new(vec![2, 3, 2]).unwrap();
        let mut rng = seeded_rng(4);
        let factors: Vec<CVec> = layout
            .dims()
            .iter()
            .map(|&d| random_unit_vector(d, &mut rng))
            .collect();
        let psi = ProductState::new(factors).unwrap().to_pure();
        let (phi, ov) = closest_product_state(&psi, &AscentConfig::pure()).unwrap();
        assert!((ov - 1.0).abs() < 1e-12);
        assert!((psi.inner(&phi.to_pure()).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ghz_and_w_overlaps() {
        let ghz = state(&[2, 2, 2], &[(0, 1.0), (7, 1.0)]);
        let (_, ov) = closest_product_state(&ghz, &AscentConfig::pure()).unwrap();
        assert!((ov * ov - 0.5).abs() < 1e-9, "{ov}");
        let w = state(&[2, 2, 2], &[(1, 1.0), (2, 1.0), (4, 1.0)]);
        let (_, ov) = closest_product_state(&w, &AscentConfig::pure()).unwrap();
        assert!((ov * ov - 4.0 / 9.0).abs() < 1e-8, "{ov}");
    }

    #[test]
    fn bipartite_overlap_is_top_schmidt_coefficient() {
        let psi = random_pure_state(&SubsystemLayout::new(vec![3, 4]).unwrap(), 9);
        let m = CMat::from_fn(3, 4, |i, j| psi.amplitudes()[i * 4 + j]);
        let top = m.singular_values().max();
        let (_, ov) = closest_product_state(&psi, &AscentConfig::pure()).unwrap();
        assert!((ov - top).abs() < 1e-9);
    }

    #[test]
    fn contraction_matches_inner_product() {
        let layout = SubsystemLayout::new(vec![2, 3, 2]).unwrap();
        let psi = random_pure_state(&layout, 1);
        let mut rng = seeded_rng(2);
        let factors: Vec<CVec> = layout
            .dims()
            .iter()
            .map(|&d| random_unit_vector(d, &mut rng))
            .collect();
        let full = ProductState::new(factors.clone()).unwrap().to_vector();
        let direct = full.dotc(psi.amplitudes()).norm();
        for i in 0..3 {
            let v = contract_except(psi.amplitudes(), layout.dims(), &factors, i);
            assert!((factors[i].dotc(&v).norm() - direct).abs() < 1e-12);
        }
        assert!(
            (product_overlap(psi.amplitudes(), layout.dims(), &factors) - direct).abs() < 1e-12
        );
    }

    #[test]
    fn restarts_are_deterministic() {
        let psi = random_pure_state(&SubsystemLayout::qubits(4), 3);
        let cfg = AscentConfig::pure().with_seed(17);
        let (a, x) = closest_product_state(&psi, &cfg).unwrap();
        let (b, y) = closest_product_state(&psi, &cfg).unwrap();
        assert_eq!(x, y);
        assert_eq!(a.to_vector(), b.to_vector());
    }
}
