//! Seeded random states from the Ginibre ensemble.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{CMat, CVec, DensityMatrix, PureState, SubsystemLayout};
use crate::error::{Error, Result};

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian<R: Rng>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-random unit vector of length `dim`.
pub fn random_unit_vector<R: Rng>(dim: usize, rng: &mut R) -> CVec {
    loop {
        let v = CVec::from_fn(dim, |_, _| gaussian(rng));
        let n = v.norm();
        if n > 1e-300 {
            return v / Complex64::new(n, 0.0);
        }
    }
}

pub fn random_pure_state(layout: &SubsystemLayout, seed: u64) -> PureState {
    let mut rng = seeded_rng(seed);
    PureState::new(random_unit_vector(layout.total(), &mut rng), layout.clone())
        .expect("unit vector")
}

/// `G G† / Tr(G G†)` with `G` a `dim × rank` complex Ginibre matrix.
pub fn random_density_matrix(
    layout: &SubsystemLayout,
    rank: usize,
    seed: u64,
) -> Result<DensityMatrix> {
    let dim = layout.total();
    if rank == 0 || rank > dim {
        return Err(Error::usage(format!(
            "rank must lie in 1..={dim}, got {rank}"
        )));
    }
    let mut rng = seeded_rng(seed);
    let g = CMat::from_fn(dim, rank, |_, _| gaussian(&mut rng));
    let m = &g * g.adjoint();
    DensityMatrix::from_numeric(m, layout.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::linalg::{eigvalsh, max_eigenvalue};

    #[test]
    fn rank_one_is_pure() {
        let r = random_density_matrix(&SubsystemLayout::new(vec![3, 3]).unwrap(), 1, 5).unwrap();
        assert!((max_eigenvalue(r.matrix()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn seeded_draws_repeat_bitwise() {
        let l = SubsystemLayout::new(vec![3, 3]).unwrap();
        let a = random_density_matrix(&l, 4, 11).unwrap();
        let b = random_density_matrix(&l, 4, 11).unwrap();
        assert_eq!(a.matrix(), b.matrix());
        assert_ne!(
            a.matrix(),
            random_density_matrix(&l, 4, 12).unwrap().matrix()
        );
    }

    #[test]
    fn full_rank_has_positive_spectrum() {
        let l = SubsystemLayout::new(vec![3, 3]).unwrap();
        let r = random_density_matrix(&l, 9, 3).unwrap();
        assert!(eigvalsh(r.matrix())[0] > 0.0);
        assert!(random_density_matrix(&l, 0, 3).is_err());
        assert!(random_density_matrix(&l, 10, 3).is_err());
    }
}
