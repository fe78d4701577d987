//! The root-fidelity block: for PSD `ρ` and a PSD expression `σ`,
//! `max Re Tr X` subject to `[[ρ, X], [X†, σ]] ⪰ 0` equals `√F(ρ, σ)`.
//!
//! `ρ` is compressed to its support first. With `ρ = V Λ V†` (rank `r`) every
//! feasible `X` has the form `V Y`, and the block condition becomes
//! `[[Λ, Y], [Y†, σ]] ⪰ 0` with an `r x D` free variable `Y`. This keeps the
//! constraint strictly feasible for rank-deficient `ρ`.

use num_complex::Complex64;

use super::model::{LinearTerm, SdpProblem, VarId};
use crate::error::{Error, Result};
use crate::tensor::linalg::{eigh, hermiticity_defect};
use crate::tensor::{CMat, INVARIANT_TOL, PSD_TOL};

/// Relative eigenvalue cutoff defining the support of `ρ`.
pub const SUPPORT_CUTOFF: f64 = 1e-12;

/// The second argument of the fidelity.
pub enum SigmaRef {
    /// A linear expression in the problem's variables.
    Terms(Vec<LinearTerm>),
    /// A fixed matrix.
    Fixed(CMat),
}

#[derive(Clone, Debug)]
pub struct FidelityBlock {
    /// The `r x D` variable `Y`.
    pub y: VarId,
    pub rank: usize,
}

/// Support of a Hermitian PSD matrix: eigenvalues above the cutoff and the
/// matching eigenvectors, largest first. Real input gives real vectors.
pub(crate) fn support(rho: &CMat) -> (Vec<f64>, CMat) {
    let n = rho.nrows();
    let (vals, vecs) = eigh(rho);
    let top = vals.iter().cloned().fold(0.0, f64::max);
    let mut order: Vec<usize> = (0..n).filter(|&k| vals[k] > SUPPORT_CUTOFF * top).collect();
    order.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]));
    let mut v = CMat::zeros(n, order.len());
    for (col, &k) in order.iter().enumerate() {
        v.set_column(col, &vecs.column(k));
    }
    (order.iter().map(|&k| vals[k]).collect(), v)
}

/// Adds the block constraint and the objective term `Re Tr X` to `problem`.
pub fn root_fidelity_block(
    problem: &mut SdpProblem,
    rho: &CMat,
    sigma: SigmaRef,
) -> Result<FidelityBlock> {
    let d = rho.nrows();
    if rho.ncols() != d {
        return Err(Error::dim("ρ must be square"));
    }
    if hermiticity_defect(rho) > INVARIANT_TOL {
        return Err(Error::invalid("ρ is not Hermitian"));
    }
    let (lambda, v) = support(rho);
    if lambda.is_empty() {
        return Err(Error::invalid("ρ is zero"));
    }
    if crate::tensor::linalg::min_eigenvalue(rho) < PSD_TOL * lambda[0].max(1.0) {
        return Err(Error::invalid("ρ is not positive semidefinite"));
    }
    let r = lambda.len();
    let n = r + d;
    let y = problem.general("fidelity_y", r, d)?;
    let mut constant = CMat::zeros(n, n);
    for (k, &l) in lambda.iter().enumerate() {
        constant[(k, k)] = Complex64::new(l, 0.0);
    }
    let mut terms = vec![
        LinearTerm::new(y).place(0, r, n, n),
        LinearTerm::new(y).adjoint().place(r, 0, n, n),
    ];
    match sigma {
        SigmaRef::Terms(ts) => {
            for t in ts {
                terms.push(t.place(r, r, n, n));
            }
        }
        SigmaRef::Fixed(s) => {
            if s.shape() != (d, d) {
                return Err(Error::dim(format!(
                    "σ has shape {:?}, ρ is {d}x{d}",
                    s.shape()
                )));
            }
            constant.view_mut((r, r), (d, d)).copy_from(&s);
        }
    }
    problem
        .add_psd(n, Some(constant), terms)
        .map_err(|e| match e {
            Error::Dimension(msg) => {
                Error::dim(format!("σ expression does not match ρ ({d}x{d}): {msg}"))
            }
            other => other,
        })?;
    problem.add_objective(y, v)?;
    Ok(FidelityBlock { y, rank: r })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sdp::model::Sense;
    use crate::sdp::solver::{solve, SolveStatus};
    use crate::tensor::linalg::{identity, outer};
    use crate::tensor::{c, cr, CVec};

    fn fixed_fidelity(rho: &CMat, sigma: &CMat) -> f64 {
        let mut p = SdpProblem::new(Sense::Maximize);
        root_fidelity_block(&mut p, rho, SigmaRef::Fixed(sigma.clone())).unwrap();
        let sol = solve(&p, 1e-10, 100).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        sol.objective_value
    }

    #[test]
    fn pure_self_fidelity_is_one() {
        let v = CVec::from_vec(vec![c(0.6, 0.0), c(0.0, 0.8)]);
        let rho = outer(&v);
        assert!((fixed_fidelity(&rho, &rho) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn ket_zero_against_maximally_mixed() {
        let mut rho = CMat::zeros(2, 2);
        rho[(0, 0)] = cr(1.0);
        let got = fixed_fidelity(&rho, &(identity(2) * cr(0.5)));
        assert!((got - 0.5f64.sqrt()).abs() < 1e-8);
    }

    #[test]
    fn commuting_diagonals_give_bhattacharyya_sum() {
        let p = [0.5, 0.3, 0.2];
        let q = [0.1, 0.6, 0.3];
        let rho = CMat::from_diagonal(&nalgebra::DVector::from_iterator(
            3,
            p.iter().map(|&x| cr(x)),
        ));
        let sigma = CMat::from_diagonal(&nalgebra::DVector::from_iterator(
            3,
            q.iter().map(|&x| cr(x)),
        ));
        let expect: f64 = p.iter().zip(&q).map(|(a, b)| (a * b).sqrt()).sum();
        assert!((fixed_fidelity(&rho, &sigma) - expect).abs() < 1e-8);
    }

    #[test]
    fn mismatched_sigma_is_rejected() {
        let mut p = SdpProblem::new(Sense::Maximize);
        let res = root_fidelity_block(&mut p, &identity(2), SigmaRef::Fixed(identity(3)));
        assert!(matches!(res, Err(Error::Dimension(_))));
        let s = p.psd_hermitian("s", 3).unwrap();
        let res = root_fidelity_block(
            &mut p,
            &(identity(2) * cr(0.5)),
            SigmaRef::Terms(vec![LinearTerm::new(s)]),
        );
        assert!(matches!(res, Err(Error::Dimension(_))));
    }
}
