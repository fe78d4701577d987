//! Reference computations for the integration tests, written without the
//! library's linear algebra or optimizers. Complex Hermitian matrices are
//! handled through the real symmetric embedding `[[Re, -Im], [Im, Re]]`,
//! which doubles every eigenvalue's multiplicity and commutes with matrix
//! functions, and are diagonalized by cyclic Jacobi rotations.

#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type C = Complex64;
pub type CM = DMatrix<Complex64>;

pub fn embed(m: &CM) -> DMatrix<f64> {
    let n = m.nrows();
    DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        let z = m[(i % n, j % n)];
        match (i < n, j < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

pub fn unembed(a: &DMatrix<f64>) -> CM {
    let n = a.nrows() / 2;
    CM::from_fn(n, n, |i, j| C::new(a[(i, j)], a[(i + n, j)]))
}

/// Eigenvalues and orthonormal eigenvectors (columns) of a real symmetric
/// matrix.
pub fn jacobi(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let mut a = (a + a.transpose()) * 0.5;
    let mut v = DMatrix::<f64>::identity(n, n);
    let scale = a.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1e-300);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[(p, q)] * a[(p, q)];
            }
        }
        if off.sqrt() < 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| a[(i, i)]).collect(), v)
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn eigvalsh(m: &CM) -> Vec<f64> {
    let (mut ev, _) = jacobi(&embed(m));
    ev.sort_by(|a, b| a.total_cmp(b));
    ev.into_iter().step_by(2).collect()
}

/// `f` applied to the spectrum of a Hermitian matrix.
pub fn matrix_function(m: &CM, f: impl Fn(f64) -> f64) -> CM {
    let (ev, v) = jacobi(&embed(m));
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        ev.len(),
        ev.iter().map(|&x| f(x)),
    ));
    unembed(&(&v * d * v.transpose()))
}

fn pauli_y() -> CM {
    CM::from_row_slice(
        2,
        2,
        &[
            C::new(0.0, 0.0),
            C::new(0.0, -1.0),
            C::new(0.0, 1.0),
            C::new(0.0, 0.0),
        ],
    )
}

/// Wootters concurrence from `√(√ρ ρ̃ √ρ)`.
pub fn concurrence(rho: &CM) -> f64 {
    let yy = pauli_y().kronecker(&pauli_y());
    let tilde = &yy * rho.map(|z| z.conj()) * &yy;
    let s = matrix_function(rho, |x| x.max(0.0).sqrt());
    let mut lam: Vec<f64> = eigvalsh(&(&s * tilde * &s))
        .into_iter()
        .map(|x| x.max(0.0).sqrt())
        .collect();
    lam.sort_by(|a, b| b.total_cmp(a));
    (lam[0] - lam[1] - lam[2] - lam[3]).max(0.0)
}

/// Geometric entanglement of a two-qubit state.
pub fn two_qubit_geometric(rho: &CM) -> f64 {
    let c = concurrence(rho).min(1.0);
    0.5 * (1.0 - (1.0 - c * c).sqrt())
}

/// Partial transpose on subsystem `site`.
pub fn partial_transpose(m: &CM, dims: &[usize], site: usize) -> CM {
    let n = m.nrows();
    let digits = |mut i: usize| {
        let mut d = vec![0; dims.len()];
        for k in (0..dims.len()).rev() {
            d[k] = i % dims[k];
            i /= dims[k];
        }
        d
    };
    let index = |d: &[usize]| d.iter().zip(dims).fold(0, |acc, (&x, &dk)| acc * dk + x);
    let mut out = CM::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let (mut di, mut dj) = (digits(i), digits(j));
            std::mem::swap(&mut di[site], &mut dj[site]);
            out[(index(&di), index(&dj))] = m[(i, j)];
        }
    }
    out
}

/// Most negative eigenvalue of the partial transpose over all single-site cuts.
pub fn min_single_cut_pt_eigenvalue(m: &CM, dims: &[usize]) -> f64 {
    (0..dims.len())
        .map(|s| eigvalsh(&partial_transpose(m, dims, s))[0])
        .fold(f64::INFINITY, f64::min)
}

/// Reduced state on `keep` (ascending sites) of a multi-qubit density matrix.
pub fn reduce_qubits(m: &CM, n: usize, keep: &[usize]) -> CM {
    let k = keep.len();
    let mut out = CM::zeros(1 << k, 1 << k);
    let bit = |i: usize, s: usize| (i >> (n - 1 - s)) & 1;
    for i in 0..1usize << n {
        for j in 0..1usize << n {
            let traced_equal = (0..n)
                .filter(|s| !keep.contains(s))
                .all(|s| bit(i, s) == bit(j, s));
            if traced_equal {
                let r = keep.iter().fold(0, |acc, &s| 2 * acc + bit(i, s));
                let c = keep.iter().fold(0, |acc, &s| 2 * acc + bit(j, s));
                out[(r, c)] += m[(i, j)];
            }
        }
    }
    out
}

/// Squared Uhlmann fidelity `(Tr √(√ρ σ √ρ))²`.
pub fn fidelity(rho: &CM, sigma: &CM) -> f64 {
    let s = matrix_function(rho, |x| x.max(0.0).sqrt());
    let inner = &s * sigma * &s;
    let t: f64 = eigvalsh(&inner)
        .into_iter()
        .map(|x| x.max(0.0).sqrt())
        .sum();
    t * t
}

/// `Σ wᵢ |φᵢ⟩⟨φᵢ|` for product vectors given by their factors.
pub fn product_mixture(weights: &[f64], factors: &[Vec<nalgebra::DVector<C>>]) -> CM {
    let mut out: Option<CM> = None;
    for (w, fs) in weights.iter().zip(factors) {
        let v = fs
            .iter()
            .skip(1)
            .fold(fs[0].clone(), |acc, f| acc.kronecker(f));
        let term = &v * v.adjoint() * C::new(*w, 0.0);
        out = Some(match out {
            Some(m) => m + term,
            None => term,
        });
    }
    out.expect("empty mixture")
}

/// `|⟨a₁⊗…⊗aₙ|ψ⟩|²` for single-qubit Bloch angles `(θₖ, φₖ)` in `x`.
fn product_overlap(psi: &[C], n: usize, x: &[f64]) -> f64 {
    let mut amp = C::new(0.0, 0.0);
    for (idx, &z) in psi.iter().enumerate() {
        let mut coef = C::new(1.0, 0.0);
        for s in 0..n {
            let (th, ph) = (x[2 * s], x[2 * s + 1]);
            coef *= if (idx >> (n - 1 - s)) & 1 == 0 {
                C::new((th / 2.0).cos(), 0.0)
            } else {
                C::from_polar((th / 2.0).sin(), ph)
            };
        }
        amp += coef.conj() * z;
    }
    amp.norm_sqr()
}

/// Largest squared overlap of an `n`-qubit pure state with a product state,
/// by compass search from `starts` random points.
pub fn max_product_overlap(psi: &[C], n: usize, starts: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: f64 = 0.0;
    for _ in 0..starts {
        let mut x: Vec<f64> = (0..2 * n)
            .map(|k| {
                if k % 2 == 0 {
                    rng.random_range(0.0..std::f64::consts::PI)
                } else {
                    rng.random_range(0.0..std::f64::consts::TAU)
                }
            })
            .collect();
        let mut fx = product_overlap(psi, n, &x);
        let mut step = 0.5;
        while step > 1e-11 {
            let mut moved = false;
            for k in 0..2 * n {
                for sign in [1.0, -1.0] {
                    let mut y = x.clone();
                    y[k] += sign * step;
                    let fy = product_overlap(psi, n, &y);
                    if fy > fx {
                        x = y;
                        fx = fy;
                        moved = true;
                    }
                }
            }
            if !moved {
                step *= 0.5;
            }
        }
        best = best.max(fx);
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_reconstructs() {
        let m = CM::from_fn(4, 4, |i, j| {
            C::new(
                (i + 2 * j) as f64 * 0.1 + if i == j { 1.0 } else { 0.0 },
                0.0,
            )
        });
        let h = &m + m.adjoint();
        let (ev, v) = jacobi(&embed(&h));
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(ev));
        assert!((unembed(&(&v * d * v.transpose())) - h).norm() < 1e-12);
    }
}
