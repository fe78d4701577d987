//! Hermitian spectral helpers shared by the rest of the crate.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{CMat, CVec};

// nalgebra 0.33's symmetric eigensolver returns eigenvectors that do not
// reconstruct some block-structured spin Hamiltonians, so spectral work goes
// through faer.

fn to_faer<T: Copy>(m: &DMatrix<T>) -> faer::Mat<T> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn from_faer<T: nalgebra::Scalar + Copy>(m: faer::MatRef<'_, T>) -> DMatrix<T> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Eigendecomposition of a real symmetric matrix, eigenvalues ascending.
pub fn real_eigh(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let sym = (m + m.transpose()) * 0.5;
    let evd = to_faer(&sym)
        .self_adjoint_eigen(faer::Side::Lower)
        .expect("symmetric eigensolver converged");
    let n = m.nrows();
    let vals = DVector::from_iterator(n, evd.S().column_vector().iter().copied());
    (vals, from_faer(evd.U()))
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
/// Real input is diagonalized in real arithmetic, so its eigenvectors are real.
pub fn eigh(m: &CMat) -> (DVector<f64>, CMat) {
    if is_real(m, 0.0) {
        let (vals, vecs) = real_eigh(&m.map(|z| z.re));
        return (vals, real_to_complex(&vecs));
    }
    let evd = to_faer(&hermitian_part(m))
        .self_adjoint_eigen(faer::Side::Lower)
        .expect("Hermitian eigensolver converged");
    let vals = DVector::from_iterator(m.nrows(), evd.S().column_vector().iter().map(|z| z.re));
    (vals, from_faer(evd.U()))
}

pub fn eigvalsh(m: &CMat) -> DVector<f64> {
    let v = if is_real(m, 0.0) {
        to_faer(&m.map(|z| z.re)).self_adjoint_eigenvalues(faer::Side::Lower)
    } else {
        to_faer(&hermitian_part(m))
            .self_adjoint_eigenvalues(faer::Side::Lower)
            .map(|v| v.into_iter().collect())
    }
    .expect("Hermitian eigensolver converged");
    DVector::from_vec(v)
}

pub fn real_eigvalsh(m: &DMatrix<f64>) -> DVector<f64> {
    let sym = (m + m.transpose()) * 0.5;
    DVector::from_vec(
        to_faer(&sym)
            .self_adjoint_eigenvalues(faer::Side::Lower)
            .expect("symmetric eigensolver converged"),
    )
}

/// Thin singular value decomposition `m = U diag(s) V†`, singular values
/// in descending order.
pub fn svd(m: &CMat) -> (CMat, DVector<f64>, CMat) {
    let s = to_faer(m).thin_svd().expect("SVD converged");
    let k = m.nrows().min(m.ncols());
    let vals = DVector::from_iterator(k, s.S().column_vector().iter().take(k).map(|z| z.re));
    (from_faer(s.U()), vals, from_faer(s.V()))
}

/// Real counterpart of [`svd`].
pub fn real_svd(m: &DMatrix<f64>) -> (DMatrix<f64>, DVector<f64>, DMatrix<f64>) {
    let s = to_faer(m).thin_svd().expect("SVD converged");
    let k = m.nrows().min(m.ncols());
    let vals = DVector::from_iterator(k, s.S().column_vector().iter().take(k).copied());
    (from_faer(s.U()), vals, from_faer(s.V()))
}

pub fn singular_values(m: &CMat) -> DVector<f64> {
    DVector::from_vec(to_faer(m).singular_values().expect("SVD converged"))
}

pub fn min_eigenvalue(m: &CMat) -> f64 {
    eigvalsh(m)[0]
}

pub fn max_eigenvalue(m: &CMat) -> f64 {
    let v = eigvalsh(m);
    v[v.len() - 1]
}

/// `(m + m†)/2`.
pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Largest elementwise modulus of `m - m†`.
pub fn hermiticity_defect(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Applies `f` to the spectrum of a Hermitian matrix.
pub fn hermitian_fn(m: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let (vals, vecs) = eigh(m);
    let n = m.nrows();
    let mut scaled = vecs.clone();
    for k in 0..n {
        let fk = Complex64::new(f(vals[k]), 0.0);
        for i in 0..n {
            scaled[(i, k)] *= fk;
        }
    }
    hermitian_part(&(scaled * vecs.adjoint()))
}

/// Square root of a PSD matrix; negative eigenvalues are clamped to zero.
pub fn sqrt_psd(m: &CMat) -> CMat {
    hermitian_fn(m, |x| x.max(0.0).sqrt())
}

/// Trace norm of a Hermitian matrix.
pub fn trace_norm_hermitian(m: &CMat) -> f64 {
    eigvalsh(m).iter().map(|x| x.abs()).sum()
}

pub fn trace(m: &CMat) -> Complex64 {
    m.diagonal().iter().sum()
}

/// Real part of `Tr(a b)`.
pub fn trace_product_re(a: &CMat, b: &CMat) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for k in 0..a.ncols() {
            s += (a[(i, k)] * b[(k, i)]).re;
        }
    }
    s
}

pub fn outer(v: &CVec) -> CMat {
    v * v.adjoint()
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn is_real(m: &CMat, tol: f64) -> bool {
    m.iter().all(|z| z.im.abs() <= tol)
}

pub fn real_to_complex(m: &DMatrix<f64>) -> CMat {
    m.map(|x| Complex64::new(x, 0.0))
}

/// Kronecker product of two complex matrices.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// Pauli matrices `[I, X, Y, Z]`.
pub fn pauli(k: usize) -> CMat {
    use super::{c, cr};
    let o = cr(0.0);
    match k {
        0 => CMat::from_row_slice(2, 2, &[cr(1.0), o, o, cr(1.0)]),
        1 => CMat::from_row_slice(2, 2, &[o, cr(1.0), cr(1.0), o]),
        2 => CMat::from_row_slice(2, 2, &[o, c(0.0, -1.0), c(0.0, 1.0), o]),
        3 => CMat::from_row_slice(2, 2, &[cr(1.0), o, o, cr(-1.0)]),
        _ => panic!("pauli index {k} out of range"),
    }
}
