//! Dense complex linear algebra over multipartite Hilbert spaces.

mod io;
pub(crate) mod layout;
pub mod linalg;
pub(crate) mod ops;
mod random;
mod state;

pub use io::{read_matrix_file, InputState, MatrixFile};
pub use layout::SubsystemLayout;
pub use ops::{
    fidelity, negativity, partial_trace, partial_trace_matrix, partial_transpose,
    partial_transpose_matrix, purify, tensor_product,
};
pub use random::{random_density_matrix, random_pure_state, random_unit_vector, seeded_rng};
pub use state::{DensityMatrix, ProductState, PureState};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

/// Tolerance on hermiticity, trace and norm invariants.
pub const INVARIANT_TOL: f64 = 1e-12;
/// Smallest eigenvalue a density matrix may have before it is rejected.
pub const PSD_TOL: f64 = -1e-10;

#[inline]
pub(crate) fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub(crate) fn cr(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}
