//! Bounds on the geometric entanglement of multipartite quantum states.
//!
//! Lower bounds come from semidefinite relaxations of the separable set (PPT,
//! k-symmetric extensions, purity/entanglement complementarity) solved by the
//! built-in interior-point engine in [`sdp`]. Upper bounds come from explicit
//! separable decompositions refined by the ascent algorithms in [`ascent`].
//! Together they bracket the true value.
//!
//! ```no_run
//! use entbound::{bounds, states, ascent::AscentConfig};
//!
//! let rho = states::horodecki_3x3(0.5).unwrap();
//! let est = bounds::estimate(&rho, bounds::LowerBoundMethod::PurityFull, &AscentConfig::mixed())
//!     .unwrap();
//! println!("{} <= E_G <= {}", est.lower.value, est.upper.value);
//! ```

// Checks are written as `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ascent;
pub mod bounds;
pub mod error;
pub mod harness;
pub mod sdp;
pub mod states;
pub mod tensor;

pub use error::{Error, Result};
pub use tensor::{CMat, CVec, DensityMatrix, ProductState, PureState, SubsystemLayout};
