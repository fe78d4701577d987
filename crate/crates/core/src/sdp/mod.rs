//! Hermitian semidefinite programming: modeling layer, real compilation and
//! an interior-point solver.

mod compile;
mod fidelity;
mod model;
mod solver;

pub use compile::{compile, embed_matrix, unembed_matrix, RealSdp};
#[allow(unused_imports)]
pub(crate) use fidelity::support;
pub use fidelity::{root_fidelity_block, FidelityBlock, SigmaRef, SUPPORT_CUTOFF};
pub use model::{
    Block, BlockKind, EntryOp, Equality, LinearTerm, PsdConstraint, SdpProblem, Sense, VarId,
};
pub use solver::{
    solve, solve_compiled, solve_with, SdpSolution, SolveStatus, SolverOptions,
    DEFAULT_MAX_ITERATIONS, DEFAULT_TOLERANCE,
};

/// Real symmetric form of a problem using the complex embedding for every block.
pub fn embed_complex(problem: &SdpProblem) -> crate::Result<RealSdp> {
    compile(problem, true)
}
