//! A small dense conic solver and the FIR constraint encoders built on top of it.
//!
//! Problems are written in the standard conic form
//!
//! ```text
//!   minimize    c^T x
//!   subject to  A x + s = b,   s in K,
//! ```
//!
//! where `K` is a Cartesian product of zero, nonnegative, second-order and
//! positive-semidefinite cones (PSD blocks travel in scaled `svec` coordinates so
//! the cone is self-dual under the Euclidean inner product). The solver is an
//! ADMM operator-splitting loop with a cached normal-equation factorization; it
//! reports primal/dual residuals, tracks the dual objective for weak-duality
//! checks, and produces Farkas-style certificates for infeasible programs.
//!
//! On top of the solver, `encode` provides the finite-impulse-response
//! H-infinity constraint as a linear matrix inequality in Gram-matrix form
//! (`||F||_inf <= alpha` for an FIR `F`), plus the vectorization helpers that
//! turn truncated H2 objectives into second-order cone rows.

pub mod admm;
pub mod cones;
pub mod encode;
pub mod program;

pub use admm::{solve, solve_with_options, SolveOptions, SolveStatus, Solution};
pub use cones::{project_cone, project_psd, project_soc, smat, svec, svec_dim, Cone};
pub use encode::{
    append_hinf_lmi, build_qhat, hinf_feasible, hinf_lmi_blocks, hinf_threshold,
    series_vec_operator, stacked_vec, vec_stack, HinfLmiInfo, QVarBlock, SchurScaling,
};
pub use program::{ConicProgram, ProgramBuilder, ProgramJson, Triplet};

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, ConicError>;

/// Errors raised while building or solving conic programs.
#[derive(Debug, thiserror::Error)]
pub enum ConicError {
    /// Shape mismatch between program pieces.
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    Dimension {
        context: &'static str,
        expected: String,
        got: String,
    },
    /// Data contained NaN or infinity.
    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),
    /// Argument outside the documented domain.
    #[error("invalid argument: {0}")]
    InvalidArg(String),
    /// JSON import/export failure.
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
