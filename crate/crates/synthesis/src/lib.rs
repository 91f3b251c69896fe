//! Robust observer synthesis over coprime-factor uncertainty balls.
//!
//! The exact worst-case H2 evaluation problem is a min-max over the Youla
//! parameter Q and the factor perturbation, and it is not convex. What is
//! tractable is its upper bound
//!
//! ```text
//!   min over alpha in [0, 1/gamma):
//!     1/(1 - gamma alpha) * [ (1 - gamma alpha) ||[I - Y_Q, X_Q]||_H2
//!                             + lambda1 ||Q||_H2 (lambda2 + gamma) ]
//!   subject to  ||[Y~_Q; X~_Q]||_inf <= alpha,
//! ```
//!
//! whose inner minimization over FIR taps of Q is a conic program (two
//! second-order cone epigraphs plus the Gram-matrix H-infinity LMI), while the
//! outer scalar search over alpha is handled by a grid. `outer_search` runs
//! the full pipeline; `upper_bound_value` evaluates the same bound for any
//! given Q; `constants` computes the norms lambda1 = ||I - M||_inf and the two
//! lambda2 variants (right-factor stack [N; M] and left-factor stack [N~ M~])
//! that weight the ||Q||_H2 term.

pub mod bound;
pub mod constants;
pub mod inner;
pub mod outer;

pub use bound::upper_bound_value;
pub use constants::{constants, SynthesisConstants};
pub use inner::{
    assemble_inner, assemble_inner_with, solve_inner, InnerProgram, InnerSolution, InnerStatus,
};
pub use outer::{
    default_alpha_grid, outer_search, AlphaTrace, SynthesisConfig, SynthesisResult,
    SynthesisResultJson, DEFAULT_ALPHA_GRID_LEN, DEFAULT_SYNTHESIS_FIR_LEN,
};

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, SynthesisError>;

/// Errors raised while assembling or solving the synthesis problem.
#[derive(Debug, thiserror::Error)]
pub enum SynthesisError {
    #[error(transparent)]
    Lti(#[from] lti_core::LtiError),
    #[error(transparent)]
    Coprime(#[from] coprime::CoprimeError),
    #[error(transparent)]
    Conic(#[from] conic::ConicError),
    #[error("{0}")]
    InvalidArg(String),
    #[error("constraint norm {norm} exceeds alpha {alpha}; the bound formula does not apply")]
    ConstraintViolated { norm: f64, alpha: f64 },
    #[error("no alpha on the grid admitted a solution ({infeasible} infeasible, {stalled} stalled)")]
    NoFeasibleAlpha { infeasible: usize, stalled: usize },
}
