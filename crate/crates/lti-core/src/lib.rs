//! Dense linear algebra and discrete-time LTI system arithmetic.
//!
//! Everything downstream (coprime factorizations, robust synthesis, closed-loop
//! identification) is built on two representations of a linear system:
//!
//! * [`StateSpace`] — a dense (A, B, C, D) realization of
//!   `G(z) = C (zI - A)^{-1} B + D`,
//! * [`FirSystem`] — a finite impulse response, i.e. the Markov parameters
//!   `G_0, G_1, ..., G_N` of `G(z) = sum_j G_j z^{-j}` after truncation.
//!
//! State-space realizations are kept exact as long as possible; optimization-facing
//! objects are truncated to FIR once, then composed tap-wise. The crate also provides
//! the H2 and H-infinity norms for both representations, a discrete Lyapunov solver
//! (fixed-point doubling), and a discrete algebraic Riccati solver with the matched
//! LQR feedback gain.

pub mod fir;
pub mod lyap;
pub mod noise;
pub mod norms;
pub mod presets;
pub mod ss;

pub use fir::{FirJson, FirSystem};
pub use lyap::{dare, dlyap};
pub use noise::NoiseConfig;
pub use norms::{h2_norm_fir, h2_norm_ss, hinf_norm_fir, hinf_norm_ss, HINF_DEFAULT_TOL};
pub use ss::{matrix_to_rows, rows_to_matrix, StateSpace};

use nalgebra::DMatrix;

/// Errors shared by all system-level operations in this crate.
#[derive(Debug, thiserror::Error)]
pub enum LtiError {
    #[error("matrix must be square, got {rows}x{cols}")]
    NonSquare { rows: usize, cols: usize },
    #[error("dimension mismatch in {context}: {left} vs {right}")]
    DimensionMismatch {
        context: &'static str,
        left: String,
        right: String,
    },
    #[error("system is not stable (spectral radius {radius:.6})")]
    Unstable { radius: f64 },
    #[error("iteration did not converge: {0}")]
    NotConverged(&'static str),
    #[error("matrix is singular or indefinite in {0}")]
    Singular(&'static str),
    #[error("invalid argument: {0}")]
    InvalidArg(String),
}

pub type Result<T> = std::result::Result<T, LtiError>;

/// Largest eigenvalue magnitude of a square matrix.
pub fn spectral_radius(a: &DMatrix<f64>) -> Result<f64> {
    if a.nrows() != a.ncols() {
        return Err(LtiError::NonSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    if a.nrows() == 0 {
        return Ok(0.0);
    }
    let eigs = a.clone().complex_eigenvalues();
    Ok(eigs.iter().map(|l| l.norm()).fold(0.0, f64::max))
}

/// `radius < 1` test used everywhere a gain or closed loop must be stable.
pub fn is_stable(a: &DMatrix<f64>) -> Result<bool> {
    Ok(spectral_radius(a)? < 1.0)
}
