//! Doubly-coprime factorizations and the two affine parameterizations built on
//! top of them: Youla-parameterized feedback controllers and the family of all
//! linear state estimators.
//!
//! Starting from a plant (A, B, C, D) and stabilizing gains (F, L), the eight
//! stable factors
//!
//!   M  = I + F(zI-A_F)^-1 B        N  = D + C_F(zI-A_F)^-1 B
//!   M~ = I - C(zI-A_L)^-1 L        N~ = D + C(zI-A_L)^-1 B_L
//!   X  =   - F(zI-A_L)^-1 L        Y  = I - F(zI-A_L)^-1 B_L
//!   X~ =   - F(zI-A_F)^-1 L        Y~ = I + C_F(zI-A_F)^-1 L
//!
//! with A_F = A+BF, A_L = A-LC, C_F = C+DF, B_L = B-LD satisfy the two-sided
//! Bezout identity
//!
//!   [ Y  X ] [ M  -X~ ]   [ I  0 ]
//!   [-N~ M~] [ N   Y~ ] = [ 0  I ]   (and in the reverse order).
//!
//! Every stabilizing controller is K_Q = Y_Q^-1 X_Q with X_Q = X + Q M~,
//! Y_Q = Y - Q N~ for a stable parameter Q, and every state estimator
//! x^ = Psi_u u + Psi_y y is Psi_u = P Y + S N~, Psi_y = P X - S M~ for a
//! stable parameter S, where P = (zI-A_F)^-1 B. When F has full row rank the
//! two parameters are linked by F S = Q + X~, which turns controller design
//! and observer design into the same affine search.

pub mod dcf;
pub mod observer;
pub mod sim;
#[cfg(test)]
pub(crate) mod test_util;
pub mod youla;

pub use dcf::{
    bezout_residual, bezout_residual_fir, build_dcf, build_dcf_with_len, central_controller,
    p_system, Dcf, FactorSet, GainPair, DEFAULT_FIR_LEN,
};
pub use observer::{
    estimation_error_maps, objective_transfer, observer_from_q, observer_from_s, ObserverPair,
};
pub use sim::{closed_loop_matrix, simulate_observer_loop, ObserverLoopSim};
pub use youla::{q_to_s, s_to_q, youla_factors, youla_bezout_residual, YoulaFactors};

/// Errors raised while building factorizations or applying the parameterizations.
#[derive(Debug, thiserror::Error)]
pub enum CoprimeError {
    #[error(transparent)]
    Lti(#[from] lti_core::LtiError),
    #[error("gain {gain} does not stabilize its loop: spectral radius {radius}")]
    NotStabilizing { gain: &'static str, radius: f64 },
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    Dimension {
        context: &'static str,
        expected: String,
        got: String,
    },
    #[error("Bezout residual {residual} exceeds tolerance {tol}")]
    BezoutResidual { residual: f64, tol: f64 },
    #[error("{context} residual {residual} exceeds tolerance {tol}")]
    ResidualCheck {
        context: &'static str,
        residual: f64,
        tol: f64,
    },
    #[error("S <-> Q bijection unavailable: F F^+ (Q + X~) deviates by {residual}")]
    BijectionFailed { residual: f64 },
    #[error("{0}")]
    InvalidArg(String),
}

/// Result alias for this crate.
pub type Result<T> = std::result::Result<T, CoprimeError>;

/// Tolerance used when validating Bezout identities of constructed factorizations.
pub const BEZOUT_TOL: f64 = 1e-8;
