//! Closed-loop identification through the dual-Youla parameter.
//!
//! An unknown plant sits in feedback with a known stabilizing controller
//! K = Y^-1 X built from a nominal factorization. Every plant this controller
//! stabilizes is indexed by one stable parameter R,
//!
//!   G_R = (N + Y~ R)(M - X~ R)^-1,
//!
//! and two signals computable from loop data expose R as an open-loop system:
//!
//!   e1 = X r + Y w,        e2 = M~ y - N~ u,        e2 = R e1 + (M~ - R X) nu.
//!
//! Identifying the stable R is then a standard regression problem even when
//! the plant itself is unstable. The stages provided here are
//!
//!   simulate_closed_loop -> dual_youla_signals -> ols_hankel -> ho_kalman
//!     -> recover_factors,
//!
//! ending in perturbed left factors and an uncertainty radius gamma_hat that
//! plugs straight into the robust evaluation and synthesis crates.

pub mod hankel;
pub mod radius;
pub mod realize;
pub mod report;
pub mod signals;
pub mod sim;

pub use hankel::{choose_depth, ols_hankel, HankelEstimate, RIDGE_EPS};
pub use radius::{gamma_theory, min_horizon, recover_factors, RecoveredFactors, SampleComplexityParams};
pub use realize::{ho_kalman, IdentifiedModel};
pub use report::{
    read_identification_report, write_identification_report, write_trajectory_csv,
    IdentificationReport,
};
pub use signals::dual_youla_signals;
pub use sim::{plant_with_dual_youla, simulate_closed_loop, Trajectory};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SysidError {
    #[error(transparent)]
    Lti(#[from] lti_core::LtiError),
    #[error(transparent)]
    Coprime(#[from] coprime::CoprimeError),
    #[error("{context}: expected {expected}, got {got}")]
    Dimension {
        context: &'static str,
        expected: String,
        got: String,
    },
    #[error("invalid argument: {0}")]
    InvalidArg(String),
    #[error("state norm {norm:.3e} exceeded the overflow guard at step {step}")]
    Unstable { step: usize, norm: f64 },
    #[error("regressor Gram matrix is rank deficient (smallest eigenvalue {lambda_min:.3e})")]
    RankDeficient { lambda_min: f64 },
    #[error("requested order {order} exceeds the numerical rank {rank} of the Hankel estimate")]
    OrderExceedsRank { order: usize, rank: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, SysidError>;
