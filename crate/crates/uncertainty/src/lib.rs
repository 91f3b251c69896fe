//! Additive uncertainty on left coprime factors.
//!
//! The plant is only ever known through an identified factorization, so model
//! error is carried directly on the factors: every candidate plant is
//! `G = (M~ + D_M~)^{-1} (N~ + D_N~)` with the perturbation pair bounded in
//! H-infinity norm by a radius gamma. This crate provides
//!
//! - the uncertainty set itself plus seeded sampling of admissible
//!   perturbations ([`UncertaintySet`], [`sample_perturbation`]),
//! - evaluation of the perturbed plant on the unit circle ([`perturbed_plant`]),
//! - the Phi matrices that measure how far a perturbation pushes the Bezout
//!   identity off of the identity, together with their Neumann-series
//!   inverses ([`phi11`], [`phi22`], [`neumann_inverse`]),
//! - robust-stabilization certificates via the small-gain condition
//!   ([`is_robustly_stabilizing`], [`small_gain_check`]),
//! - reconstruction of a doubly coprime factorization of the *true* plant
//!   with the controller factors held fixed ([`true_plant_dcf`]), and
//! - the closed-loop objective value under a concrete perturbation
//!   ([`robust_objective_value`]).

pub mod objective;
pub mod phi;
pub mod plant;
pub mod rebase;
pub mod report;
pub mod robust;
pub mod set;
#[cfg(test)]
pub(crate) mod test_util;

pub use objective::{nominal_objective_value, robust_objective_value};
pub use phi::{
    block_identity_residual, neumann_inverse, phi11, phi22, NeumannOptions,
};
pub use plant::{perturbed_plant, PerturbedPlant};
pub use rebase::{
    solve_right_factors, true_plant_dcf, RightFactorSolution, TruePlantFactors,
    TRUE_PLANT_BEZOUT_TOL,
};
pub use report::{monte_carlo_phi11, MonteCarloRecord, MONTE_CARLO_CSV_HEADER};
pub use robust::{
    is_robustly_stabilizing, small_gain_check, small_gain_check_fir, RobustnessVerdict,
};
pub use set::{sample_perturbation, Perturbation, PerturbationJson, UncertaintySet};

use lti_core::LtiError;

pub type Result<T> = std::result::Result<T, UncertaintyError>;

#[derive(Debug, thiserror::Error)]
pub enum UncertaintyError {
    #[error(transparent)]
    Lti(#[from] LtiError),
    #[error(transparent)]
    Coprime(#[from] coprime::CoprimeError),
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    Dimension {
        context: &'static str,
        expected: String,
        got: String,
    },
    #[error("small-gain condition violated: ||Phi - I||_inf = {norm} >= 1")]
    SmallGainViolated { norm: f64 },
    #[error("factor pair singular on the unit circle at omega = {omega}")]
    SingularFrequency { omega: f64 },
    #[error("perturbation carries no right factors (d_n, d_m); solve or attach them first")]
    MissingRightFactors,
    #[error("Bezout residual {residual} exceeds tolerance {tol} after rebasing")]
    BezoutResidual { residual: f64, tol: f64 },
    #[error("{0} did not converge")]
    NotConverged(&'static str),
    #[error("invalid argument: {0}")]
    InvalidArg(String),
}
