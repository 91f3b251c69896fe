//! Robust-stabilization certificates built on the small-gain condition.

use crate::{Result, UncertaintyError};
use coprime::YoulaFactors;
use lti_core::{
    hinf_norm_fir, hinf_norm_ss, FirSystem, StateSpace, HINF_DEFAULT_TOL,
};

/// Outcome of the stack-norm test against the radius reciprocal.
#[derive(Debug, Clone, Copy)]
pub struct RobustnessVerdict {
    /// Measured `||[Y~_Q; X~_Q]||_inf`.
    pub stack_norm: f64,
    /// `1 / gamma`.
    pub threshold: f64,
    pub robust: bool,
}

/// A controller parameterized by Q stabilizes every plant in the gamma ball
/// iff the column stack of its right factors stays within 1/gamma.
pub fn is_robustly_stabilizing(yf: &YoulaFactors, gamma: f64) -> Result<RobustnessVerdict> {
    if !(gamma > 0.0) {
        return Err(UncertaintyError::InvalidArg(format!(
            "radius must be positive, got {gamma}"
        )));
    }
    let stack = yf.y_tilde_q.stack_rows(&yf.x_tilde_q)?;
    let stack_norm = hinf_norm_fir(&stack, HINF_DEFAULT_TOL);
    let threshold = 1.0 / gamma;
    Ok(RobustnessVerdict {
        stack_norm,
        threshold,
        robust: stack_norm <= threshold,
    })
}

/// Loop-gain test for two stable systems: true iff the product of their
/// H-infinity norms stays below one. Errors on an unstable input.
pub fn small_gain_check(g1: &StateSpace, g2: &StateSpace) -> Result<bool> {
    let n1 = hinf_norm_ss(g1, HINF_DEFAULT_TOL)?;
    let n2 = hinf_norm_ss(g2, HINF_DEFAULT_TOL)?;
    Ok(n1 * n2 < 1.0)
}

/// FIR variant (stability is automatic for FIR systems).
pub fn small_gain_check_fir(g1: &FirSystem, g2: &FirSystem) -> bool {
    hinf_norm_fir(g1, HINF_DEFAULT_TOL) * hinf_norm_fir(g2, HINF_DEFAULT_TOL) < 1.0
}
