//! Closed-form evaluation of the robustness upper bound for a given design.

use crate::constants::constants;
use crate::{Result, SynthesisError};
use coprime::{youla_factors, Dcf};
use lti_core::{h2_norm_fir, hinf_norm_fir, FirSystem, HINF_DEFAULT_TOL};

/// Evaluate the upper bound at a given (Q, alpha, gamma), not necessarily the
/// optimizer:
///
/// ```text
///   ||[I - Y_Q, X_Q]||_H2 + lambda1 ||Q||_H2 (lambda2 + gamma) / (1 - gamma alpha)
/// ```
///
/// valid whenever ||[Y~_Q; X~_Q]||_inf <= alpha < 1/gamma. A constraint norm
/// above alpha is an error: the formula would silently understate the
/// worst case there, so no clamping is done. Norms are evaluated on the
/// factorization's truncated FIR views.
pub fn upper_bound_value(nominal: &Dcf, q: &FirSystem, alpha: f64, gamma: f64) -> Result<f64> {
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(SynthesisError::InvalidArg(format!(
            "gamma must be a finite nonnegative real, got {gamma}"
        )));
    }
    if !(alpha > 0.0) || gamma * alpha >= 1.0 {
        return Err(SynthesisError::InvalidArg(format!(
            "alpha must satisfy 0 < alpha < 1/gamma, got alpha = {alpha}, gamma = {gamma}"
        )));
    }
    let yf = youla_factors(nominal, q)?;
    let stack = yf.y_tilde_q.stack_rows(&yf.x_tilde_q)?;
    let norm = hinf_norm_fir(&stack, HINF_DEFAULT_TOL);
    if norm > alpha + 1e-9 {
        return Err(SynthesisError::ConstraintViolated { norm, alpha });
    }
    let consts = constants(nominal)?;
    let m = nominal.m_inputs();
    let error_stack = FirSystem::identity(m, 0).sub(&yf.y_q)?.stack_cols(&yf.x_q)?;
    Ok(h2_norm_fir(&error_stack)
        + consts.lambda1 * h2_norm_fir(q) * (consts.lambda2_left + gamma) / (1.0 - gamma * alpha))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use coprime::{build_dcf, GainPair};
    use lti_core::presets;

    fn worked_dcf() -> Dcf {
        let p = presets::worked_scalar();
        build_dcf(&p.sys, &GainPair::new(p.f, p.l)).unwrap()
    }

    #[test]
    fn zero_q_reduces_to_the_nominal_error_norm() {
        // ||[I - Y, X]||_H2 = sqrt(9.75) for the worked plant; the Q term
        // vanishes so gamma only matters through the validity premise
        let dcf = worked_dcf();
        let q = FirSystem::zeros(1, 1, 0);
        let v0 = upper_bound_value(&dcf, &q, 6.5, 0.0).unwrap();
        assert_relative_eq!(v0, 9.75f64.sqrt(), epsilon = 1e-6);
        let v1 = upper_bound_value(&dcf, &q, 6.5, 0.1).unwrap();
        assert_relative_eq!(v1, v0, epsilon = 1e-12);
    }

    #[test]
    fn alpha_below_the_stack_norm_is_rejected() {
        // Q = 0 stack norm is sqrt(36.25) = 6.02; alpha = 5 invalidates the bound
        let dcf = worked_dcf();
        let q = FirSystem::zeros(1, 1, 0);
        assert!(matches!(
            upper_bound_value(&dcf, &q, 5.0, 0.1),
            Err(SynthesisError::ConstraintViolated { .. })
        ));
        assert!(upper_bound_value(&dcf, &q, 6.1, 0.1).is_ok());
    }

    #[test]
    fn invalid_premises_are_errors() {
        let dcf = worked_dcf();
        let q = FirSystem::zeros(1, 1, 0);
        assert!(upper_bound_value(&dcf, &q, 0.0, 0.1).is_err());
        assert!(upper_bound_value(&dcf, &q, 10.0, 0.1).is_err()); // gamma alpha = 1
        assert!(upper_bound_value(&dcf, &q, 6.5, -0.2).is_err());
    }

    #[test]
    fn gamma_inflates_the_q_term_only() {
        let dcf = worked_dcf();
        let taps = vec![nalgebra::dmatrix![0.2], nalgebra::dmatrix![-0.1]];
        let q = FirSystem::from_taps(taps).unwrap();
        let yf = youla_factors(&dcf, &q).unwrap();
        let alpha = hinf_norm_fir(
            &yf.y_tilde_q.stack_rows(&yf.x_tilde_q).unwrap(),
            HINF_DEFAULT_TOL,
        ) * 1.01;
        let lo = upper_bound_value(&dcf, &q, alpha, 0.0).unwrap();
        let hi = upper_bound_value(&dcf, &q, alpha, 0.12).unwrap();
        assert!(hi > lo, "bound must grow with gamma when Q is nonzero");
    }
}
