//! The Youla shift of the Bezout factors and the S <-> Q reparameterization.

use crate::dcf::{bezout_residual_fir, Dcf, FactorSet};
use crate::{CoprimeError, Result};
use lti_core::FirSystem;

/// Bezout factors shifted by a stable parameter Q.
#[derive(Debug, Clone)]
pub struct YoulaFactors {
    /// X + Q M~
    pub x_q: FirSystem,
    /// Y - Q N~
    pub y_q: FirSystem,
    /// X~ + M Q
    pub x_tilde_q: FirSystem,
    /// Y~ - N Q
    pub y_tilde_q: FirSystem,
    /// The parameter itself.
    pub q: FirSystem,
}

fn check_q(dcf: &Dcf, q: &FirSystem) -> Result<()> {
    if q.rows() != dcf.m_inputs() || q.cols() != dcf.p_outputs() {
        return Err(CoprimeError::Dimension {
            context: "Youla parameter Q",
            expected: format!("{}x{}", dcf.m_inputs(), dcf.p_outputs()),
            got: format!("{}x{}", q.rows(), q.cols()),
        });
    }
    Ok(())
}

/// Shift the four outer factors by Q, truncated to the factorization's FIR length.
pub fn youla_factors(dcf: &Dcf, q: &FirSystem) -> Result<YoulaFactors> {
    check_q(dcf, q)?;
    let len = dcf.fir_len;
    let fs = dcf.factors(len);
    Ok(YoulaFactors {
        x_q: fs.x.add(&q.series(&fs.m_tilde, len)?)?,
        y_q: fs.y.sub(&q.series(&fs.n_tilde, len)?)?,
        x_tilde_q: fs.x_tilde.add(&fs.m.series(q, len)?)?,
        y_tilde_q: fs.y_tilde.sub(&fs.n.series(q, len)?)?,
        q: q.truncate(len),
    })
}

/// Generalized Bezout residual of a shifted factor set.
///
/// The inner factors (M, N, M~, N~) are untouched by the shift, so the
/// two-sided identity must keep holding with (X, Y, X~, Y~) replaced by their
/// shifted versions.
pub fn youla_bezout_residual(dcf: &Dcf, yf: &YoulaFactors) -> f64 {
    let len = dcf.fir_len;
    let fs = dcf.factors(len);
    let shifted = FactorSet {
        m: fs.m,
        n: fs.n,
        m_tilde: fs.m_tilde,
        n_tilde: fs.n_tilde,
        x: yf.x_q.clone(),
        y: yf.y_q.clone(),
        x_tilde: yf.x_tilde_q.clone(),
        y_tilde: yf.y_tilde_q.clone(),
    };
    bezout_residual_fir(&shifted, len)
}

/// Q = F S - X~, the controller parameter realized by the estimator parameter S.
pub fn s_to_q(dcf: &Dcf, s: &FirSystem) -> Result<FirSystem> {
    if s.rows() != dcf.order() || s.cols() != dcf.p_outputs() {
        return Err(CoprimeError::Dimension {
            context: "estimator parameter S",
            expected: format!("{}x{}", dcf.order(), dcf.p_outputs()),
            got: format!("{}x{}", s.rows(), s.cols()),
        });
    }
    let len = dcf.fir_len;
    let fs_term = FirSystem::constant(dcf.gains.f.clone()).series(s, len)?;
    fs_term
        .sub(&dcf.x_tilde.markov(len))
        .map_err(CoprimeError::from)
}

/// S = F^+ (Q + X~), the estimator parameter realizing the controller parameter Q.
///
/// Solves F S = Q + X~ through the Moore-Penrose inverse of F. This is only a
/// faithful inverse when F has full row rank; otherwise the unmet remainder
/// F F^+ (Q + X~) - (Q + X~) is reported as an error.
pub fn q_to_s(dcf: &Dcf, q: &FirSystem) -> Result<FirSystem> {
    check_q(dcf, q)?;
    let len = dcf.fir_len;
    let rhs = q.add(&dcf.x_tilde.markov(len))?;
    let f_pinv = dcf
        .gains
        .f
        .clone()
        .pseudo_inverse(1e-12)
        .map_err(|e| CoprimeError::InvalidArg(format!("pseudo-inverse of F failed: {e}")))?;
    let ff_pinv = &dcf.gains.f * &f_pinv;
    let residual = rhs
        .taps()
        .iter()
        .map(|t| (&ff_pinv * t - t).norm())
        .fold(0.0, f64::max);
    if residual > 1e-10 {
        return Err(CoprimeError::BijectionFailed { residual });
    }
    FirSystem::constant(f_pinv).series(&rhs, len).map_err(CoprimeError::from)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dcf::{build_dcf, GainPair};
    use crate::test_util::{random_dcf, random_fir};
    use approx::assert_relative_eq;
    use lti_core::{presets, StateSpace};
    use nalgebra::{dmatrix, DMatrix};
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    fn worked() -> Dcf {
        let p = presets::worked_scalar();
        build_dcf(&p.sys, &GainPair::new(p.f, p.l)).unwrap()
    }

    #[test]
    fn zero_q_returns_nominal() {
        let dcf = worked();
        let q = FirSystem::zeros(1, 1, 0);
        let yf = youla_factors(&dcf, &q).unwrap();
        let fs = dcf.factor_set();
        for j in 0..=dcf.fir_len {
            assert_relative_eq!((yf.x_q.tap(j) - fs.x.tap(j)).norm(), 0.0, epsilon = 1e-14);
            assert_relative_eq!((yf.y_q.tap(j) - fs.y.tap(j)).norm(), 0.0, epsilon = 1e-14);
            assert_relative_eq!((yf.x_tilde_q.tap(j) - fs.x_tilde.tap(j)).norm(), 0.0, epsilon = 1e-14);
            assert_relative_eq!((yf.y_tilde_q.tap(j) - fs.y_tilde.tap(j)).norm(), 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn constant_q_shifts_by_scaled_factor() {
        let dcf = worked();
        let q = FirSystem::constant(dmatrix![0.1]);
        let yf = youla_factors(&dcf, &q).unwrap();
        let fs = dcf.factor_set();
        for j in 0..=dcf.fir_len {
            assert_relative_eq!(
                yf.x_q.tap(j)[(0, 0)],
                fs.x.tap(j)[(0, 0)] + 0.1 * fs.m_tilde.tap(j)[(0, 0)],
                epsilon = 1e-13
            );
        }
    }

    #[test]
    fn generalized_bezout_for_random_q() {
        let mut rng = StdRng::seed_from_u64(17);
        for _ in 0..3 {
            let dcf = random_dcf(&mut rng, 3, 2, 2);
            let q = random_fir(&mut rng, 2, 2, 6);
            let yf = youla_factors(&dcf, &q).unwrap();
            assert!(youla_bezout_residual(&dcf, &yf) <= 1e-8);
        }
    }

    #[test]
    fn q_to_s_scalar_at_zero() {
        // F = -1.5, Q = 0: S = X~ / (-1.5) = -1.5/(z-0.5)
        let dcf = worked();
        let s = q_to_s(&dcf, &FirSystem::zeros(1, 1, 0)).unwrap();
        for (j, want) in [0.0, -1.5, -0.75, -0.375].iter().enumerate() {
            assert_relative_eq!(s.tap(j)[(0, 0)], *want, epsilon = 1e-12);
        }
    }

    #[test]
    fn q_equals_minus_x_tilde_gives_zero_s() {
        let dcf = worked();
        let q = dcf.x_tilde.markov(dcf.fir_len).scale(-1.0);
        let s = q_to_s(&dcf, &q).unwrap();
        for j in 0..=dcf.fir_len {
            assert_relative_eq!(s.tap(j).norm(), 0.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn round_trip_s_to_q_of_q_to_s() {
        let mut rng = StdRng::seed_from_u64(23);
        for _ in 0..3 {
            let dcf = random_dcf(&mut rng, 2, 2, 2);
            let q = random_fir(&mut rng, 2, 2, 5);
            let s = match q_to_s(&dcf, &q) {
                Ok(s) => s,
                // random F may be near rank-deficient; skip those draws
                Err(CoprimeError::BijectionFailed { .. }) => continue,
                Err(e) => panic!("unexpected error: {e}"),
            };
            let q_back = s_to_q(&dcf, &s).unwrap();
            for j in 0..=dcf.fir_len {
                assert_relative_eq!((q_back.tap(j) - q.tap(j)).norm(), 0.0, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn wide_state_f_fails_bijection() {
        // two inputs, one state: F is 2x1, F F^+ has rank 1 < 2
        let plant = StateSpace::new(
            dmatrix![0.5],
            dmatrix![1.0, 0.0],
            dmatrix![1.0],
            DMatrix::zeros(1, 2),
        )
        .unwrap();
        let gains = GainPair::new(dmatrix![-0.3; 0.2], dmatrix![0.4]);
        let dcf = build_dcf(&plant, &gains).unwrap();
        let q = FirSystem::constant(dmatrix![0.3; -0.1]);
        match q_to_s(&dcf, &q) {
            Err(CoprimeError::BijectionFailed { residual }) => assert!(residual > 1e-3),
            other => panic!("expected bijection failure, got {other:?}"),
        }
    }
}
