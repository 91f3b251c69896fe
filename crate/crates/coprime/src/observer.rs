//! The affine family of state estimators and the fixed-gain evaluation objective.
//!
//! An estimator is a filter pair x^ = Psi_u u + Psi_y y. Every stabilizing pair
//! is Psi_u = P Y + S N~, Psi_y = P X - S M~ for stable S, and in the loop
//! u = F x^ the closed-loop maps from (w, nu) to the estimation error x - x^
//! are exactly (Psi_u, -Psi_y).
//!
//! When designs are indexed by the controller parameter Q instead (through
//! F S = Q + X~), the estimator uses the shifted factors: Psi_u = P Y_Q + S N~
//! and Psi_y = P X_Q - S M~. Weighting by F then collapses to the affine stack
//!
//!   [ I - Y_Q + (I-M) Q N~ ,  X_Q + (I-M) Q M~ ]
//!
//! which is the objective minimized by the synthesis layer. Note the two
//! indexings shift S: the Q-indexed estimator equals the S-indexed one at
//! S = F^+(Q + X~) - P Q, not at F^+(Q + X~).

use crate::dcf::{p_system, Dcf};
use crate::youla::{q_to_s, youla_factors};
use crate::{CoprimeError, Result};
use lti_core::FirSystem;

/// Filter pair (Psi_u, Psi_y) defining the estimator x^ = Psi_u u + Psi_y y.
#[derive(Debug, Clone)]
pub struct ObserverPair {
    /// n x m filter applied to the plant input.
    pub psi_u: FirSystem,
    /// n x p filter applied to the measured output.
    pub psi_y: FirSystem,
}

impl ObserverPair {
    /// Max tap deviation of Psi_u M + Psi_y N - P, the estimator validity identity.
    pub fn validity_residual(&self, dcf: &Dcf) -> f64 {
        let len = dcf.fir_len;
        let fs = dcf.factors(len);
        let p = p_system(&dcf.plant, &dcf.gains.f)
            .expect("gains validated at build time")
            .markov(len);
        let lhs = self
            .psi_u
            .series(&fs.m, len)
            .and_then(|a| Ok(a.add(&self.psi_y.series(&fs.n, len)?)?))
            .expect("factor dims agree");
        lhs.sub(&p)
            .expect("dims agree")
            .taps()
            .iter()
            .map(|t| t.norm())
            .fold(0.0, f64::max)
    }
}

const VALIDITY_TOL: f64 = 1e-8;

fn check_s(dcf: &Dcf, s: &FirSystem) -> Result<()> {
    if s.rows() != dcf.order() || s.cols() != dcf.p_outputs() {
        return Err(CoprimeError::Dimension {
            context: "estimator parameter S",
            expected: format!("{}x{}", dcf.order(), dcf.p_outputs()),
            got: format!("{}x{}", s.rows(), s.cols()),
        });
    }
    Ok(())
}

fn validated(pair: ObserverPair, dcf: &Dcf) -> Result<ObserverPair> {
    let residual = pair.validity_residual(dcf);
    if residual > VALIDITY_TOL {
        return Err(CoprimeError::ResidualCheck {
            context: "estimator validity (Psi_u M + Psi_y N - P)",
            residual,
            tol: VALIDITY_TOL,
        });
    }
    Ok(pair)
}

/// Estimator at parameter S: Psi_u = P Y + S N~, Psi_y = P X - S M~.
pub fn observer_from_s(dcf: &Dcf, s: &FirSystem) -> Result<ObserverPair> {
    check_s(dcf, s)?;
    let len = dcf.fir_len;
    let fs = dcf.factors(len);
    let p = p_system(&dcf.plant, &dcf.gains.f)?.markov(len);
    let pair = ObserverPair {
        psi_u: p.series(&fs.y, len)?.add(&s.series(&fs.n_tilde, len)?)?,
        psi_y: p.series(&fs.x, len)?.sub(&s.series(&fs.m_tilde, len)?)?,
    };
    validated(pair, dcf)
}

/// Estimator indexed by the controller parameter Q, using the shifted factors
/// Y_Q, X_Q and S solving F S = Q + X~.
pub fn observer_from_q(dcf: &Dcf, q: &FirSystem) -> Result<ObserverPair> {
    let len = dcf.fir_len;
    let fs = dcf.factors(len);
    let yf = youla_factors(dcf, q)?;
    let s = q_to_s(dcf, q)?;
    let p = p_system(&dcf.plant, &dcf.gains.f)?.markov(len);
    let pair = ObserverPair {
        psi_u: p.series(&yf.y_q, len)?.add(&s.series(&fs.n_tilde, len)?)?,
        psi_y: p.series(&yf.x_q, len)?.sub(&s.series(&fs.m_tilde, len)?)?,
    };
    validated(pair, dcf)
}

/// Closed-loop maps from (w, nu) to the estimation error under u = F x^:
/// returns (Psi_u, -Psi_y).
pub fn estimation_error_maps(dcf: &Dcf, s: &FirSystem) -> Result<(FirSystem, FirSystem)> {
    let pair = observer_from_s(dcf, s)?;
    let neg = pair.psi_y.scale(-1.0);
    Ok((pair.psi_u, neg))
}

/// The F-weighted error stack [I - Y_Q + (I-M) Q N~, X_Q + (I-M) Q M~]
/// as a single m x (m+p) FIR system.
pub fn objective_transfer(dcf: &Dcf, q: &FirSystem) -> Result<FirSystem> {
    let len = dcf.fir_len;
    let fs = dcf.factors(len);
    let yf = youla_factors(dcf, q)?;
    let m_dim = dcf.m_inputs();
    let eye = FirSystem::identity(m_dim, 0);
    let i_minus_m = eye.sub(&fs.m)?;
    let imq = i_minus_m.series(q, len)?;
    let left = eye.sub(&yf.y_q)?.add(&imq.series(&fs.n_tilde, len)?)?;
    let right = yf.x_q.add(&imq.series(&fs.m_tilde, len)?)?;
    left.stack_cols(&right).map_err(CoprimeError::from)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dcf::{build_dcf, build_dcf_with_len, GainPair};
    use crate::test_util::{random_dcf, random_fir};
    use approx::assert_relative_eq;
    use lti_core::{h2_norm_fir, presets, FirSystem, StateSpace};
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    fn worked() -> Dcf {
        let p = presets::worked_scalar();
        build_dcf(&p.sys, &GainPair::new(p.f, p.l)).unwrap()
    }

    #[test]
    fn zero_s_gives_py_px() {
        let dcf = worked();
        let s = FirSystem::zeros(1, 1, 0);
        let pair = observer_from_s(&dcf, &s).unwrap();
        // P Y = (z+1)/(z-0.5)^2, P X = 2.25/(z-0.5)^2
        for (j, want) in [0.0, 1.0, 2.0, 1.75, 1.25].iter().enumerate() {
            assert_relative_eq!(pair.psi_u.tap(j)[(0, 0)], *want, epsilon = 1e-12);
        }
        for (j, want) in [0.0, 0.0, 2.25, 2.25, 1.6875].iter().enumerate() {
            assert_relative_eq!(pair.psi_y.tap(j)[(0, 0)], *want, epsilon = 1e-12);
        }
    }

    #[test]
    fn validity_holds_for_random_s() {
        let mut rng = StdRng::seed_from_u64(31);
        for _ in 0..3 {
            let dcf = random_dcf(&mut rng, 3, 2, 2);
            let s = random_fir(&mut rng, 3, 2, 8);
            let pair = observer_from_s(&dcf, &s).unwrap();
            assert!(pair.validity_residual(&dcf) <= 1e-10);
        }
    }

    #[test]
    fn error_maps_negate_psi_y() {
        let dcf = worked();
        let s = FirSystem::constant(nalgebra::dmatrix![0.7]);
        let pair = observer_from_s(&dcf, &s).unwrap();
        let (map_w, map_nu) = estimation_error_maps(&dcf, &s).unwrap();
        for j in 0..=dcf.fir_len {
            assert_relative_eq!((map_w.tap(j) - pair.psi_u.tap(j)).norm(), 0.0, epsilon = 1e-15);
            assert_relative_eq!((map_nu.tap(j) + pair.psi_y.tap(j)).norm(), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn objective_at_zero_q_is_nominal_stack() {
        let dcf = worked();
        let obj = objective_transfer(&dcf, &FirSystem::zeros(1, 1, 0)).unwrap();
        let fs = dcf.factor_set();
        // [I - Y, X] = [-1.5/(z-0.5), 2.25/(z-0.5)]
        for j in 0..=dcf.fir_len {
            let want_left = if j == 0 { 1.0 - fs.y.tap(0)[(0, 0)] } else { -fs.y.tap(j)[(0, 0)] };
            assert_relative_eq!(obj.tap(j)[(0, 0)], want_left, epsilon = 1e-13);
            assert_relative_eq!(obj.tap(j)[(0, 1)], fs.x.tap(j)[(0, 0)], epsilon = 1e-13);
        }
    }

    #[test]
    fn objective_h2_matches_geometric_oracle() {
        // || [-1.5/(z-0.5), 2.25/(z-0.5)] ||_H2 = sqrt((1.5^2 + 2.25^2) * 4/3)
        let p = presets::worked_scalar();
        let dcf = build_dcf_with_len(&p.sys, &GainPair::new(p.f, p.l), 96).unwrap();
        let obj = objective_transfer(&dcf, &FirSystem::zeros(1, 1, 0)).unwrap();
        let want = ((1.5f64.powi(2) + 2.25f64.powi(2)) * 4.0 / 3.0).sqrt();
        assert_relative_eq!(h2_norm_fir(&obj), want, max_relative = 1e-9);
    }

    #[test]
    fn objective_equals_f_weighted_q_observer() {
        let mut rng = StdRng::seed_from_u64(37);
        for _ in 0..3 {
            let dcf = random_dcf(&mut rng, 3, 2, 2);
            let q = random_fir(&mut rng, 2, 2, 6);
            let obj = objective_transfer(&dcf, &q).unwrap();
            let pair = match observer_from_q(&dcf, &q) {
                Ok(p) => p,
                Err(CoprimeError::BijectionFailed { .. }) => continue,
                Err(e) => panic!("unexpected: {e}"),
            };
            let f = FirSystem::constant(dcf.gains.f.clone());
            let len = dcf.fir_len;
            let left = f.series(&pair.psi_u, len).unwrap();
            let right = f.series(&pair.psi_y, len).unwrap().scale(-1.0);
            let direct = left.stack_cols(&right).unwrap();
            for j in 0..=len {
                assert_relative_eq!((obj.tap(j) - direct.tap(j)).norm(), 0.0, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn q_indexed_estimator_matches_shifted_s() {
        // Psi_Q family equals the S family at S = F^+(Q+X~) - P Q
        let mut rng = StdRng::seed_from_u64(41);
        let dcf = random_dcf(&mut rng, 2, 2, 2);
        let q = random_fir(&mut rng, 2, 2, 4);
        let pair_q = match observer_from_q(&dcf, &q) {
            Ok(p) => p,
            Err(CoprimeError::BijectionFailed { .. }) => return,
            Err(e) => panic!("unexpected: {e}"),
        };
        let len = dcf.fir_len;
        let p_fir = p_system(&dcf.plant, &dcf.gains.f).unwrap().markov(len);
        let s_shift = q_to_s(&dcf, &q).unwrap().sub(&p_fir.series(&q, len).unwrap()).unwrap();
        let pair_s = observer_from_s(&dcf, &s_shift).unwrap();
        for j in 0..=len {
            assert_relative_eq!((pair_q.psi_u.tap(j) - pair_s.psi_u.tap(j)).norm(), 0.0, epsilon = 1e-9);
            assert_relative_eq!((pair_q.psi_y.tap(j) - pair_s.psi_y.tap(j)).norm(), 0.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn objective_is_affine_in_q() {
        let mut rng = StdRng::seed_from_u64(43);
        let dcf = random_dcf(&mut rng, 3, 2, 2);
        let q1 = random_fir(&mut rng, 2, 2, 5);
        let q2 = random_fir(&mut rng, 2, 2, 5);
        let zero = FirSystem::zeros(2, 2, 0);
        let base = objective_transfer(&dcf, &zero).unwrap();
        let sum = objective_transfer(&dcf, &q1.add(&q2).unwrap()).unwrap();
        let o1 = objective_transfer(&dcf, &q1).unwrap();
        let o2 = objective_transfer(&dcf, &q2).unwrap();
        for j in 0..=dcf.fir_len {
            let lhs = sum.tap(j) - base.tap(j);
            let rhs = (o1.tap(j) - base.tap(j)) + (o2.tap(j) - base.tap(j));
            assert_relative_eq!((lhs - rhs).norm(), 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn p_times_m_inverse_is_open_loop_map() {
        let mut rng = StdRng::seed_from_u64(47);
        let dcf = random_dcf(&mut rng, 3, 2, 2);
        let len = dcf.fir_len;
        let p_fir = p_system(&dcf.plant, &dcf.gains.f).unwrap().markov(len);
        let m_inv = dcf.m.markov(len).inverse(len).unwrap();
        let lhs = p_fir.series(&m_inv, len).unwrap();
        let open_loop = StateSpace::new(
            dcf.plant.a.clone(),
            dcf.plant.b.clone(),
            nalgebra::DMatrix::identity(3, 3),
            nalgebra::DMatrix::zeros(3, 2),
        )
        .unwrap()
        .markov(len);
        for j in 0..=len {
            assert_relative_eq!((lhs.tap(j) - open_loop.tap(j)).norm(), 0.0, epsilon = 1e-9);
        }
    }
}
