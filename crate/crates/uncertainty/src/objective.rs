//! Closed-loop objective value under a concrete factor perturbation.
//!
//! The error stack for the perturbed plant replaces the nominal left factors
//! by their Phi11-normalized versions:
//!
//!   [ I - Y_Q + (I - M) Q Phi11^{-1} (N~ + D_N~),
//!     X_Q     + (I - M) Q Phi11^{-1} (M~ + D_M~) ],
//!
//! an m x (m+p) system whose H2 norm is the evaluation objective. At zero
//! perturbation Phi11 = I and this is exactly the nominal error stack.

use crate::phi::{neumann_inverse, phi11, NeumannOptions};
use crate::set::Perturbation;
use crate::{Result, UncertaintyError};
use coprime::{objective_transfer, youla_factors, Dcf};
use lti_core::{h2_norm_fir, FirSystem};

/// H2 norm of the nominal error stack (the zero-perturbation objective).
pub fn nominal_objective_value(nominal: &Dcf, q: &FirSystem) -> Result<f64> {
    Ok(h2_norm_fir(&objective_transfer(nominal, q)?))
}

/// H2 norm of the perturbed error stack for one admissible perturbation.
///
/// Phi11 is inverted by the truncated Neumann series, so this errors when the
/// perturbation violates the small-gain condition against the controller's
/// right-factor stack.
pub fn robust_objective_value(
    nominal: &Dcf,
    q: &FirSystem,
    pert: &Perturbation,
) -> Result<f64> {
    let (p, m) = (nominal.p_outputs(), nominal.m_inputs());
    if pert.outputs() != p || pert.inputs() != m {
        return Err(UncertaintyError::Dimension {
            context: "robust_objective_value",
            expected: format!("{p} outputs, {m} inputs"),
            got: format!("{} outputs, {} inputs", pert.outputs(), pert.inputs()),
        });
    }
    let len = nominal.fir_len;
    let fs = nominal.factors(len);
    let yf = youla_factors(nominal, q)?;
    let phi = phi11(pert, &yf)?;
    let phi_inv = neumann_inverse(
        &phi,
        &NeumannOptions {
            max_degree: len,
            ..Default::default()
        },
    )?;
    let eye = FirSystem::identity(m, 0);
    let imq = eye.sub(&fs.m)?.series(q, len)?;
    let left_tail = phi_inv.series(&fs.n_tilde.add(&pert.d_n_tilde)?, len)?;
    let right_tail = phi_inv.series(&fs.m_tilde.add(&pert.d_m_tilde)?, len)?;
    let left = eye.sub(&yf.y_q)?.add(&imq.series(&left_tail, len)?)?;
    let right = yf.x_q.add(&imq.series(&right_tail, len)?)?;
    Ok(h2_norm_fir(&left.stack_cols(&right)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample_perturbation;
    use crate::test_util::{random_q, worked_set};
    use approx::assert_relative_eq;
    use coprime::youla_factors;
    use lti_core::{hinf_norm_fir, HINF_DEFAULT_TOL};
    use nalgebra::dmatrix;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    #[test]
    fn zero_perturbation_reduces_to_nominal_objective() {
        let set = worked_set(0.15);
        let mut rng = StdRng::seed_from_u64(3);
        let pert = Perturbation::zero(1, 1, 6);
        for degree in [0, 4] {
            let q = if degree == 0 {
                FirSystem::zeros(1, 1, 0)
            } else {
                random_q(&mut rng, &set.nominal, degree, 0.3)
            };
            let robust = robust_objective_value(&set.nominal, &q, &pert).unwrap();
            let nominal = nominal_objective_value(&set.nominal, &q).unwrap();
            assert_relative_eq!(robust, nominal, epsilon = 1e-12);
        }
    }

    #[test]
    fn zero_q_objective_matches_hand_value() {
        // ||[I - Y, X]||_H2 = sqrt(3 + 6.75) for the worked plant.
        let set = worked_set(0.15);
        let q = FirSystem::zeros(1, 1, 0);
        let pert = Perturbation::zero(1, 1, 2);
        let value = robust_objective_value(&set.nominal, &q, &pert).unwrap();
        assert_relative_eq!(value, 9.75f64.sqrt(), epsilon = 1e-6);
    }

    #[test]
    fn perturbed_values_stay_below_analytic_bound() {
        let set = worked_set(0.15);
        let gamma = set.gamma;
        let mut rng = StdRng::seed_from_u64(8);
        let fs = set.nominal.factor_set();
        let lambda1 = hinf_norm_fir(
            &FirSystem::identity(1, 0).sub(&fs.m).unwrap(),
            HINF_DEFAULT_TOL,
        );
        let lambda2 = hinf_norm_fir(
            &fs.n_tilde.stack_cols(&fs.m_tilde).unwrap(),
            HINF_DEFAULT_TOL,
        );
        for q in [
            FirSystem::zeros(1, 1, 0),
            random_q(&mut rng, &set.nominal, 3, 0.1),
        ] {
            let yf = youla_factors(&set.nominal, &q).unwrap();
            let alpha = hinf_norm_fir(
                &yf.y_tilde_q.stack_rows(&yf.x_tilde_q).unwrap(),
                HINF_DEFAULT_TOL,
            );
            assert!(gamma * alpha < 1.0, "test setup: alpha {alpha} too large");
            let h2_nominal = h2_norm_fir(
                &FirSystem::identity(1, 0)
                    .sub(&yf.y_q)
                    .unwrap()
                    .stack_cols(&yf.x_q)
                    .unwrap(),
            );
            let bound = h2_nominal
                + lambda1 * h2_norm_fir(&q) * (lambda2 + gamma) / (1.0 - gamma * alpha);
            for fraction in [0.3, 0.6, 0.9] {
                for _ in 0..8 {
                    let pert = sample_perturbation(&set, 8, fraction, &mut rng).unwrap();
                    let value = robust_objective_value(&set.nominal, &q, &pert).unwrap();
                    assert!(
                        value <= bound + 1e-9,
                        "value {value} exceeds bound {bound} at fraction {fraction}"
                    );
                }
            }
        }
    }

    #[test]
    fn fixed_direction_grows_toward_the_radius() {
        let set = worked_set(0.15);
        let mut rng = StdRng::seed_from_u64(12);
        let q = random_q(&mut rng, &set.nominal, 3, 0.2);
        let direction = sample_perturbation(&set, 8, 0.5, &mut rng).unwrap();
        let base_norm = direction.stack_norm();
        let mut last = -1.0;
        let mut values = Vec::new();
        for fraction in [0.2, 0.4, 0.6, 0.8, 0.95] {
            let pert = direction.scale(fraction * set.gamma / base_norm);
            let value = robust_objective_value(&set.nominal, &q, &pert).unwrap();
            values.push(value);
            assert!(
                value >= last - 1e-9,
                "objective dipped along the ray: {values:?}"
            );
            last = value;
        }
        assert!(values.last().unwrap() > values.first().unwrap());
    }

    #[test]
    fn small_gain_violation_is_an_error() {
        let set = worked_set(0.15);
        let q = FirSystem::zeros(1, 1, 0);
        let pert = Perturbation::new(
            FirSystem::constant(dmatrix![0.3]),
            FirSystem::zeros(1, 1, 0),
        )
        .unwrap();
        assert!(matches!(
            robust_objective_value(&set.nominal, &q, &pert),
            Err(UncertaintyError::SmallGainViolated { .. })
        ));
    }
}
