//! Phi matrices: how a factor perturbation deforms the Bezout identity.
//!
//! Multiplying the perturbed plant factors against the (fixed) controller
//! factors no longer returns the identity; it returns diag(Phi11, Phi22) with
//!
//!   Phi11 = I_p + [D_M~ D_N~] [Y~_Q; X~_Q],
//!   Phi22 = I_m + [X_Q Y_Q] [D_N; D_M],
//!
//! provided the right-factor pair (D_N, D_M) is consistent with the left one.
//! Under the small-gain condition both Phi blocks are unimodular and their
//! inverses are given by the geometric (Neumann) series, which is exactly how
//! [`neumann_inverse`] computes them.

use crate::set::Perturbation;
use crate::{Result, UncertaintyError};
use coprime::YoulaFactors;
use lti_core::{hinf_norm_fir, FirSystem, HINF_DEFAULT_TOL};

/// `Phi11 = I_p + [D_M~ D_N~] [Y~_Q; X~_Q]`.
pub fn phi11(pert: &Perturbation, yf: &YoulaFactors) -> Result<FirSystem> {
    let stack = pert.stack();
    let v = yf.y_tilde_q.stack_rows(&yf.x_tilde_q)?;
    if stack.cols() != v.rows() {
        return Err(UncertaintyError::Dimension {
            context: "phi11",
            expected: format!("{} factor rows", stack.cols()),
            got: format!("{}", v.rows()),
        });
    }
    let n = stack.degree() + v.degree();
    let prod = stack.series(&v, n)?;
    FirSystem::identity(stack.rows(), 0)
        .add(&prod)
        .map_err(UncertaintyError::from)
}

/// `Phi22 = I_m + [X_Q Y_Q] [D_N; D_M]`; requires the derived right factors.
pub fn phi22(pert: &Perturbation, yf: &YoulaFactors) -> Result<FirSystem> {
    let (d_n, d_m) = match (&pert.d_n, &pert.d_m) {
        (Some(d_n), Some(d_m)) => (d_n, d_m),
        _ => return Err(UncertaintyError::MissingRightFactors),
    };
    let h = yf.x_q.stack_cols(&yf.y_q)?;
    let v = d_n.stack_rows(d_m)?;
    if h.cols() != v.rows() {
        return Err(UncertaintyError::Dimension {
            context: "phi22",
            expected: format!("{} factor rows", h.cols()),
            got: format!("{}", v.rows()),
        });
    }
    let n = h.degree() + v.degree();
    let prod = h.series(&v, n)?;
    FirSystem::identity(h.rows(), 0)
        .add(&prod)
        .map_err(UncertaintyError::from)
}

/// Largest tap-norm deviation of the full 2x2 block product
/// `[[M~+D, N~+D], [-X_Q, Y_Q]] * [[Y~_Q, -(N+D)], [X~_Q, M+D]]`
/// from diag(Phi11, Phi22), measured over taps 0..n_taps.
pub fn block_identity_residual(
    fs: &coprime::FactorSet,
    yf: &YoulaFactors,
    pert: &Perturbation,
    n_taps: usize,
) -> Result<f64> {
    let (d_n, d_m) = match (&pert.d_n, &pert.d_m) {
        (Some(d_n), Some(d_m)) => (d_n, d_m),
        _ => return Err(UncertaintyError::MissingRightFactors),
    };
    let p = pert.outputs();
    let m = pert.inputs();
    let top = fs
        .m_tilde
        .add(&pert.d_m_tilde)?
        .stack_cols(&fs.n_tilde.add(&pert.d_n_tilde)?)?;
    let bottom = yf.x_q.scale(-1.0).stack_cols(&yf.y_q)?;
    let left = top.stack_rows(&bottom)?;
    let rtop = yf
        .y_tilde_q
        .stack_cols(&fs.n.add(d_n)?.scale(-1.0))?;
    let rbot = yf.x_tilde_q.stack_cols(&fs.m.add(d_m)?)?;
    let right = rtop.stack_rows(&rbot)?;
    let prod = left.series(&right, n_taps)?;
    let expected = phi11(pert, yf)?
        .stack_cols(&FirSystem::zeros(p, m, 0))?
        .stack_rows(&FirSystem::zeros(m, p, 0).stack_cols(&phi22(pert, yf)?)?)?
        .truncate(n_taps);
    Ok(prod.sub(&expected)?.max_tap_norm())
}

/// Controls for the Neumann-series inversion.
#[derive(Debug, Clone)]
pub struct NeumannOptions {
    /// Degree at which every intermediate product is truncated.
    pub max_degree: usize,
    /// Stop once the largest tap of the next power falls below this.
    pub tol: f64,
    /// Summation proceeds by doubling; 40 doublings cover 2^40 series terms.
    pub max_doublings: usize,
}

impl Default for NeumannOptions {
    fn default() -> Self {
        Self {
            max_degree: 256,
            tol: 1e-12,
            max_doublings: 40,
        }
    }
}

/// Invert a square FIR `Phi` by summing `sum_k (I - Phi)^k`.
///
/// Valid precisely when `||I - Phi||_inf < 1` (the small-gain condition),
/// which is checked up front. Because convolution is causal, truncation never
/// corrupts low-order taps: the returned taps are exact partial sums of the
/// true inverse up to the stopping tolerance.
pub fn neumann_inverse(phi: &FirSystem, opts: &NeumannOptions) -> Result<FirSystem> {
    if phi.rows() != phi.cols() {
        return Err(UncertaintyError::Dimension {
            context: "neumann_inverse",
            expected: "square".into(),
            got: format!("{}x{}", phi.rows(), phi.cols()),
        });
    }
    let eye = FirSystem::identity(phi.rows(), 0);
    let t = eye.sub(phi)?;
    let gap = hinf_norm_fir(&t, HINF_DEFAULT_TOL);
    if gap >= 1.0 {
        return Err(UncertaintyError::SmallGainViolated { norm: gap });
    }
    // S holds sum_{k < 2^j} T^k; power holds T^{2^j}.
    let mut sum = eye.add(&t)?.truncate(opts.max_degree);
    let mut power = t.series(&t, opts.max_degree)?;
    for _ in 0..opts.max_doublings {
        if power.max_tap_norm() < opts.tol {
            return Ok(sum);
        }
        sum = sum.add(&power.series(&sum, opts.max_degree)?)?;
        power = power.series(&power, opts.max_degree)?;
    }
    if power.max_tap_norm() < opts.tol {
        Ok(sum)
    } else {
        Err(UncertaintyError::NotConverged("neumann_inverse"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample_perturbation;
    use crate::set::Perturbation;
    use crate::test_util::{random_q, worked_set};
    use approx::assert_relative_eq;
    use coprime::youla_factors;
    use nalgebra::dmatrix;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    #[test]
    fn zero_perturbation_gives_identity_phi11() {
        let set = worked_set(0.15);
        let mut rng = StdRng::seed_from_u64(2);
        for degree in [0, 3] {
            let q = random_q(&mut rng, &set.nominal, degree, 0.4);
            let yf = youla_factors(&set.nominal, &q).unwrap();
            let pert = Perturbation::zero(1, 1, 5);
            let phi = phi11(&pert, &yf).unwrap();
            assert_relative_eq!(phi.tap(0)[(0, 0)], 1.0);
            for j in 1..=phi.degree() {
                assert_eq!(phi.tap(j)[(0, 0)], 0.0);
            }
        }
    }

    #[test]
    fn phi22_requires_right_factors() {
        let set = worked_set(0.15);
        let q = lti_core::FirSystem::zeros(1, 1, 0);
        let yf = youla_factors(&set.nominal, &q).unwrap();
        let pert = Perturbation::zero(1, 1, 2);
        assert!(matches!(
            phi22(&pert, &yf),
            Err(UncertaintyError::MissingRightFactors)
        ));
    }

    #[test]
    fn neumann_matches_recursive_tap_inverse() {
        let set = worked_set(0.15);
        let mut rng = StdRng::seed_from_u64(9);
        let q = random_q(&mut rng, &set.nominal, 4, 0.3);
        let yf = youla_factors(&set.nominal, &q).unwrap();
        let pert = sample_perturbation(&set, 8, 0.8, &mut rng).unwrap();
        let phi = phi11(&pert, &yf).unwrap();
        let opts = NeumannOptions {
            max_degree: 64,
            ..Default::default()
        };
        let inv = neumann_inverse(&phi, &opts).unwrap();
        // Independent route: the recursive tap-by-tap inverse.
        let direct = phi.inverse(64).unwrap();
        assert!(inv.sub(&direct).unwrap().max_tap_norm() < 1e-10);
        // And the defining property Phi * Phi^{-1} = I on the shared prefix.
        let residual = phi
            .series(&inv, 64)
            .unwrap()
            .sub(&lti_core::FirSystem::identity(1, 0))
            .unwrap()
            .max_tap_norm();
        assert!(residual < 1e-10, "residual {residual}");
    }

    #[test]
    fn neumann_rejects_expansive_deviation() {
        let phi = FirSystem::constant(dmatrix![-0.2]); // I - Phi = 1.2
        let err = neumann_inverse(&phi, &NeumannOptions::default()).unwrap_err();
        assert!(matches!(
            err,
            UncertaintyError::SmallGainViolated { norm } if norm > 1.19
        ));
    }

    #[test]
    fn contraction_certifies_unimodularity_on_random_draws() {
        let set = worked_set(0.15);
        let mut rng = StdRng::seed_from_u64(31);
        let q = lti_core::FirSystem::zeros(1, 1, 0);
        let yf = youla_factors(&set.nominal, &q).unwrap();
        for _ in 0..20 {
            let pert = sample_perturbation(&set, 8, 0.9, &mut rng).unwrap();
            let phi = phi11(&pert, &yf).unwrap();
            let gap = hinf_norm_fir(
                &phi.sub(&FirSystem::identity(1, 0)).unwrap(),
                HINF_DEFAULT_TOL,
            );
            assert!(gap < 1.0, "phi11 deviation {gap} should be a contraction");
            assert!(neumann_inverse(&phi, &NeumannOptions::default()).is_ok());
        }
    }
}
