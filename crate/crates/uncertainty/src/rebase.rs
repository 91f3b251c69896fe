//! Rebasing the factorization onto the true plant.
//!
//! Given left-factor perturbations, the right-factor pair (D_N, D_M) is not
//! free: the off-diagonal block of the perturbed Bezout product must vanish,
//!
//!   -(M~ + D_M~) D_N + (N~ + D_N~) D_M = D_M~ N - D_N~ M,
//!
//! which pins (D_N, D_M) down to within the Bezout kernel. We solve that
//! convolution equation for FIR taps by minimum-norm least squares and report
//! the attained residual. Normalizing by the Phi blocks then restores an exact
//! doubly coprime factorization of the true plant while the controller
//! factors stay untouched:
//!
//!   M~pt = Phi11^{-1}(M~ + D_M~),   N~pt = Phi11^{-1}(N~ + D_N~),
//!   Mpt  = (M + D_M) Phi22^{-1},    Npt  = (N + D_N) Phi22^{-1}.

use crate::phi::{neumann_inverse, phi11, phi22, NeumannOptions};
use crate::set::Perturbation;
use crate::{Result, UncertaintyError};
use coprime::{bezout_residual_fir, Dcf, FactorSet, YoulaFactors};
use lti_core::FirSystem;
use nalgebra::{DMatrix, DVector};

/// Rebased factors must satisfy Bezout with the controller factors to this
/// tolerance (covers least-squares and FIR-inversion error).
pub const TRUE_PLANT_BEZOUT_TOL: f64 = 1e-6;

/// Derived right-factor pair and the residual of the defining equation.
#[derive(Debug, Clone)]
pub struct RightFactorSolution {
    pub d_n: FirSystem,
    pub d_m: FirSystem,
    /// Largest absolute entry of the convolution-equation residual.
    pub residual: f64,
}

/// A doubly coprime factorization of the true plant, with diagnostics.
#[derive(Debug, Clone)]
pub struct TruePlantFactors {
    /// Rebased plant factors alongside the unchanged controller factors.
    pub factors: FactorSet,
    /// Residual of the right-factor equation actually used.
    pub right_residual: f64,
    /// Bezout residual of `factors` over the working tap range.
    pub bezout_residual: f64,
}

/// Solve the right-factor equation for FIR (D_N, D_M) of the given degree.
///
/// The system is underdetermined (the Bezout kernel is free), so the
/// minimum-norm solution is returned; `residual` should sit at rounding level
/// whenever the degree is at least that of the right-hand side.
pub fn solve_right_factors(
    fs: &FactorSet,
    pert: &Perturbation,
    degree: usize,
) -> Result<RightFactorSolution> {
    let p = pert.outputs();
    let m = pert.inputs();
    if fs.p_outputs() != p || fs.m_inputs() != m {
        return Err(UncertaintyError::Dimension {
            context: "solve_right_factors",
            expected: format!("{}x{} factor set", fs.p_outputs(), fs.m_inputs()),
            got: format!("{p}x{m} perturbation"),
        });
    }
    let a1 = fs.m_tilde.add(&pert.d_m_tilde)?.scale(-1.0);
    let a2 = fs.n_tilde.add(&pert.d_n_tilde)?;
    let rhs = right_factor_rhs(fs, pert)?;

    let d_a = a1.degree().max(a2.degree());
    let k_max = (d_a + degree).max(rhs.degree());
    let block = p * m;
    let rows = (k_max + 1) * block;
    let cols_n = (degree + 1) * p * m;
    let cols_m = (degree + 1) * m * m;
    let mut g = DMatrix::<f64>::zeros(rows, cols_n + cols_m);
    let eye_m = DMatrix::<f64>::identity(m, m);
    for t in 0..=degree {
        for j in 0..=d_a {
            let k = t + j;
            if k > k_max {
                break;
            }
            // vec(A X) = (I kron A) vec(X), so each (tap, lag) pair drops a
            // Kronecker block into the Toeplitz system.
            g.view_mut((k * block, t * p * m), (block, p * m))
                .copy_from(&eye_m.kronecker(&a1.tap(j)));
            g.view_mut((k * block, cols_n + t * m * m), (block, m * m))
                .copy_from(&eye_m.kronecker(&a2.tap(j)));
        }
    }
    let mut b = DVector::<f64>::zeros(rows);
    for k in 0..=rhs.degree() {
        let tap = rhs.tap(k);
        for (i, v) in tap.iter().enumerate() {
            b[k * block + i] = *v;
        }
    }

    let svd = g.clone().svd(true, true);
    let sigma_max = svd.singular_values.max();
    let x = svd
        .solve(&b, sigma_max * 1e-12)
        .map_err(|e| UncertaintyError::InvalidArg(e.to_string()))?;
    let residual = (&g * &x - &b).abs().max();

    let slice = x.as_slice();
    let d_n_taps = (0..=degree)
        .map(|t| DMatrix::from_column_slice(p, m, &slice[t * p * m..(t + 1) * p * m]))
        .collect();
    let d_m_taps = (0..=degree)
        .map(|t| {
            let start = cols_n + t * m * m;
            DMatrix::from_column_slice(m, m, &slice[start..start + m * m])
        })
        .collect();
    Ok(RightFactorSolution {
        d_n: FirSystem::from_taps(d_n_taps)?,
        d_m: FirSystem::from_taps(d_m_taps)?,
        residual,
    })
}

/// `D_M~ N - D_N~ M`, the right-hand side of the right-factor equation.
fn right_factor_rhs(fs: &FactorSet, pert: &Perturbation) -> Result<FirSystem> {
    let n_rhs = pert
        .d_m_tilde
        .degree()
        .max(pert.d_n_tilde.degree())
        + fs.degree();
    pert.d_m_tilde
        .series(&fs.n, n_rhs)?
        .sub(&pert.d_n_tilde.series(&fs.m, n_rhs)?)
        .map_err(UncertaintyError::from)
}

/// Residual of the right-factor equation for a concrete (D_N, D_M) pair.
pub fn right_factor_equation_residual(
    fs: &FactorSet,
    pert: &Perturbation,
    d_n: &FirSystem,
    d_m: &FirSystem,
) -> Result<f64> {
    let a1 = fs.m_tilde.add(&pert.d_m_tilde)?.scale(-1.0);
    let a2 = fs.n_tilde.add(&pert.d_n_tilde)?;
    let rhs = right_factor_rhs(fs, pert)?;
    let n = (a1.degree() + d_n.degree().max(d_m.degree())).max(rhs.degree());
    let lhs = a1.series(d_n, n)?.add(&a2.series(d_m, n)?)?;
    Ok(lhs.sub(&rhs)?.max_tap_norm())
}

/// Reconstruct a doubly coprime factorization of the true plant, holding the
/// controller factors `(X_Q, Y_Q, X~_Q, Y~_Q)` fixed.
///
/// Uses the perturbation's attached right factors when present, otherwise
/// solves for them. Errors when either Phi block fails the small-gain test
/// (not unimodular) or when the rebased Bezout residual exceeds
/// [`TRUE_PLANT_BEZOUT_TOL`].
pub fn true_plant_dcf(
    nominal: &Dcf,
    pert: &Perturbation,
    yf: &YoulaFactors,
) -> Result<TruePlantFactors> {
    let len = nominal.fir_len;
    let fs = nominal.factors(len);
    let (d_n, d_m, right_residual) = match (&pert.d_n, &pert.d_m) {
        (Some(d_n), Some(d_m)) => {
            let residual = right_factor_equation_residual(&fs, pert, d_n, d_m)?;
            (d_n.clone(), d_m.clone(), residual)
        }
        _ => {
            let degree =
                pert.d_m_tilde.degree().max(pert.d_n_tilde.degree()) + fs.degree();
            let sol = solve_right_factors(&fs, pert, degree)?;
            (sol.d_n, sol.d_m, sol.residual)
        }
    };
    let pert_full = pert.clone().with_right_factors(d_n, d_m)?;

    let opts = NeumannOptions {
        max_degree: len,
        ..Default::default()
    };
    let phi11_inv = neumann_inverse(&phi11(&pert_full, yf)?, &opts)?;
    let phi22_inv = neumann_inverse(&phi22(&pert_full, yf)?, &opts)?;

    let m_tilde = phi11_inv.series(&fs.m_tilde.add(&pert_full.d_m_tilde)?, len)?;
    let n_tilde = phi11_inv.series(&fs.n_tilde.add(&pert_full.d_n_tilde)?, len)?;
    let d_m_fir = pert_full.d_m.as_ref().expect("attached above");
    let d_n_fir = pert_full.d_n.as_ref().expect("attached above");
    let m = fs.m.add(d_m_fir)?.series(&phi22_inv, len)?;
    let n = fs.n.add(d_n_fir)?.series(&phi22_inv, len)?;

    let factors = FactorSet {
        m,
        n,
        m_tilde,
        n_tilde,
        x: yf.x_q.clone(),
        y: yf.y_q.clone(),
        x_tilde: yf.x_tilde_q.clone(),
        y_tilde: yf.y_tilde_q.clone(),
    };
    let bezout_residual = bezout_residual_fir(&factors, len);
    if bezout_residual > TRUE_PLANT_BEZOUT_TOL {
        return Err(UncertaintyError::BezoutResidual {
            residual: bezout_residual,
            tol: TRUE_PLANT_BEZOUT_TOL,
        });
    }
    Ok(TruePlantFactors {
        factors,
        right_residual,
        bezout_residual,
    })
}
