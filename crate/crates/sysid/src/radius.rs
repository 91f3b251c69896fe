//! Uncertainty radius recovery and sample-complexity bookkeeping.
//!
//! The identified dual-Youla parameter R^ shifts the nominal left factors to
//!
//!   M~^ = M~ - R^ X,       N~^ = N~ + R^ Y,
//!
//! which stay coprime with the controller factors unchanged, so the factor
//! error of the identified model against its own nominal center is exactly
//! Delta = [-R^ X, R^ Y]. The estimation-error radius combines the measured
//! norm of that factor error with a user floor; alongside it the module
//! evaluates the high-probability a-priori radius
//!
//!   gamma_theory = 12 c beta R ||[X Y]||_inf
//!                  sqrt((m d + p d^2 + d ln(T/delta)) / T)
//!
//! and its inverse, the smallest horizon whose a-priori radius beats a
//! target. The constants (c, beta, R) are calibration constants fitted once
//! against synthetic ground truth; see the defaults.

use crate::{Result, SysidError};
use coprime::Dcf;
use lti_core::{hinf_norm_fir, hinf_norm_ss, FirSystem, StateSpace, HINF_DEFAULT_TOL};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Constants entering the a-priori radius.
///
/// `c_const`, `beta` and `script_r` multiply the sqrt(log T / T) rate; they
/// were calibrated once on synthetic runs (nominal scalar loop, unit noise,
/// horizons 2^8..2^14, 20 seeds) so the predicted radius covers the observed
/// factor error with margin at every horizon. They are configuration, not
/// estimates: rescale them when the noise scales change.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleComplexityParams {
    /// Excitation conditioning constant.
    pub beta: f64,
    /// Signal-radius constant.
    pub script_r: f64,
    /// Leading universal constant.
    pub c_const: f64,
    /// Failure probability of the high-probability bound.
    pub delta_fail: f64,
    /// Input dimension of the loop (width of e1).
    pub m: usize,
    /// Output dimension of the loop (width of e2).
    pub p: usize,
}

impl Default for SampleComplexityParams {
    fn default() -> Self {
        Self {
            beta: 1.0,
            script_r: 1.0,
            c_const: 0.02,
            delta_fail: 0.05,
            m: 1,
            p: 1,
        }
    }
}

impl SampleComplexityParams {
    /// Check positivity and range requirements.
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("beta", self.beta),
            ("script_r", self.script_r),
            ("c_const", self.c_const),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(SysidError::InvalidArg(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if !(self.delta_fail > 0.0 && self.delta_fail < 1.0) {
            return Err(SysidError::InvalidArg(format!(
                "delta_fail must lie in (0, 1), got {}",
                self.delta_fail
            )));
        }
        if self.m == 0 || self.p == 0 {
            return Err(SysidError::InvalidArg(
                "signal dimensions m and p must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// Squared-rate constant s = 144 ||[X Y]||^2 c^2 beta^2 R^2 used by the
    /// horizon inversion.
    pub fn s_const(&self, xy_norm: f64) -> f64 {
        144.0 * xy_norm.powi(2) * (self.c_const * self.beta * self.script_r).powi(2)
    }
}

/// Identified left factors and the radii attached to them.
#[derive(Debug, Clone)]
pub struct RecoveredFactors {
    /// Identified M~, truncated to the nominal FIR length.
    pub m_tilde: FirSystem,
    /// Identified N~, truncated to the nominal FIR length.
    pub n_tilde: FirSystem,
    /// H-infinity norm of the realized factor error [dM~ dN~].
    pub measured: f64,
    /// A-priori radius at the horizon and depth the estimate used.
    pub theory: f64,
    /// Radius to synthesize against: max(measured, floor).
    pub gamma_hat: f64,
}

/// Exact realization of the row [X(z) Y(z)] on the observer state.
fn xy_row(nominal: &Dcf) -> Result<StateSpace> {
    let nom = &nominal.plant;
    let (f, l) = (&nominal.gains.f, &nominal.gains.l);
    let (n, m, p) = (nom.order(), nominal.m_inputs(), nominal.p_outputs());
    let a_l = &nom.a - l * &nom.c;
    let b_l = &nom.b - l * &nom.d;
    let mut b = DMatrix::<f64>::zeros(n, p + m);
    b.view_mut((0, 0), (n, p)).copy_from(l);
    b.view_mut((0, p), (n, m)).copy_from(&b_l);
    let mut d = DMatrix::<f64>::zeros(m, p + m);
    d.view_mut((0, p), (m, m)).copy_from(&DMatrix::identity(m, m));
    StateSpace::new(a_l, b, -f.clone(), d).map_err(SysidError::from)
}

/// A-priori radius at horizon `t_len` and depth `d_hat`, given the exact
/// norm of the excitation row [X Y].
pub fn gamma_theory(
    params: &SampleComplexityParams,
    xy_norm: f64,
    d_hat: usize,
    t_len: usize,
) -> Result<f64> {
    params.validate()?;
    if d_hat == 0 || t_len == 0 {
        return Err(SysidError::InvalidArg(
            "gamma_theory requires d_hat >= 1 and t_len >= 1".into(),
        ));
    }
    if !(xy_norm > 0.0 && xy_norm.is_finite()) {
        return Err(SysidError::InvalidArg(format!(
            "xy_norm must be positive and finite, got {xy_norm}"
        )));
    }
    let d = d_hat as f64;
    let t = t_len as f64;
    let inner = (params.m as f64) * d + (params.p as f64) * d * d + d * (t / params.delta_fail).ln();
    Ok(12.0 * params.c_const * params.beta * params.script_r * xy_norm * (inner / t).sqrt())
}

/// Shift the nominal left factors by the identified parameter and attach the
/// estimation radii.
///
/// `r_hat` is the identified (strictly proper, stable) FIR parameter,
/// typically [`HankelEstimate::markov_fir`](crate::HankelEstimate::markov_fir);
/// `d_hat` the window depth it came from. `floor` guards against an
/// optimistically small measured error on lucky draws; the synthesis radius
/// is max(measured, floor) while the a-priori value is reported separately
/// as a diagnostic.
pub fn recover_factors(
    nominal: &Dcf,
    r_hat: &FirSystem,
    params: &SampleComplexityParams,
    t_len: usize,
    d_hat: usize,
    floor: f64,
) -> Result<RecoveredFactors> {
    params.validate()?;
    let (m, p) = (nominal.m_inputs(), nominal.p_outputs());
    if params.m != m || params.p != p {
        return Err(SysidError::Dimension {
            context: "recover_factors params",
            expected: format!("m = {m}, p = {p}"),
            got: format!("m = {}, p = {}", params.m, params.p),
        });
    }
    if r_hat.rows() != p || r_hat.cols() != m {
        return Err(SysidError::Dimension {
            context: "recover_factors parameter",
            expected: format!("{p}x{m}"),
            got: format!("{}x{}", r_hat.rows(), r_hat.cols()),
        });
    }
    if !(floor >= 0.0 && floor.is_finite()) {
        return Err(SysidError::InvalidArg(format!(
            "floor must be nonnegative and finite, got {floor}"
        )));
    }

    let len = nominal.fir_len;
    let r_fir = r_hat;
    let fs = nominal.factor_set();
    let r_x = r_fir.series(&fs.x, len)?;
    let r_y = r_fir.series(&fs.y, len)?;
    let m_tilde = fs.m_tilde.sub(&r_x)?;
    let n_tilde = fs.n_tilde.add(&r_y)?;
    let delta = r_x.scale(-1.0).stack_cols(&r_y)?;
    let measured = hinf_norm_fir(&delta, HINF_DEFAULT_TOL);

    let xy_norm = hinf_norm_ss(&xy_row(nominal)?, HINF_DEFAULT_TOL)?;
    let theory = gamma_theory(params, xy_norm, d_hat, t_len)?;

    Ok(RecoveredFactors {
        m_tilde,
        n_tilde,
        measured,
        theory,
        gamma_hat: measured.max(floor),
    })
}

/// Smallest horizon T whose a-priori radius stays below `gamma`, i.e. the
/// rightmost root of f(T) = gamma^2 T - s d ln(T/delta) - s (m d + p d^2).
///
/// Returns 0 when every horizon already satisfies the target (f has no
/// root). `s_const` is the squared-rate constant, see
/// [`SampleComplexityParams::s_const`].
pub fn min_horizon(
    gamma: f64,
    s_const: f64,
    d_hat: usize,
    m: usize,
    p: usize,
    delta_fail: f64,
) -> Result<f64> {
    if !(gamma > 0.0 && gamma.is_finite()) || !(s_const > 0.0 && s_const.is_finite()) {
        return Err(SysidError::InvalidArg(format!(
            "min_horizon requires positive finite gamma and s_const, got {gamma}, {s_const}"
        )));
    }
    if d_hat == 0 || m == 0 || p == 0 {
        return Err(SysidError::InvalidArg(
            "min_horizon requires d_hat, m, p >= 1".into(),
        ));
    }
    if !(delta_fail > 0.0 && delta_fail < 1.0) {
        return Err(SysidError::InvalidArg(format!(
            "delta_fail must lie in (0, 1), got {delta_fail}"
        )));
    }
    let d = d_hat as f64;
    let fixed = s_const * ((m as f64) * d + (p as f64) * d * d);
    let f = |t: f64| gamma * gamma * t - s_const * d * (t / delta_fail).ln() - fixed;

    // f falls from +inf at 0+ to its minimum at t_dip, then rises linearly.
    let t_dip = s_const * d / (gamma * gamma);
    if f(t_dip) > 0.0 {
        return Ok(0.0);
    }
    let mut hi = t_dip;
    for _ in 0..200 {
        if f(hi) > 0.0 {
            break;
        }
        hi *= 2.0;
    }
    let mut lo = t_dip;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-9 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}
