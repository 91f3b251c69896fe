//! Windowed least-squares estimation of the Hankel operator of the
//! dual-Youla parameter.
//!
//! The open-loop relation e2 = R e1 + noise is regressed window by window:
//! for depth d each window pairs the future stack f_l = [e2_{l+d+1}; ...;
//! e2_{l+2d}] with the reversed past stack g_l = [e1_{l+d}; ...; e1_{l+1}],
//! and the estimate solves
//!
//!   H = (sum f g') (sum g g' + eps I)^-1 ,
//!
//! whose (i, j) block estimates the Markov parameter R_{i+j+1} of the
//! (strictly proper) parameter. The tiny ridge eps only regularizes
//! conditioning; a genuinely rank-deficient regressor Gram matrix is
//! reported as an error instead of being silently inverted.

use crate::{Result, SysidError};
use lti_core::FirSystem;
use nalgebra::{DMatrix, DVector};

/// Ridge added to the regressor Gram matrix before inversion.
pub const RIDGE_EPS: f64 = 1e-10;

/// Gram eigenvalues below this multiple of the ridge flag rank deficiency.
const RANK_TOL_FACTOR: f64 = 1e3;

/// Relative singular-value threshold used by depth selection.
const TAIL_FRACTION: f64 = 0.05;

/// Least-squares estimate of the block-Hankel operator.
#[derive(Debug, Clone)]
pub struct HankelEstimate {
    /// Estimated operator, (p * d) x (m * d).
    pub h_hat: DMatrix<f64>,
    /// Window depth d.
    pub d: usize,
    /// Number of samples the estimate was built from.
    pub t_len: usize,
    /// Output dimension p of e2.
    pub p_outputs: usize,
    /// Input dimension m of e1.
    pub m_inputs: usize,
    /// Root-mean-square regression residual per scalar future entry.
    pub residual: f64,
}

impl HankelEstimate {
    /// Block (i, j), a p x m estimate of the Markov parameter R_{i+j+1}.
    pub fn block(&self, i: usize, j: usize) -> DMatrix<f64> {
        self.h_hat
            .view((i * self.p_outputs, j * self.m_inputs), (self.p_outputs, self.m_inputs))
            .into_owned()
    }

    /// FIR parameter read off the first block row: tap k = block (0, k-1)
    /// estimates R_k, with tap 0 pinned to zero (the feedthrough is not
    /// identifiable from the regression).
    ///
    /// Unlike a realization fitted through the shift equation, this readout
    /// is a linear function of the regression coefficients and is always
    /// stable, which makes it the right input for uncertainty radii on
    /// noise-dominated estimates.
    pub fn markov_fir(&self) -> FirSystem {
        let mut taps = vec![DMatrix::zeros(self.p_outputs, self.m_inputs)];
        for j in 0..self.d {
            taps.push(self.block(0, j));
        }
        FirSystem::from_taps(taps).expect("blocks share dimensions")
    }
}

fn stack_window(series: &[Vec<f64>], indices: impl Iterator<Item = usize>, dim: usize, d: usize) -> DVector<f64> {
    let mut out = DVector::<f64>::zeros(dim * d);
    for (slot, t) in indices.enumerate() {
        for (k, v) in series[t].iter().enumerate() {
            out[slot * dim + k] = *v;
        }
    }
    out
}

/// Regress future e2 windows on reversed past e1 windows at depth `d`.
pub fn ols_hankel(e1: &[Vec<f64>], e2: &[Vec<f64>], d: usize) -> Result<HankelEstimate> {
    if d == 0 {
        return Err(SysidError::InvalidArg("ols_hankel requires depth d >= 1".into()));
    }
    let t_len = e1.len();
    if e2.len() != t_len {
        return Err(SysidError::Dimension {
            context: "ols_hankel",
            expected: format!("{t_len} samples of e2"),
            got: format!("{}", e2.len()),
        });
    }
    if t_len <= 2 * d {
        return Err(SysidError::InvalidArg(format!(
            "ols_hankel needs more than 2d = {} samples, got {t_len}",
            2 * d
        )));
    }
    let m = e1[0].len();
    let p = e2[0].len();

    let windows = t_len - 2 * d;
    let mut fg = DMatrix::<f64>::zeros(p * d, m * d);
    let mut gg = DMatrix::<f64>::zeros(m * d, m * d);
    for l in 0..windows {
        let g = stack_window(e1, (1..=d).rev().map(|j| l + j), m, d);
        let f = stack_window(e2, (d + 1..=2 * d).map(|j| l + j), p, d);
        gg.syger(1.0, &g, &g, 1.0);
        fg.ger(1.0, &f, &g, 1.0);
    }
    gg.fill_upper_triangle_with_lower_triangle();

    let lambda_min = gg
        .clone()
        .symmetric_eigen()
        .eigenvalues
        .min();
    if lambda_min < RANK_TOL_FACTOR * RIDGE_EPS {
        return Err(SysidError::RankDeficient { lambda_min });
    }

    let mut ridged = gg;
    for i in 0..m * d {
        ridged[(i, i)] += RIDGE_EPS;
    }
    let chol = ridged
        .cholesky()
        .ok_or(SysidError::RankDeficient { lambda_min })?;
    let h_hat = chol.solve(&fg.transpose()).transpose();

    let mut sq_err = 0.0;
    for l in 0..windows {
        let g = stack_window(e1, (1..=d).rev().map(|j| l + j), m, d);
        let f = stack_window(e2, (d + 1..=2 * d).map(|j| l + j), p, d);
        sq_err += (&f - &h_hat * &g).norm_squared();
    }
    let residual = (sq_err / (windows * p * d) as f64).sqrt();

    Ok(HankelEstimate {
        h_hat,
        d,
        t_len,
        p_outputs: p,
        m_inputs: m,
        residual,
    })
}

/// Pick the window depth for a horizon of `t_len` samples.
///
/// The floor d0 = ceil(ln(T / delta_fail)) grows with the horizon so that
/// estimation error, not truncation, dominates. A probe estimate at the
/// floor then inspects the singular-value tail: the chosen depth is the
/// larger of d0 and the smallest index whose trailing singular values all
/// stay below 5% of sigma_1. The tail can only confirm or extend the floor
/// up to the probe itself; deeper probing is deliberately avoided because on
/// noise-dominated data the tail never collapses and would inflate the depth
/// without adding signal.
pub fn choose_depth(e1: &[Vec<f64>], e2: &[Vec<f64>], delta_fail: f64) -> Result<usize> {
    if !(delta_fail > 0.0 && delta_fail < 1.0) {
        return Err(SysidError::InvalidArg(format!(
            "delta_fail must lie in (0, 1), got {delta_fail}"
        )));
    }
    let t_len = e1.len();
    let d0 = ((t_len as f64 / delta_fail).ln().ceil() as usize).max(1);
    let d_cap = (t_len.saturating_sub(1)) / 2;
    if d0 > d_cap {
        return Err(SysidError::InvalidArg(format!(
            "horizon {t_len} is too short for the depth floor {d0}"
        )));
    }

    let est = ols_hankel(e1, e2, d0)?;
    let sigma = est.h_hat.singular_values();
    let mut tail_d = sigma.len();
    for d in (1..sigma.len()).rev() {
        if sigma[d] < TAIL_FRACTION * sigma[0] {
            tail_d = d;
        } else {
            break;
        }
    }
    Ok(d0.max(tail_d.min(d_cap)))
}
