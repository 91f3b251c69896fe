//! Ho-Kalman realization of the identified dual-Youla parameter.
//!
//! A rank-r truncated SVD of the estimated Hankel operator splits it into
//! observability and controllability factors, H ~ O Ctr with O = U_r S_r^1/2
//! and Ctr = S_r^1/2 V_r'; the realization reads off C from the first block
//! row of O, B from the first block column of Ctr, and A from the least
//! squares solution of the block shift O_up A = O_down. The parameter is
//! strictly proper by construction (its feedthrough is not identifiable from
//! the regression), so the returned model always has D = 0.

use crate::{HankelEstimate, Result, SysidError};
use nalgebra::{DMatrix, SVD};
use lti_core::StateSpace;

/// Singular values this far below the largest count as numerically zero.
const RANK_REL_TOL: f64 = 1e-8;

/// State-space realization extracted from a Hankel estimate.
#[derive(Debug, Clone)]
pub struct IdentifiedModel {
    /// Realization of the identified parameter; strictly proper (D = 0).
    pub model: StateSpace,
    /// Singular values of the Hankel estimate, largest first.
    pub singular_values: Vec<f64>,
    /// Window depth the estimate was formed at.
    pub d_hat: usize,
    /// Realized state order.
    pub order: usize,
}

/// Realize a state-space model of the given order from a Hankel estimate.
///
/// Requires depth d >= 2 (the shift needs two block rows) and an order no
/// larger than the numerical rank of the estimate.
pub fn ho_kalman(est: &HankelEstimate, order: usize) -> Result<IdentifiedModel> {
    let (p, m, d) = (est.p_outputs, est.m_inputs, est.d);
    if d < 2 {
        return Err(SysidError::InvalidArg(
            "ho_kalman needs window depth d >= 2 to form the shifted range".into(),
        ));
    }
    if order == 0 {
        return Err(SysidError::InvalidArg("ho_kalman requires order >= 1".into()));
    }
    let svd = SVD::new(est.h_hat.clone(), true, true);
    let sigma = &svd.singular_values;
    let rank = sigma.iter().filter(|s| **s >= RANK_REL_TOL * sigma[0]).count();
    if order > rank {
        return Err(SysidError::OrderExceedsRank { order, rank });
    }

    let u = svd.u.as_ref().expect("svd with u");
    let v_t = svd.v_t.as_ref().expect("svd with v_t");
    let mut obs = DMatrix::<f64>::zeros(p * d, order);
    let mut ctr = DMatrix::<f64>::zeros(order, m * d);
    for k in 0..order {
        let root = sigma[k].sqrt();
        obs.column_mut(k).copy_from(&(u.column(k) * root));
        ctr.row_mut(k).copy_from(&(v_t.row(k) * root));
    }

    let c_hat = obs.view((0, 0), (p, order)).into_owned();
    let b_hat = ctr.view((0, 0), (order, m)).into_owned();
    let obs_up = obs.view((0, 0), (p * (d - 1), order)).into_owned();
    let obs_down = obs.view((p, 0), (p * (d - 1), order)).into_owned();
    let a_hat = SVD::new(obs_up, true, true)
        .solve(&obs_down, 1e-12)
        .map_err(|e| SysidError::InvalidArg(format!("ho_kalman shift solve failed: {e}")))?;

    let model = StateSpace::new(a_hat, b_hat, c_hat, DMatrix::zeros(p, m))?;
    Ok(IdentifiedModel {
        model,
        singular_values: sigma.iter().copied().collect(),
        d_hat: d,
        order,
    })
}
