//! Dual-Youla signal extraction from closed-loop data.
//!
//! With the central controller in the loop the recorded (u, y) pair is
//! compressed into two signals built from the nominal factors,
//!
//!   e1 = Y u + X (r - y)   which reduces to   X r + Y w,
//!   e2 = M~ y - N~ u,
//!
//! and the loop algebra turns identification of the true plant into an
//! open-loop problem: e2 = R e1 + (M~ - R X) nu, where R is the dual-Youla
//! parameter of the true plant against the nominal factorization. Both
//! filters are realized exactly on the shared observer state, so no FIR
//! truncation enters the data path.

use crate::{Result, SysidError, Trajectory};
use coprime::Dcf;
use nalgebra::DVector;

fn to_dvec(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}

/// Filter one recorded run into the pair (e1, e2).
///
/// e1 is computed from the exogenous draws (w - F xi with xi driven by r and
/// w), e2 from the measured channel (y - D u - C zeta with zeta driven by y
/// and u); each uses the exact realization on A_L = A - L C of the nominal
/// model.
pub fn dual_youla_signals(
    traj: &Trajectory,
    nominal: &Dcf,
) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let m = nominal.m_inputs();
    let p = nominal.p_outputs();
    let sample = |name: &'static str, row: Option<&Vec<f64>>, want: usize| -> Result<()> {
        match row {
            Some(v) if v.len() != want => Err(SysidError::Dimension {
                context: name,
                expected: format!("width {want}"),
                got: format!("width {}", v.len()),
            }),
            _ => Ok(()),
        }
    };
    sample("dual_youla_signals u", traj.u.first(), m)?;
    sample("dual_youla_signals y", traj.y.first(), p)?;
    sample("dual_youla_signals r", traj.r.first(), p)?;
    sample("dual_youla_signals w", traj.w.first(), m)?;
    let t_len = traj.len();
    if traj.y.len() != t_len || traj.r.len() != t_len || traj.w.len() != t_len {
        return Err(SysidError::InvalidArg(
            "dual_youla_signals requires equal-length u, y, r, w".into(),
        ));
    }

    let nom = &nominal.plant;
    let l = &nominal.gains.l;
    let f = &nominal.gains.f;
    let a_l = &nom.a - l * &nom.c;
    let b_l = &nom.b - l * &nom.d;

    let mut xi = DVector::<f64>::zeros(nom.order());
    let mut zeta = DVector::<f64>::zeros(nom.order());
    let mut e1 = Vec::with_capacity(t_len);
    let mut e2 = Vec::with_capacity(t_len);
    for t in 0..t_len {
        let (u, y) = (to_dvec(&traj.u[t]), to_dvec(&traj.y[t]));
        let (r, w) = (to_dvec(&traj.r[t]), to_dvec(&traj.w[t]));
        let e1_t = &w - f * &xi;
        let e2_t = &y - &nom.d * &u - &nom.c * &zeta;
        xi = &a_l * xi + l * &r + &b_l * &w;
        zeta = &a_l * zeta + l * &y + &b_l * &u;
        e1.push(e1_t.iter().copied().collect());
        e2.push(e2_t.iter().copied().collect());
    }
    Ok((e1, e2))
}
