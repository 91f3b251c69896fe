//! Time-domain simulation of the loop: plant + u = F x^ + FIR estimator.

use crate::observer::ObserverPair;
use crate::{CoprimeError, Result};
use lti_core::StateSpace;
use nalgebra::{DMatrix, DVector};

/// Trajectories produced by `simulate_observer_loop`.
#[derive(Debug, Clone)]
pub struct ObserverLoopSim {
    pub states: Vec<Vec<f64>>,
    pub estimates: Vec<Vec<f64>>,
    pub inputs: Vec<Vec<f64>>,
    pub outputs: Vec<Vec<f64>>,
}

fn to_dvec(v: &[f64], dim: usize, name: &'static str) -> Result<DVector<f64>> {
    if v.len() != dim {
        return Err(CoprimeError::Dimension {
            context: name,
            expected: dim.to_string(),
            got: v.len().to_string(),
        });
    }
    Ok(DVector::from_column_slice(v))
}

/// Run the closed loop x+ = Ax + B(u + w) + delta, y = Cx + nu,
/// x^ = Psi_u u + Psi_y y, u = F x^ from zero initial state.
///
/// Requires a strictly proper plant (D = 0) and strictly proper Psi_u so the
/// recursion y_k -> x^_k -> u_k is causal.
pub fn simulate_observer_loop(
    plant: &StateSpace,
    f: &DMatrix<f64>,
    obs: &ObserverPair,
    w: &[Vec<f64>],
    nu: &[Vec<f64>],
    delta: Option<&[Vec<f64>]>,
) -> Result<ObserverLoopSim> {
    let (n, m, p) = (plant.order(), plant.inputs(), plant.outputs());
    if plant.d.norm() != 0.0 {
        return Err(CoprimeError::InvalidArg(
            "simulate_observer_loop requires a strictly proper plant (D = 0)".into(),
        ));
    }
    if obs.psi_u.tap(0).norm() > 1e-12 {
        return Err(CoprimeError::InvalidArg(
            "Psi_u must be strictly proper for a causal loop".into(),
        ));
    }
    if obs.psi_u.rows() != n || obs.psi_u.cols() != m || obs.psi_y.rows() != n || obs.psi_y.cols() != p
    {
        return Err(CoprimeError::Dimension {
            context: "observer filter shapes",
            expected: format!("Psi_u {n}x{m}, Psi_y {n}x{p}"),
            got: format!(
                "Psi_u {}x{}, Psi_y {}x{}",
                obs.psi_u.rows(),
                obs.psi_u.cols(),
                obs.psi_y.rows(),
                obs.psi_y.cols()
            ),
        });
    }
    if w.len() != nu.len() {
        return Err(CoprimeError::Dimension {
            context: "noise horizon",
            expected: w.len().to_string(),
            got: nu.len().to_string(),
        });
    }

    let horizon = w.len();
    let mut x = DVector::zeros(n);
    let mut us: Vec<DVector<f64>> = Vec::with_capacity(horizon);
    let mut ys: Vec<DVector<f64>> = Vec::with_capacity(horizon);
    let mut out = ObserverLoopSim {
        states: Vec::with_capacity(horizon),
        estimates: Vec::with_capacity(horizon),
        inputs: Vec::with_capacity(horizon),
        outputs: Vec::with_capacity(horizon),
    };

    for k in 0..horizon {
        let wk = to_dvec(&w[k], m, "w sample")?;
        let nuk = to_dvec(&nu[k], p, "nu sample")?;
        let y = &plant.c * &x + nuk;

        let mut xhat = DVector::zeros(n);
        for j in 1..=obs.psi_u.degree().min(k) {
            xhat += obs.psi_u.tap(j) * &us[k - j];
        }
        for j in 0..=obs.psi_y.degree().min(k) {
            if j == 0 {
                xhat += obs.psi_y.tap(0) * &y;
            } else {
                xhat += obs.psi_y.tap(j) * &ys[k - j];
            }
        }
        let u = f * &xhat;

        let mut x_next = &plant.a * &x + &plant.b * (&u + &wk);
        if let Some(d) = delta {
            x_next += to_dvec(&d[k], n, "delta sample")?;
        }

        out.states.push(x.iter().copied().collect());
        out.estimates.push(xhat.iter().copied().collect());
        out.inputs.push(u.iter().copied().collect());
        out.outputs.push(y.iter().copied().collect());
        us.push(u);
        ys.push(y);
        x = x_next;
    }
    Ok(out)
}

/// Transition matrix of the realized loop, over the joint state
/// (x, u-history, y-history). Spectral radius < 1 certifies internal stability
/// of the plant + FIR-estimator interconnection.
pub fn closed_loop_matrix(plant: &StateSpace, f: &DMatrix<f64>, obs: &ObserverPair) -> DMatrix<f64> {
    let (n, m, p) = (plant.order(), plant.inputs(), plant.outputs());
    let lag = obs.psi_u.degree().max(obs.psi_y.degree());
    let dim = n + lag * (m + p);
    let mut t = DMatrix::zeros(dim, dim);

    // u_k = F(Psi_y0 C) x + sum_j F Psi_u_j u_{k-j} + sum_j>=1 F Psi_y_j y_{k-j}
    let fu: Vec<DMatrix<f64>> = (0..=lag).map(|j| f * obs.psi_u.tap(j)).collect();
    let fy: Vec<DMatrix<f64>> = (0..=lag).map(|j| f * obs.psi_y.tap(j)).collect();
    let u_from_x = &fy[0] * &plant.c;

    let u_off = n;
    let y_off = n + lag * m;

    // x_{k+1} = A x + B u_k
    t.view_mut((0, 0), (n, n)).copy_from(&(&plant.a + &plant.b * &u_from_x));
    for j in 1..=lag {
        let bu = &plant.b * &fu[j];
        t.view_mut((0, u_off + (j - 1) * m), (n, m)).copy_from(&bu);
        let by = &plant.b * &fy[j];
        t.view_mut((0, y_off + (j - 1) * p), (n, p)).copy_from(&by);
    }

    // newest history entries: u_k and y_k = C x_k
    t.view_mut((u_off, 0), (m, n)).copy_from(&u_from_x);
    for j in 1..=lag {
        t.view_mut((u_off, u_off + (j - 1) * m), (m, m)).copy_from(&fu[j]);
        t.view_mut((u_off, y_off + (j - 1) * p), (m, p)).copy_from(&fy[j]);
    }
    t.view_mut((y_off, 0), (p, n)).copy_from(&plant.c);

    // shift registers
    for j in 1..lag {
        t.view_mut((u_off + j * m, u_off + (j - 1) * m), (m, m))
            .copy_from(&DMatrix::identity(m, m));
        t.view_mut((y_off + j * p, y_off + (j - 1) * p), (p, p))
            .copy_from(&DMatrix::identity(p, p));
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dcf::{build_dcf, GainPair};
    use crate::observer::observer_from_s;
    use lti_core::presets;
    use lti_core::FirSystem;

    #[test]
    fn zero_noise_stays_at_zero() {
        let p = presets::worked_scalar();
        let dcf = build_dcf(&p.sys, &GainPair::new(p.f.clone(), p.l)).unwrap();
        let obs = observer_from_s(&dcf, &FirSystem::zeros(1, 1, 0)).unwrap();
        let zeros = vec![vec![0.0]; 20];
        let sim = simulate_observer_loop(&dcf.plant, &p.f, &obs, &zeros, &zeros, None).unwrap();
        assert!(sim.states.iter().all(|x| x[0] == 0.0));
        assert!(sim.inputs.iter().all(|u| u[0] == 0.0));
    }

    #[test]
    fn improper_plant_is_rejected() {
        let plant = lti_core::StateSpace::scalar(0.5, 1.0, 1.0, 1.0);
        let obs = ObserverPair {
            psi_u: FirSystem::zeros(1, 1, 2),
            psi_y: FirSystem::zeros(1, 1, 2),
        };
        let zeros = vec![vec![0.0]; 4];
        assert!(simulate_observer_loop(
            &plant,
            &nalgebra::dmatrix![0.0],
            &obs,
            &zeros,
            &zeros,
            None
        )
        .is_err());
    }

    #[test]
    fn loop_matrix_radius_below_one_for_central_observer() {
        let p = presets::worked_scalar();
        let dcf = build_dcf(&p.sys, &GainPair::new(p.f.clone(), p.l)).unwrap();
        let obs = observer_from_s(&dcf, &FirSystem::zeros(1, 1, 0)).unwrap();
        let t = closed_loop_matrix(&dcf.plant, &p.f, &obs);
        let radius = lti_core::spectral_radius(&t).unwrap();
        assert!(radius < 1.0, "radius = {radius}");
    }
}
