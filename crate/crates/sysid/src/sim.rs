//! Closed-loop simulation with the factor-based controller.
//!
//! The loop follows the standard unity-feedback layout: the controller sees
//! eta = r - y and produces u_c, the plant input is u = u_c + w, the state
//! picks up an additive disturbance delta and the measurement an additive
//! noise nu,
//!
//!   x+ = A x + B (u_c + w) + delta,      y = C x + nu.
//!
//! The controller K_Q = (Y - Q N~)^-1 (X + Q M~) is realized exactly in state
//! space: with A_L = A - L C and B_L = B - L D of the nominal model,
//!
//!   xi+ = A_L xi + B_L u_c - L eta,
//!   s   = C xi + D u_c + eta            (equals N~ u_c + M~ eta),
//!   u_c = F xi + (Q * s),
//!
//! so no FIR truncation of the controller enters the loop. Trajectories are
//! reproducible bit-for-bit from (config, seed).

use crate::{Result, SysidError};
use coprime::Dcf;
use lti_core::noise::gaussian_series;
use lti_core::{FirSystem, NoiseConfig, StateSpace};
use nalgebra::{DMatrix, DVector};

/// Guard against divergent loops: simulation aborts past this state norm.
const STATE_OVERFLOW: f64 = 1e9;

/// Signals recorded from one closed-loop run.
///
/// `u` is the realized plant input (controller output plus the input
/// disturbance `w`), the signal the coprime-factor filters consume; `r`, `w`,
/// `nu`, `delta` are the exogenous draws that produced the run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub u: Vec<Vec<f64>>,
    pub y: Vec<Vec<f64>>,
    pub r: Vec<Vec<f64>>,
    pub w: Vec<Vec<f64>>,
    pub nu: Vec<Vec<f64>>,
    pub delta: Vec<Vec<f64>>,
    pub seed: u64,
}

impl Trajectory {
    /// Number of recorded samples.
    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }
}

fn to_dvec(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}

/// Simulate the plant in feedback with the nominal factor controller.
///
/// `plant` is the (possibly perturbed) system actually in the loop while the
/// controller is built from the `nominal` factorization; `q` shifts the
/// controller to K_Q, `None` meaning the central controller. The plant must
/// be strictly proper (D = 0) so the step recursion y -> u_c -> x+ is causal.
pub fn simulate_closed_loop(
    plant: &StateSpace,
    nominal: &Dcf,
    q: Option<&FirSystem>,
    noise: &NoiseConfig,
    t_len: usize,
) -> Result<Trajectory> {
    let m = nominal.m_inputs();
    let p = nominal.p_outputs();
    if plant.inputs() != m || plant.outputs() != p {
        return Err(SysidError::Dimension {
            context: "simulate_closed_loop plant",
            expected: format!("{p}x{m} plant"),
            got: format!("{}x{}", plant.outputs(), plant.inputs()),
        });
    }
    if plant.d.norm() != 0.0 {
        return Err(SysidError::InvalidArg(
            "simulate_closed_loop requires a strictly proper plant (D = 0)".into(),
        ));
    }
    if let Some(q) = q {
        if q.rows() != m || q.cols() != p {
            return Err(SysidError::Dimension {
                context: "simulate_closed_loop q",
                expected: format!("{m}x{p} parameter"),
                got: format!("{}x{}", q.rows(), q.cols()),
            });
        }
    }

    let (f, l) = (&nominal.gains.f, &nominal.gains.l);
    let nom = &nominal.plant;
    let a_l = &nom.a - l * &nom.c;
    let b_l = &nom.b - l * &nom.d;
    // Algebraic loop u_c -> s -> u_c through Q_0 D of the nominal model.
    let loop_gain = q.map(|q| {
        let gain = DMatrix::identity(m, m) - q.tap(0) * &nom.d;
        gain.lu()
    });

    let mut rng_r = noise.rng_for_stream(0);
    let mut rng_w = noise.rng_for_stream(1);
    let mut rng_nu = noise.rng_for_stream(2);
    let mut rng_delta = noise.rng_for_stream(3);
    let r = gaussian_series(&mut rng_r, noise.sigma_r, p, t_len);
    let w = gaussian_series(&mut rng_w, noise.sigma_w, m, t_len);
    let nu = gaussian_series(&mut rng_nu, noise.sigma_nu, p, t_len);
    let delta = gaussian_series(&mut rng_delta, noise.sigma_delta, plant.order(), t_len);

    let mut x = DVector::<f64>::zeros(plant.order());
    let mut xi = DVector::<f64>::zeros(nom.order());
    let mut s_hist: Vec<DVector<f64>> = Vec::new();
    let mut traj = Trajectory {
        u: Vec::with_capacity(t_len),
        y: Vec::with_capacity(t_len),
        r,
        w,
        nu,
        delta,
        seed: noise.seed,
    };

    for t in 0..t_len {
        let y = &plant.c * &x + to_dvec(&traj.nu[t]);
        let eta = to_dvec(&traj.r[t]) - &y;

        let mut u_c = f * &xi;
        if let Some(q) = q {
            let free = &nom.c * &xi + &eta;
            u_c += q.tap(0) * &free;
            for j in 1..=q.degree().min(t) {
                u_c += q.tap(j) * &s_hist[t - j];
            }
            loop_gain
                .as_ref()
                .expect("factorized with q")
                .solve_mut(&mut u_c);
            s_hist.push(free + &nom.d * &u_c);
        }
        let u = &u_c + to_dvec(&traj.w[t]);

        let x_next = &plant.a * &x + &plant.b * &u + to_dvec(&traj.delta[t]);
        let xi_next = &a_l * &xi + &b_l * &u_c - l * &eta;

        traj.u.push(u.iter().copied().collect());
        traj.y.push(y.iter().copied().collect());
        x = x_next;
        xi = xi_next;

        let norm = x.amax().max(xi.amax());
        if !norm.is_finite() || norm > STATE_OVERFLOW {
            return Err(SysidError::Unstable { step: t, norm });
        }
    }
    Ok(traj)
}

/// Realize the plant indexed by a stable FIR parameter `r_par` against the
/// nominal factorization: G_R = (N + Y~ R)(M - X~ R)^-1.
///
/// The factors share observer/feedback state, which collapses the
/// interconnection to an explicit realization of order n + deg(R) * m:
/// internally e1 = u - F xi, e2 = R e1, with xi+ = A_F xi + B e1 + L e2,
/// y = C_F xi + D e1 + e2. Every plant returned here is stabilized by the
/// nominal central controller.
pub fn plant_with_dual_youla(nominal: &Dcf, r_par: &FirSystem) -> Result<StateSpace> {
    let m = nominal.m_inputs();
    let p = nominal.p_outputs();
    if r_par.rows() != p || r_par.cols() != m {
        return Err(SysidError::Dimension {
            context: "plant_with_dual_youla",
            expected: format!("{p}x{m} parameter"),
            got: format!("{}x{}", r_par.rows(), r_par.cols()),
        });
    }
    let nom = &nominal.plant;
    let (f, l) = (&nominal.gains.f, &nominal.gains.l);
    let n = nom.order();
    let k = r_par.degree();
    let dim = n + k * m;

    let r0 = r_par.tap(0).clone();
    let mut a = DMatrix::<f64>::zeros(dim, dim);
    let mut b = DMatrix::<f64>::zeros(dim, m);
    let mut c = DMatrix::<f64>::zeros(p, dim);

    a.view_mut((0, 0), (n, n)).copy_from(&(&nom.a - l * &r0 * f));
    b.view_mut((0, 0), (n, m)).copy_from(&(&nom.b + l * &r0));
    c.view_mut((0, 0), (p, n)).copy_from(&(&nom.c - &r0 * f));
    for j in 1..=k {
        let col = n + (j - 1) * m;
        a.view_mut((0, col), (n, m)).copy_from(&(l * r_par.tap(j)));
        c.view_mut((0, col), (p, m)).copy_from(&r_par.tap(j));
    }
    if k >= 1 {
        a.view_mut((n, 0), (m, n)).copy_from(&(-f));
        b.view_mut((n, 0), (m, m))
            .copy_from(&DMatrix::identity(m, m));
        for j in 1..k {
            a.view_mut((n + j * m, n + (j - 1) * m), (m, m))
                .copy_from(&DMatrix::identity(m, m));
        }
    }
    let d = &nom.d + r0;
    StateSpace::new(a, b, c, d).map_err(SysidError::from)
}
