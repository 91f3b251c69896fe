//! Closed-loop checks: simulated estimation-error trajectories against the
//! claimed error maps, and internal stability of realized controllers.

use approx::assert_relative_eq;
use coprime::{
    build_dcf_with_len, closed_loop_matrix, estimation_error_maps, observer_from_q,
    observer_from_s, simulate_observer_loop, CoprimeError, Dcf, GainPair,
};
use lti_core::{presets, FirSystem, StateSpace};
use nalgebra::DMatrix;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const LEN: usize = 64;
const HORIZON: usize = 50;

fn worked(len: usize) -> Dcf {
    let p = presets::worked_scalar();
    build_dcf_with_len(&p.sys, &GainPair::new(p.f, p.l), len).unwrap()
}

fn random_dcf(rng: &mut StdRng, n: usize, m: usize, p: usize, len: usize) -> Dcf {
    loop {
        let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-0.6..0.6));
        let b = DMatrix::from_fn(n, m, |_, _| rng.random_range(-1.0..1.0));
        let c = DMatrix::from_fn(p, n, |_, _| rng.random_range(-1.0..1.0));
        let plant = StateSpace::new(a, b, c, DMatrix::zeros(p, m)).unwrap();
        let f = DMatrix::from_fn(m, n, |_, _| rng.random_range(-0.3..0.3));
        let l = DMatrix::from_fn(n, p, |_, _| rng.random_range(-0.3..0.3));
        if let Ok(dcf) = build_dcf_with_len(&plant, &GainPair::new(f, l), len) {
            return dcf;
        }
    }
}

fn random_fir(rng: &mut StdRng, rows: usize, cols: usize, degree: usize) -> FirSystem {
    FirSystem::from_taps(
        (0..=degree)
            .map(|_| DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-0.5..0.5)))
            .collect(),
    )
    .unwrap()
}

/// Impulse in one channel of w (or nu): the simulated estimation error must
/// reproduce the corresponding column of the claimed error map, tap by tap.
fn check_error_maps(dcf: &Dcf, s: &FirSystem) {
    let (n, m, p) = (dcf.order(), dcf.m_inputs(), dcf.p_outputs());
    let obs = observer_from_s(dcf, s).unwrap();
    let (map_w, map_nu) = estimation_error_maps(dcf, s).unwrap();

    for ch in 0..m {
        let mut w = vec![vec![0.0; m]; HORIZON];
        w[0][ch] = 1.0;
        let nu = vec![vec![0.0; p]; HORIZON];
        let sim = simulate_observer_loop(&dcf.plant, &dcf.gains.f, &obs, &w, &nu, None).unwrap();
        for k in 0..HORIZON {
            let tap = map_w.tap(k);
            for i in 0..n {
                let err = sim.states[k][i] - sim.estimates[k][i];
                assert_relative_eq!(err, tap[(i, ch)], epsilon = 1e-6);
            }
        }
    }

    for ch in 0..p {
        let w = vec![vec![0.0; m]; HORIZON];
        let mut nu = vec![vec![0.0; p]; HORIZON];
        nu[0][ch] = 1.0;
        let sim = simulate_observer_loop(&dcf.plant, &dcf.gains.f, &obs, &w, &nu, None).unwrap();
        for k in 0..HORIZON {
            let tap = map_nu.tap(k);
            for i in 0..n {
                let err = sim.states[k][i] - sim.estimates[k][i];
                assert_relative_eq!(err, tap[(i, ch)], epsilon = 1e-6);
            }
        }
    }
}

#[test]
fn error_maps_match_simulation_scalar() {
    let dcf = worked(LEN);
    let mut rng = StdRng::seed_from_u64(101);
    check_error_maps(&dcf, &FirSystem::zeros(1, 1, 0));
    check_error_maps(&dcf, &random_fir(&mut rng, 1, 1, 10));
}

#[test]
fn error_maps_match_simulation_mimo() {
    let mut rng = StdRng::seed_from_u64(103);
    let dcf = random_dcf(&mut rng, 3, 2, 2, LEN);
    let s = random_fir(&mut rng, 3, 2, 10);
    check_error_maps(&dcf, &s);
}

#[test]
fn state_disturbance_leaves_loop_bounded() {
    // delta enters outside the w/nu channels; the loop must still be stable
    let dcf = worked(LEN);
    let obs = observer_from_s(&dcf, &FirSystem::zeros(1, 1, 0)).unwrap();
    let w = vec![vec![0.0]; 200];
    let nu = vec![vec![0.0]; 200];
    let mut delta = vec![vec![0.0]; 200];
    delta[0][0] = 1.0;
    let sim =
        simulate_observer_loop(&dcf.plant, &dcf.gains.f, &obs, &w, &nu, Some(&delta)).unwrap();
    let peak = sim.states.iter().map(|x| x[0].abs()).fold(0.0, f64::max);
    assert!(peak < 1e3);
    assert!(sim.states[199][0].abs() < 1e-6);
}

#[test]
fn q_parameterized_controllers_internally_stabilize() {
    let mut rng = StdRng::seed_from_u64(107);

    // scalar worked case with several random FIR parameters
    let dcf = worked(32);
    for _ in 0..3 {
        let q = random_fir(&mut rng, 1, 1, 6);
        let obs = observer_from_q(&dcf, &q).unwrap();
        let t = closed_loop_matrix(&dcf.plant, &dcf.gains.f, &obs);
        let radius = lti_core::spectral_radius(&t).unwrap();
        assert!(radius < 1.0, "loop radius {radius} for a stable Q");
    }

    // MIMO case; skip draws where F is not onto (no S realizes that Q)
    let dcf = random_dcf(&mut rng, 3, 2, 2, 32);
    for _ in 0..3 {
        let q = random_fir(&mut rng, 2, 2, 4);
        let obs = match observer_from_q(&dcf, &q) {
            Ok(o) => o,
            Err(CoprimeError::BijectionFailed { .. }) => continue,
            Err(e) => panic!("unexpected error: {e}"),
        };
        let t = closed_loop_matrix(&dcf.plant, &dcf.gains.f, &obs);
        let radius = lti_core::spectral_radius(&t).unwrap();
        assert!(radius < 1.0, "loop radius {radius} for a stable Q");
    }
}

#[test]
fn noise_driven_loop_stays_bounded() {
    let mut rng = StdRng::seed_from_u64(109);
    let dcf = worked(32);
    let q = random_fir(&mut rng, 1, 1, 6);
    let obs = observer_from_q(&dcf, &q).unwrap();
    let horizon = 500;
    let w: Vec<Vec<f64>> = (0..horizon).map(|_| vec![rng.random_range(-1.0..1.0)]).collect();
    let nu: Vec<Vec<f64>> = (0..horizon).map(|_| vec![rng.random_range(-0.1..0.1)]).collect();
    let sim = simulate_observer_loop(&dcf.plant, &dcf.gains.f, &obs, &w, &nu, None).unwrap();
    let peak = sim.states.iter().map(|x| x[0].abs()).fold(0.0, f64::max);
    assert!(peak < 100.0, "state peak {peak}");
}
