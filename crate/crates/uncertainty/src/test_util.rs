//! Shared fixtures for in-crate tests.

use crate::set::UncertaintySet;
use coprime::{build_dcf, Dcf, GainPair};
use lti_core::{presets, FirSystem, StateSpace};
use nalgebra::DMatrix;
use rand::Rng;

pub(crate) fn worked_dcf() -> Dcf {
    let p = presets::worked_scalar();
    build_dcf(&p.sys, &GainPair::new(p.f, p.l)).unwrap()
}

pub(crate) fn worked_set(gamma: f64) -> UncertaintySet {
    UncertaintySet::new(gamma, worked_dcf()).unwrap()
}

/// Rejection-sampled random plant with stabilizing F and L.
pub(crate) fn random_dcf(rng: &mut impl Rng, n: usize, m: usize, p: usize) -> Dcf {
    loop {
        let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-0.6..0.6));
        let b = DMatrix::from_fn(n, m, |_, _| rng.random_range(-1.0..1.0));
        let c = DMatrix::from_fn(p, n, |_, _| rng.random_range(-1.0..1.0));
        let d = DMatrix::zeros(p, m);
        let Ok(plant) = StateSpace::new(a, b, c, d) else {
            continue;
        };
        let f = DMatrix::from_fn(m, n, |_, _| rng.random_range(-0.3..0.3));
        let l = DMatrix::from_fn(n, p, |_, _| rng.random_range(-0.3..0.3));
        if let Ok(dcf) = build_dcf(&plant, &GainPair::new(f, l)) {
            return dcf;
        }
    }
}

pub(crate) fn random_q(rng: &mut impl Rng, dcf: &Dcf, degree: usize, scale: f64) -> FirSystem {
    let taps = (0..=degree)
        .map(|_| {
            DMatrix::from_fn(dcf.m_inputs(), dcf.p_outputs(), |_, _| {
                rng.random_range(-scale..scale)
            })
        })
        .collect();
    FirSystem::from_taps(taps).unwrap()
}
