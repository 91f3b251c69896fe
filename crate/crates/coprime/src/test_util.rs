//! Shared helpers for unit tests.

use crate::dcf::{build_dcf, Dcf, GainPair};
use lti_core::StateSpace;
use nalgebra::DMatrix;
use rand::rngs::StdRng;
use rand::Rng;

/// Random strictly proper plant with rejection-sampled stabilizing gains.
pub(crate) fn random_dcf(rng: &mut StdRng, n: usize, m: usize, p: usize) -> Dcf {
    loop {
        let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-0.6..0.6));
        let b = DMatrix::from_fn(n, m, |_, _| rng.random_range(-1.0..1.0));
        let c = DMatrix::from_fn(p, n, |_, _| rng.random_range(-1.0..1.0));
        let d = DMatrix::zeros(p, m);
        let plant = match StateSpace::new(a, b, c, d) {
            Ok(s) => s,
            Err(_) => continue,
        };
        let f = DMatrix::from_fn(m, n, |_, _| rng.random_range(-0.3..0.3));
        let l = DMatrix::from_fn(n, p, |_, _| rng.random_range(-0.3..0.3));
        if let Ok(dcf) = build_dcf(&plant, &GainPair::new(f, l)) {
            return dcf;
        }
    }
}

/// Random FIR parameter with the given shape and tap degree.
pub(crate) fn random_fir(
    rng: &mut StdRng,
    rows: usize,
    cols: usize,
    degree: usize,
) -> lti_core::FirSystem {
    let taps = (0..=degree)
        .map(|_| DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-0.5..0.5)))
        .collect();
    lti_core::FirSystem::from_taps(taps).unwrap()
}
