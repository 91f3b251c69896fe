//! Named example systems used by tests, the CLI demo, and the sweep defaults.

use crate::ss::StateSpace;
use nalgebra::{dmatrix, DMatrix};

/// A plant together with stabilizing state-feedback and observer gains.
#[derive(Debug, Clone)]
pub struct PlantPreset {
    /// Plant realization.
    pub sys: StateSpace,
    /// State-feedback gain F, so `A + B F` is stable.
    pub f: DMatrix<f64>,
    /// Observer gain L, so `A - L C` is stable.
    pub l: DMatrix<f64>,
}

impl PlantPreset {
    /// Spectral radii of (A + BF, A - LC).
    pub fn loop_radii(&self) -> (f64, f64) {
        let af = &self.sys.a + &self.sys.b * &self.f;
        let al = &self.sys.a - &self.l * &self.sys.c;
        (
            crate::spectral_radius(&af).expect("A+BF is square"),
            crate::spectral_radius(&al).expect("A-LC is square"),
        )
    }
}

/// Unstable scalar plant `x+ = 2x + u`, `y = x`, with both loops placed at 0.5.
///
/// Deadbeat-adjacent gains F = -1.5, L = 1.5 make every coprime factor a
/// first-order transfer function with pole 0.5, which keeps hand computation
/// short; this is the example threaded through the test suites.
pub fn worked_scalar() -> PlantPreset {
    PlantPreset {
        sys: StateSpace::scalar(2.0, 1.0, 1.0, 0.0),
        f: dmatrix![-1.5],
        l: dmatrix![1.5],
    }
}

/// Stable scalar plant used as the sweep default.
///
/// The open loop `x+ = 0.8x + u` is mildly contractive, which keeps the
/// coprime-factor constants small enough that the robust synthesis responds to
/// the uncertainty radius instead of pinning the design at the nominal
/// observer.
pub fn sweep_scalar() -> PlantPreset {
    let sys = StateSpace::scalar(0.8, 1.0, 1.0, 0.0);
    let sol = crate::lyap::dare(&sys.a, &sys.b, &dmatrix![1.0], &dmatrix![1.0])
        .expect("scalar dare converges");
    PlantPreset { sys, f: sol.f_opt, l: dmatrix![0.5] }
}

/// Look a preset up by name.
pub fn by_name(name: &str) -> Option<PlantPreset> {
    match name {
        "worked-scalar" => Some(worked_scalar()),
        "sweep-scalar" => Some(sweep_scalar()),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn worked_scalar_loop_poles() {
        let p = worked_scalar();
        let (rf, rl) = p.loop_radii();
        assert_relative_eq!(rf, 0.5, epsilon = 1e-12);
        assert_relative_eq!(rl, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn sweep_scalar_is_stabilized() {
        let p = sweep_scalar();
        assert!(p.sys.is_stable());
        let (rf, rl) = p.loop_radii();
        assert!(rf < 1.0);
        assert!(rl < 1.0);
    }

    #[test]
    fn lookup_by_name() {
        assert!(by_name("worked-scalar").is_some());
        assert!(by_name("sweep-scalar").is_some());
        assert!(by_name("unknown").is_none());
    }
}
