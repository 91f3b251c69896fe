//! H2 and H-infinity norms for state-space and FIR representations.
//!
//! H2: FIR path sums squared Frobenius norms of the taps; state-space path uses
//! the observability Gramian of a stable, strictly proper realization,
//! `||G||_H2^2 = trace(B^T W_o B)` with `A^T W_o A - W_o + C^T C = 0`.
//!
//! H-infinity: `sup_w sigma_max(G(e^{iw}))` by a dense frequency grid followed by
//! golden-section refinement around the best grid cell.

use crate::fir::FirSystem;
use crate::lyap::dlyap;
use crate::ss::StateSpace;
use crate::{LtiError, Result};
use nalgebra::{Complex, DMatrix};

/// Relative accuracy target of the grid + refinement H-infinity search.
pub const HINF_DEFAULT_TOL: f64 = 1e-6;

/// Base grid resolution for the H-infinity search.
pub const HINF_GRID_POINTS: usize = 2048;

/// H2 norm of an FIR system: sqrt of total squared tap energy.
pub fn h2_norm_fir(f: &FirSystem) -> f64 {
    f.taps().iter().map(|t| t.norm_squared()).sum::<f64>().sqrt()
}

/// H2 norm of a stable, strictly proper state-space system via the observability Gramian.
pub fn h2_norm_ss(sys: &StateSpace) -> Result<f64> {
    let radius = sys.spectral_radius();
    if radius >= 1.0 {
        return Err(LtiError::Unstable { radius });
    }
    if sys.d.norm() != 0.0 {
        return Err(LtiError::InvalidArg(
            "h2_norm_ss requires a strictly proper system (D = 0)".into(),
        ));
    }
    let q = sys.c.transpose() * &sys.c;
    let w_o = dlyap(&sys.a, &q)?;
    let m = sys.b.transpose() * w_o * &sys.b;
    Ok(m.trace().max(0.0).sqrt())
}

fn sigma_max(g: &DMatrix<Complex<f64>>) -> f64 {
    g.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .fold(0.0, f64::max)
}

/// Shared grid + golden-section search driver over `omega in [0, pi]`.
///
/// Real-coefficient systems have conjugate-symmetric frequency responses, so the
/// upper half circle suffices.
fn hinf_search(eval: &dyn Fn(f64) -> Result<f64>, tol: f64) -> Result<f64> {
    let n = HINF_GRID_POINTS;
    let mut best = 0.0_f64;
    let mut best_idx = 0usize;
    let step = std::f64::consts::PI / (n as f64 - 1.0);
    let mut values = Vec::with_capacity(n);
    for k in 0..n {
        let v = eval(k as f64 * step)?;
        if v > best {
            best = v;
            best_idx = k;
        }
        values.push(v);
    }
    // golden-section refinement inside the bracket around the best grid point
    let lo = if best_idx == 0 { 0.0 } else { (best_idx - 1) as f64 * step };
    let hi = if best_idx + 1 >= n {
        std::f64::consts::PI
    } else {
        (best_idx + 1) as f64 * step
    };
    let phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let mut f1 = eval(x1)?;
    let mut f2 = eval(x2)?;
    for _ in 0..200 {
        if (b - a) < tol * (1.0 + best) {
            break;
        }
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = eval(x2)?;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = eval(x1)?;
        }
        best = best.max(f1.max(f2));
    }
    Ok(best)
}

/// H-infinity norm of an FIR system.
pub fn hinf_norm_fir(f: &FirSystem, tol: f64) -> f64 {
    let eval = |w: f64| -> Result<f64> { Ok(sigma_max(&f.eval(w))) };
    hinf_search(&eval, tol).expect("FIR frequency response is always defined")
}

/// H-infinity norm of a stable state-space system.
pub fn hinf_norm_ss(sys: &StateSpace, tol: f64) -> Result<f64> {
    let radius = sys.spectral_radius();
    if radius >= 1.0 {
        return Err(LtiError::Unstable { radius });
    }
    let eval = |w: f64| -> Result<f64> {
        let z = Complex::from_polar(1.0, w);
        Ok(sigma_max(&sys.eval(z)?))
    };
    hinf_search(&eval, tol)
}
