//! Discrete Lyapunov and Riccati equation solvers.
//!
//! `dlyap` solves `A^T X A - X + Q = 0` by doubling the fixed-point iteration
//! `X = sum_k (A^T)^k Q A^k`. `dare` solves the discrete algebraic Riccati
//! equation by direct iteration and returns the stationary solution together
//! with the optimal state-feedback gain.

use crate::{LtiError, Result};
use nalgebra::DMatrix;

const DLYAP_RESIDUAL_TOL: f64 = 1e-10;
const DARE_RESIDUAL_TOL: f64 = 1e-8;
const MAX_ITERS: usize = 10_000;

/// Solve `A^T X A - X + Q = 0` for stable `A` by squaring-based summation.
pub fn dlyap(a: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(LtiError::NonSquare { rows: a.nrows(), cols: a.ncols() });
    }
    if q.nrows() != n || q.ncols() != n {
        return Err(LtiError::DimensionMismatch {
            context: "dlyap Q",
            left: format!("{n}x{n}"),
            right: format!("{}x{}", q.nrows(), q.ncols()),
        });
    }
    let radius = crate::spectral_radius(a)?;
    if radius >= 1.0 {
        return Err(LtiError::Unstable { radius });
    }
    // X_{k+1} = X_k + A_k^T X_k A_k, A_{k+1} = A_k^2 sums the series with
    // doubling: after j steps X_j = sum_{i < 2^j} (A^T)^i Q A^i.
    let mut x = q.clone();
    let mut ak = a.clone();
    for _ in 0..200 {
        let update = ak.transpose() * &x * &ak;
        let delta = update.norm();
        x += update;
        ak = &ak * &ak;
        if delta <= 1e-16 * (1.0 + x.norm()) {
            break;
        }
    }
    let residual = (a.transpose() * &x * a - &x + q).norm();
    if residual > DLYAP_RESIDUAL_TOL * (1.0 + x.norm()) {
        return Err(LtiError::NotConverged("dlyap residual above tolerance"));
    }
    Ok(x)
}

/// Solution of a discrete algebraic Riccati equation.
#[derive(Debug, Clone)]
pub struct DareSolution {
    /// Stabilizing solution S of the Riccati fixed point.
    pub s: DMatrix<f64>,
    /// Optimal feedback gain, `u = F x` with `F = -(R + B^T S B)^{-1} B^T S A`.
    pub f_opt: DMatrix<f64>,
    /// Spectral radius of the closed loop `A + B F`.
    pub closed_loop_radius: f64,
}

/// Solve `S = A^T S A - A^T S B (R + B^T S B)^{-1} B^T S A + Q` by iteration.
pub fn dare(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    q: &DMatrix<f64>,
    r: &DMatrix<f64>,
) -> Result<DareSolution> {
    let n = a.nrows();
    let m = b.ncols();
    if a.ncols() != n {
        return Err(LtiError::NonSquare { rows: a.nrows(), cols: a.ncols() });
    }
    if b.nrows() != n {
        return Err(LtiError::DimensionMismatch {
            context: "dare B rows",
            left: n.to_string(),
            right: b.nrows().to_string(),
        });
    }
    if q.nrows() != n || q.ncols() != n {
        return Err(LtiError::DimensionMismatch {
            context: "dare Q",
            left: format!("{n}x{n}"),
            right: format!("{}x{}", q.nrows(), q.ncols()),
        });
    }
    if r.nrows() != m || r.ncols() != m {
        return Err(LtiError::DimensionMismatch {
            context: "dare R",
            left: format!("{m}x{m}"),
            right: format!("{}x{}", r.nrows(), r.ncols()),
        });
    }

    let mut s = q.clone();
    let mut converged = false;
    for _ in 0..MAX_ITERS {
        let btsb = r + b.transpose() * &s * b;
        let inv = btsb
            .clone()
            .try_inverse()
            .ok_or(LtiError::Singular("dare: R + B^T S B is singular"))?;
        let next = a.transpose() * &s * a
            - a.transpose() * &s * b * &inv * b.transpose() * &s * a
            + q;
        let delta = (&next - &s).norm();
        s = next;
        if delta <= 1e-13 * (1.0 + s.norm()) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(LtiError::NotConverged("dare iteration did not converge"));
    }

    let btsb = r + b.transpose() * &s * b;
    let inv = btsb
        .try_inverse()
        .ok_or(LtiError::Singular("dare: R + B^T S B is singular"))?;
    let f_opt = -(&inv * b.transpose() * &s * a);
    let closed = a + b * &f_opt;
    let closed_loop_radius = crate::spectral_radius(&closed)?;

    let residual = (a.transpose() * &s * a
        - a.transpose() * &s * b * inv * b.transpose() * &s * a
        + q
        - &s)
        .norm();
    if residual > DARE_RESIDUAL_TOL * (1.0 + s.norm()) {
        return Err(LtiError::NotConverged("dare residual above tolerance"));
    }
    if closed_loop_radius >= 1.0 {
        return Err(LtiError::Unstable { radius: closed_loop_radius });
    }
    Ok(DareSolution { s, f_opt, closed_loop_radius })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::dmatrix;

    #[test]
    fn dlyap_scalar_geometric() {
        // x = sum 0.25^k = 4/3 for a = 0.5, q = 1
        let x = dlyap(&dmatrix![0.5], &dmatrix![1.0]).unwrap();
        assert_relative_eq!(x[(0, 0)], 4.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn dlyap_matrix_residual() {
        let a = dmatrix![0.4, 0.3; -0.2, 0.5];
        let q = dmatrix![1.0, 0.1; 0.1, 2.0];
        let x = dlyap(&a, &q).unwrap();
        let residual = (a.transpose() * &x * &a - &x + &q).norm();
        assert!(residual < 1e-10);
    }

    #[test]
    fn dlyap_rejects_unstable() {
        assert!(dlyap(&dmatrix![1.0], &dmatrix![1.0]).is_err());
        assert!(dlyap(&dmatrix![2.0], &dmatrix![1.0]).is_err());
    }

    #[test]
    fn dare_scalar_worked_values() {
        // a=2, b=1, q=r=1: s = 2 + sqrt(5), f = -(1+sqrt(5))/2, loop radius (3-sqrt(5))/2
        let sol = dare(&dmatrix![2.0], &dmatrix![1.0], &dmatrix![1.0], &dmatrix![1.0]).unwrap();
        let root5 = 5.0_f64.sqrt();
        assert_relative_eq!(sol.s[(0, 0)], 2.0 + root5, epsilon = 1e-9);
        assert_relative_eq!(sol.f_opt[(0, 0)], -(1.0 + root5) / 2.0, epsilon = 1e-9);
        assert_relative_eq!(sol.closed_loop_radius, (3.0 - root5) / 2.0, epsilon = 1e-9);
    }

    #[test]
    fn dare_zero_dynamics() {
        // a=0 means no control is ever useful: s = q, f = 0
        let sol = dare(&dmatrix![0.0], &dmatrix![1.0], &dmatrix![1.0], &dmatrix![1.0]).unwrap();
        assert_relative_eq!(sol.s[(0, 0)], 1.0, epsilon = 1e-12);
        assert_relative_eq!(sol.f_opt[(0, 0)], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn dare_matrix_case_stabilizes() {
        let a = dmatrix![1.2, 0.4; 0.0, 0.9];
        let b = dmatrix![1.0; 0.5];
        let q = DMatrix::identity(2, 2);
        let r = dmatrix![1.0];
        let sol = dare(&a, &b, &q, &r).unwrap();
        assert!(sol.closed_loop_radius < 1.0);
        // S must be symmetric positive semidefinite
        assert_relative_eq!((&sol.s - sol.s.transpose()).norm(), 0.0, epsilon = 1e-9);
        let eigs = sol.s.clone().symmetric_eigen().eigenvalues;
        assert!(eigs.iter().all(|&e| e > -1e-10));
    }
}
