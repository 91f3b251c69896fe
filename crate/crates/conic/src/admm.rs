//! ADMM operator-splitting solver for the standard-form conic program.
//!
//! Splitting on `min c^T x + I_K(s) s.t. Ax + s = b` with scaled dual `u`
//! (so the dual vector is `y = rho u`):
//!
//! ```text
//!   x^{k+1} = argmin  c^T x + (rho/2)||Ax + s^k - b + u^k||^2 + (sigma/2)||x - x^k||^2
//!   h^{k+1} = relax * A x^{k+1} + (1 - relax) * (b - s^k)
//!   s^{k+1} = Pi_K(b - h^{k+1} - u^k)
//!   u^{k+1} = u^k + h^{k+1} + s^{k+1} - b
//! ```
//!
//! `relax = 1` recovers plain ADMM; values around 1.6 over-relax the update
//! and speed up the linear convergence phase. The x-step solves the cached
//! SPD system `(sigma I + rho A^T A)`. By the Moreau decomposition the dual
//! iterate stays in K* with `<y, s> = 0` at every iteration (relaxed or not,
//! since u^{k+1} = Pi_K(v) - v for v = b - h - u), so convergence is governed
//! by the primal residual `||Ax + s - b||` and the dual residual
//! `||c + A^T y||`; both must fall below `tol` (absolute, infinity norm) for
//! an `Optimal` status.
//!
//! Primal infeasibility is certified Farkas-style from the drift direction of
//! the dual iterate: a `v` in K* with `A^T v ~ 0` and `b^T v < 0` proves the
//! constraints are inconsistent. Iteration order is deterministic; the step
//! size rho is rebalanced from the residual ratio every `balance_interval`
//! iterations (the dual vector is rescaled so `y = rho u` stays continuous).

use crate::cones::{project_cone, project_dual_cone};
use crate::program::ConicProgram;
use crate::Result;
use nalgebra::{Cholesky, DMatrix, DVector};

/// Solver outcome classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    /// Primal and dual residuals at or below tolerance.
    Optimal,
    /// A Farkas certificate of primal infeasibility was found.
    Infeasible,
    /// Iteration budget exhausted before convergence.
    MaxIter,
}

/// Result bundle of one solve.
#[derive(Debug, Clone)]
pub struct Solution {
    /// Primal iterate x.
    pub x: DVector<f64>,
    /// Dual vector y = rho u (in K*, complementary to s).
    pub y: DVector<f64>,
    /// Slack iterate s in K.
    pub s: DVector<f64>,
    pub status: SolveStatus,
    /// ||Ax + s - b||_inf at exit.
    pub primal_residual: f64,
    /// ||c + A^T y||_inf at exit.
    pub dual_residual: f64,
    /// Primal objective c^T x.
    pub objective: f64,
    /// Dual objective -b^T y (a lower bound at exact optimality).
    pub dual_objective: f64,
    pub iterations: usize,
}

/// Tuning knobs for the ADMM loop.
#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    /// Absolute residual tolerance for the Optimal status.
    pub tol: f64,
    pub max_iter: usize,
    /// Initial ADMM step size.
    pub rho: f64,
    /// Proximal regularization on the x-step.
    pub sigma: f64,
    /// Over-relaxation factor in (0, 2); 1 is plain ADMM.
    pub relax: f64,
    /// Residual / certificate check cadence (iterations).
    pub check_interval: usize,
    /// Step-size rebalancing cadence (iterations).
    pub balance_interval: usize,
    /// Relative tolerance of the Farkas infeasibility certificate.
    pub infeas_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 20_000,
            rho: 1.0,
            sigma: 1e-6,
            relax: 1.6,
            check_interval: 25,
            balance_interval: 100,
            infeas_tol: 1e-5,
        }
    }
}

/// Solve with explicit tolerance and iteration budget, default tuning otherwise.
pub fn solve(prog: &ConicProgram, tol: f64, max_iter: usize) -> Result<Solution> {
    solve_with_options(prog, &SolveOptions { tol, max_iter, ..SolveOptions::default() })
}

fn factor(gram: &DMatrix<f64>, sigma: f64, rho: f64) -> Cholesky<f64, nalgebra::Dyn> {
    let n = gram.nrows();
    let mut kkt = gram * rho;
    for i in 0..n {
        kkt[(i, i)] += sigma;
    }
    Cholesky::new(kkt).expect("sigma I + rho A^T A is positive definite")
}

/// Full ADMM loop with explicit options.
pub fn solve_with_options(prog: &ConicProgram, opts: &SolveOptions) -> Result<Solution> {
    prog.validate()?;
    let n = prog.n_vars();
    let m = prog.n_rows();
    let a = &prog.a;
    let at = a.transpose();
    let gram = a.tr_mul(a);
    let mut rho = opts.rho;
    let mut chol = factor(&gram, opts.sigma, rho);

    // cone block offsets
    let mut blocks = Vec::with_capacity(prog.cones.len());
    let mut offset = 0;
    for cone in &prog.cones {
        blocks.push((*cone, offset, cone.dim()));
        offset += cone.dim();
    }

    let a_scale = 1.0 + prog.a.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let b_scale = 1.0 + prog.b.amax();

    let mut x = DVector::zeros(n);
    let mut s = DVector::zeros(m);
    for (cone, off, dim) in &blocks {
        let projected = project_cone(*cone, &prog.b.rows(*off, *dim).into_owned())?;
        s.rows_mut(*off, *dim).copy_from(&projected);
    }
    let mut u = DVector::<f64>::zeros(m);
    let mut u_prev_check = u.clone();

    let mut w = DVector::zeros(m);
    let mut ax = DVector::zeros(m);
    let mut h = DVector::zeros(m);
    let mut rhs = DVector::zeros(n);
    let mut aty = DVector::zeros(n);

    let mut primal_res = f64::INFINITY;
    let mut dual_res = f64::INFINITY;
    let mut status = SolveStatus::MaxIter;
    let mut iterations = opts.max_iter;

    for it in 1..=opts.max_iter {
        // x-step: (sigma I + rho A^T A) x = sigma x - c + rho A^T (b - s - u)
        w.copy_from(&prog.b);
        w -= &s;
        w -= &u;
        rhs.gemv(rho, &at, &w, 0.0);
        rhs.axpy(opts.sigma, &x, 1.0);
        rhs -= &prog.c;
        x.copy_from(&rhs);
        chol.solve_mut(&mut x);

        ax.gemv(1.0, a, &x, 0.0);

        // relaxed constraint image: h = relax * Ax + (1 - relax) * (b - s_old)
        h.copy_from(&prog.b);
        h -= &s;
        h *= 1.0 - opts.relax;
        h.axpy(opts.relax, &ax, 1.0);

        // s-step: project v = b - h - u
        w.copy_from(&prog.b);
        w -= &h;
        w -= &u;
        for (cone, off, dim) in &blocks {
            let projected = project_cone(*cone, &w.rows(*off, *dim).into_owned())?;
            s.rows_mut(*off, *dim).copy_from(&projected);
        }

        // u-step: u <- u + h + s - b, which collapses to s - v
        u.copy_from(&s);
        u -= &w;

        let checkpoint = it % opts.check_interval == 0 || it == opts.max_iter;
        if checkpoint {
            // primal residual: Ax + s - b
            w.copy_from(&ax);
            w += &s;
            w -= &prog.b;
            primal_res = w.amax();
            // dual residual: c + A^T y with y = rho u
            aty.gemv(rho, &at, &u, 0.0);
            dual_res = prog.c.iter().zip(aty.iter()).fold(0.0_f64, |acc, (c, v)| acc.max((c + v).abs()));

            if primal_res <= opts.tol && dual_res <= opts.tol {
                status = SolveStatus::Optimal;
                iterations = it;
                break;
            }

            // Farkas certificate from the dual drift direction
            let mut du = u.clone();
            du -= &u_prev_check;
            let drift = du.amax();
            if drift > 1e-12 {
                du /= drift;
                let mut cert = DVector::zeros(m);
                for (cone, off, dim) in &blocks {
                    let projected = project_dual_cone(*cone, &du.rows(*off, *dim).into_owned())?;
                    cert.rows_mut(*off, *dim).copy_from(&projected);
                }
                if cert.amax() >= 0.3 {
                    let at_cert = at.clone() * &cert;
                    let b_cert = prog.b.dot(&cert);
                    if at_cert.amax() <= opts.infeas_tol * a_scale
                        && b_cert <= -opts.infeas_tol * b_scale
                    {
                        status = SolveStatus::Infeasible;
                        iterations = it;
                        break;
                    }
                }
            }
            u_prev_check.copy_from(&u);
        }

        if it % opts.balance_interval == 0 && primal_res.is_finite() && dual_res.is_finite() {
            let ratio = primal_res / (dual_res + f64::MIN_POSITIVE);
            if !(0.1..=10.0).contains(&ratio) {
                let rho_new = (rho * ratio.sqrt()).clamp(1e-4, 1e4);
                let change = (rho_new / rho).max(rho / rho_new);
                if change >= 1.5 {
                    let rescale = rho / rho_new;
                    u *= rescale;
                    u_prev_check *= rescale;
                    rho = rho_new;
                    chol = factor(&gram, opts.sigma, rho);
                }
            }
        }
    }

    let y = &u * rho;
    Ok(Solution {
        objective: prog.c.dot(&x),
        dual_objective: -prog.b.dot(&y),
        x,
        y,
        s,
        status,
        primal_residual: primal_res,
        dual_residual: dual_res,
        iterations,
    })
}
