//! Outer search over the scalar alpha plus result packaging.
//!
//! The bound is quasi-convex in alpha: the inner optimal value is
//! non-increasing in alpha (the feasible set grows), while the 1/(1 - gamma
//! alpha) factor grows, so a modest log-spaced grid brackets the minimum well.
//! Grid cells are independent and solved in parallel; results are merged by
//! grid index so reruns are deterministic.

use crate::constants::{constants, SynthesisConstants};
use crate::inner::{assemble_inner_with, solve_inner, InnerStatus};
use crate::{Result, SynthesisError};
use conic::{SchurScaling, SolveOptions};
use coprime::Dcf;
use lti_core::{FirJson, FirSystem};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Default tap degree of the synthesized Q.
pub const DEFAULT_SYNTHESIS_FIR_LEN: usize = 16;
/// Default number of alpha grid points.
pub const DEFAULT_ALPHA_GRID_LEN: usize = 24;

/// Knobs of one synthesis run.
#[derive(Debug, Clone)]
pub struct SynthesisConfig {
    /// Uncertainty radius gamma >= 0.
    pub gamma: f64,
    /// Explicit alpha grid; empty means the default log-spaced grid.
    pub alpha_grid: Vec<f64>,
    /// Tap degree of Q and of the truncated factor stacks.
    pub fir_len: usize,
    /// Conic solver tolerance for the inner programs.
    pub solver_tol: f64,
    /// Conic solver iteration budget per inner program.
    pub solver_iters: usize,
    /// Normalization of the H-infinity LMI.
    pub scaling: SchurScaling,
}

impl SynthesisConfig {
    /// Defaults at a given uncertainty radius.
    pub fn new(gamma: f64) -> Self {
        Self {
            gamma,
            alpha_grid: Vec::new(),
            fir_len: DEFAULT_SYNTHESIS_FIR_LEN,
            solver_tol: 1e-8,
            solver_iters: 100_000,
            scaling: SchurScaling::default(),
        }
    }
}

/// One grid cell of the outer search.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlphaTrace {
    pub alpha: f64,
    /// "optimal", "infeasible", or "stalled".
    pub status: String,
    /// Inner objective (1 - gamma alpha) eps1 + lambda1 (lambda2 + gamma) eps2.
    pub inner_value: Option<f64>,
    /// inner_value / (1 - gamma alpha), the bound at this alpha.
    pub outer_value: Option<f64>,
    pub iterations: usize,
}

/// Synthesis output: the chosen Q plus the search evidence.
#[derive(Debug, Clone)]
pub struct SynthesisResult {
    pub q_star: FirSystem,
    pub alpha_star: f64,
    /// Inner objective at the winning alpha.
    pub inner_value: f64,
    /// inner_value / (1 - gamma alpha_star), the certified upper bound.
    pub bound_value: f64,
    /// ||I - M||_inf.
    pub lambda1: f64,
    /// Left-factor stack norm ||[N~ M~]||_inf, the lambda2 the objective uses.
    pub lambda2: f64,
    /// Right-factor stack norm ||[N; M]||_inf, logged for comparison.
    pub lambda2_right: f64,
    pub gamma: f64,
    pub fir_len: usize,
    pub trace: Vec<AlphaTrace>,
}

/// Serde mirror of `SynthesisResult` (FIR taps in the shared JSON shape).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthesisResultJson {
    pub q_star: FirJson,
    pub alpha_star: f64,
    pub inner_value: f64,
    pub bound_value: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda2_right: f64,
    pub gamma: f64,
    pub fir_len: usize,
    pub trace: Vec<AlphaTrace>,
}

impl SynthesisResult {
    pub fn to_json(&self) -> Result<String> {
        let mirror = SynthesisResultJson {
            q_star: FirJson::from(&self.q_star),
            alpha_star: self.alpha_star,
            inner_value: self.inner_value,
            bound_value: self.bound_value,
            lambda1: self.lambda1,
            lambda2: self.lambda2,
            lambda2_right: self.lambda2_right,
            gamma: self.gamma,
            fir_len: self.fir_len,
            trace: self.trace.clone(),
        };
        serde_json::to_string_pretty(&mirror)
            .map_err(|e| SynthesisError::InvalidArg(format!("result serialization failed: {e}")))
    }

    /// Per-alpha CSV trace (one row per grid cell, stable field order).
    pub fn write_alpha_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "alpha,status,inner_value,outer_value,iterations")?;
        for cell in &self.trace {
            let fmt = |v: &Option<f64>| v.map_or(String::new(), |x| format!("{x:.12e}"));
            writeln!(
                w,
                "{:.12e},{},{},{},{}",
                cell.alpha,
                cell.status,
                fmt(&cell.inner_value),
                fmt(&cell.outer_value),
                cell.iterations
            )?;
        }
        Ok(())
    }
}

/// Log-spaced default grid from the Q = 0 stack norm up to just under 1/gamma.
///
/// The lower endpoint is the smallest alpha whose constraint set visibly
/// contains Q = 0; below it feasibility is possible but not guaranteed. For
/// gamma = 0 the constraint never binds the objective scaling, so the grid
/// spans two decades above the floor instead.
pub fn default_alpha_grid(consts: &SynthesisConstants, gamma: f64) -> Result<Vec<f64>> {
    let alpha_min = consts.alpha_floor;
    let alpha_max = if gamma > 0.0 {
        let cap = 0.98 / gamma;
        if alpha_min >= cap {
            return Err(SynthesisError::InvalidArg(format!(
                "gamma {gamma} leaves no alpha window: Q = 0 needs alpha >= {alpha_min}, cap is {cap}"
            )));
        }
        cap
    } else {
        100.0 * alpha_min
    };
    let k = DEFAULT_ALPHA_GRID_LEN;
    Ok((0..k)
        .map(|i| {
            let t = i as f64 / (k - 1) as f64;
            (alpha_min.ln() + t * (alpha_max.ln() - alpha_min.ln())).exp()
        })
        .collect())
}

/// Run the full outer search and return the best certified design.
pub fn outer_search(config: &SynthesisConfig, nominal: &Dcf) -> Result<SynthesisResult> {
    if !(config.gamma >= 0.0) || !config.gamma.is_finite() {
        return Err(SynthesisError::InvalidArg(format!(
            "gamma must be a finite nonnegative real, got {}",
            config.gamma
        )));
    }
    let consts = constants(nominal)?;
    let grid = if config.alpha_grid.is_empty() {
        default_alpha_grid(&consts, config.gamma)?
    } else {
        let g = config.alpha_grid.clone();
        for pair in g.windows(2) {
            if pair[1] <= pair[0] {
                return Err(SynthesisError::InvalidArg(
                    "alpha grid must be strictly increasing".into(),
                ));
            }
        }
        if let Some(bad) = g.iter().find(|&&a| !(a > 0.0) || config.gamma * a >= 1.0) {
            return Err(SynthesisError::InvalidArg(format!(
                "alpha {bad} is outside (0, 1/gamma)"
            )));
        }
        g
    };

    let opts = SolveOptions {
        tol: config.solver_tol,
        max_iter: config.solver_iters,
        ..SolveOptions::default()
    };
    let cells: Vec<_> = grid
        .par_iter()
        .map(|&alpha| -> Result<_> {
            let inner =
                assemble_inner_with(nominal, config.gamma, alpha, config.fir_len, config.scaling)?;
            let sol = solve_inner(&inner, &opts)?;
            let trace = AlphaTrace {
                alpha,
                status: match sol.status {
                    InnerStatus::Feasible => "optimal".into(),
                    InnerStatus::Infeasible => "infeasible".into(),
                    InnerStatus::Stalled => "stalled".into(),
                },
                inner_value: (sol.status == InnerStatus::Feasible).then_some(sol.value),
                outer_value: (sol.status == InnerStatus::Feasible)
                    .then_some(sol.value / (1.0 - config.gamma * alpha)),
                iterations: sol.iterations,
            };
            Ok((trace, sol))
        })
        .collect::<Result<_>>()?;

    let mut best: Option<usize> = None;
    for (i, (trace, _)) in cells.iter().enumerate() {
        if let Some(v) = trace.outer_value {
            if best.is_none_or(|b| v < cells[b].0.outer_value.unwrap()) {
                best = Some(i);
            }
        }
    }
    let Some(best) = best else {
        let infeasible = cells.iter().filter(|(t, _)| t.status == "infeasible").count();
        let stalled = cells.iter().filter(|(t, _)| t.status == "stalled").count();
        return Err(SynthesisError::NoFeasibleAlpha { infeasible, stalled });
    };

    let trace: Vec<AlphaTrace> = cells.iter().map(|(t, _)| t.clone()).collect();
    let (best_trace, best_sol) = &cells[best];
    Ok(SynthesisResult {
        q_star: best_sol.q.clone().expect("feasible cell carries Q"),
        alpha_star: best_trace.alpha,
        inner_value: best_sol.value,
        bound_value: best_trace.outer_value.expect("feasible cell has an outer value"),
        lambda1: consts.lambda1,
        lambda2: consts.lambda2_left,
        lambda2_right: consts.lambda2_right,
        gamma: config.gamma,
        fir_len: config.fir_len,
        trace,
    })
}
