//! Assembly and solution of the inner conic program at one fixed alpha.
//!
//! Decision variables, in order: the stacked taps of Q ((N+1) m p entries,
//! tap-major, column-major inside a tap), the two epigraph scalars eps1 and
//! eps2, then the Gram matrix S appended by the H-infinity encoder. With
//! sigma = (p+m)(N+1), the closed-form sizes are
//!
//! ```text
//!   variables = (N+1) m p + 2 + sigma(sigma+1)/2
//!   rows      = [1 + (N+1) m (m+p)]              second-order cone for eps1
//!             + [1 + (N+1) m p]                  second-order cone for eps2
//!             + sigma(sigma+1)/2                 PSD cone tying S
//!             + (p+m)(p+m+1)/2 + N (p+m)^2       zero rows pinning block traces
//!             + (sigma+p)(sigma+p+1)/2           PSD Schur block
//! ```
//!
//! e.g. 62 variables and 157 rows for a scalar plant at N = 4.
//!
//! The objective is `(1 - gamma alpha) eps1 + lambda1 (lambda2 + gamma) eps2`
//! where eps1 bounds the truncated H2 norm of [I - Y_Q, X_Q] and eps2 bounds
//! ||Q||_H2; the constraint certifies ||[Y~_Q; X~_Q]||_inf <= alpha on the
//! truncated tap stacks.

use crate::constants::constants;
use crate::{Result, SynthesisError};
use conic::{
    append_hinf_lmi, series_vec_operator, solve_with_options, stacked_vec, Cone, ConicProgram,
    ProgramBuilder, QVarBlock, SchurScaling, SolveOptions, SolveStatus,
};
use coprime::Dcf;
use lti_core::FirSystem;
use nalgebra::DMatrix;

/// The assembled inner program plus the variable map needed to read a solution.
#[derive(Debug, Clone)]
pub struct InnerProgram {
    pub program: ConicProgram,
    pub q_block: QVarBlock,
    pub eps1: usize,
    pub eps2: usize,
    pub alpha: f64,
    pub gamma: f64,
    /// Coefficient on eps1 in the objective: 1 - gamma alpha.
    pub eps1_weight: f64,
    /// Coefficient on eps2 in the objective: lambda1 (lambda2 + gamma).
    pub eps2_weight: f64,
}

/// How one inner solve ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InnerStatus {
    Feasible,
    Infeasible,
    /// Budget exhausted before the solver could classify the program.
    Stalled,
}

/// Outcome of one inner solve; `value` is +infinity unless feasible.
#[derive(Debug, Clone)]
pub struct InnerSolution {
    pub status: InnerStatus,
    pub q: Option<FirSystem>,
    pub eps1: f64,
    pub eps2: f64,
    pub value: f64,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
}

/// Assemble the inner program with the default Schur scaling.
pub fn assemble_inner(nominal: &Dcf, gamma: f64, alpha: f64, fir_len: usize) -> Result<InnerProgram> {
    assemble_inner_with(nominal, gamma, alpha, fir_len, SchurScaling::default())
}

/// Assemble the inner program at one (gamma, alpha) with an explicit scaling.
pub fn assemble_inner_with(
    nominal: &Dcf,
    gamma: f64,
    alpha: f64,
    fir_len: usize,
    scaling: SchurScaling,
) -> Result<InnerProgram> {
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(SynthesisError::InvalidArg(format!(
            "gamma must be a finite nonnegative real, got {gamma}"
        )));
    }
    if !(alpha > 0.0) || gamma * alpha >= 1.0 {
        return Err(SynthesisError::InvalidArg(format!(
            "alpha must satisfy 0 < alpha < 1/gamma, got alpha = {alpha}, gamma = {gamma}"
        )));
    }
    if fir_len == 0 {
        return Err(SynthesisError::InvalidArg("fir_len must be >= 1".into()));
    }
    let consts = constants(nominal)?;
    let fs = nominal.factors(fir_len);
    let n = fir_len;
    let (m, p) = (nominal.m_inputs(), nominal.p_outputs());

    let mut builder = ProgramBuilder::new();
    let q_start = builder.add_vars((n + 1) * m * p);
    let eps1 = builder.add_vars(1);
    let eps2 = builder.add_vars(1);
    let eps1_weight = 1.0 - gamma * alpha;
    let eps2_weight = consts.lambda1 * (consts.lambda2_left + gamma);
    builder.add_cost(eps1, eps1_weight);
    builder.add_cost(eps2, eps2_weight);
    let q_block = QVarBlock { start: q_start, rows: m, cols: p, n_taps: n + 1 };

    // eps1 >= || stacked_vec([I-Y, X]) + T qbar ||, the truncated H2 norm of
    // [I - Y_Q, X_Q] = [I - Y, X] + Q [N~, M~]
    let c_stack = FirSystem::identity(m, 0).sub(&fs.y)?.stack_cols(&fs.x)?;
    let p_stack = fs.n_tilde.stack_cols(&fs.m_tilde)?;
    let op = series_vec_operator(&p_stack, m, n);
    let cvec = stacked_vec(&c_stack);
    builder.begin_cone(Cone::Soc(1 + cvec.len()));
    builder.push_row(&[(eps1, -1.0)], 0.0);
    for i in 0..cvec.len() {
        let coeffs: Vec<(usize, f64)> = (0..op.ncols())
            .filter(|&j| op[(i, j)] != 0.0)
            .map(|j| (q_start + j, -op[(i, j)]))
            .collect();
        builder.push_row(&coeffs, cvec[i]);
    }

    // eps2 >= ||qbar||, the truncated H2 norm of Q itself
    builder.begin_cone(Cone::Soc(1 + (n + 1) * m * p));
    builder.push_row(&[(eps2, -1.0)], 0.0);
    for i in 0..(n + 1) * m * p {
        builder.push_row(&[(q_start + i, -1.0)], 0.0);
    }

    // ||[Y~_Q; X~_Q]||_inf <= alpha with [Y~_Q; X~_Q] = [Y~; X~] + [-N; M] Q
    let h = fs.y_tilde.stack_rows(&fs.x_tilde)?;
    let k = fs.n.scale(-1.0).stack_rows(&fs.m)?;
    append_hinf_lmi(&mut builder, &h, &k, &q_block, alpha, scaling)?;

    Ok(InnerProgram {
        program: builder.build()?,
        q_block,
        eps1,
        eps2,
        alpha,
        gamma,
        eps1_weight,
        eps2_weight,
    })
}

/// Solve one assembled inner program and decode the Q taps.
pub fn solve_inner(inner: &InnerProgram, opts: &SolveOptions) -> Result<InnerSolution> {
    let sol = solve_with_options(&inner.program, opts)?;
    let (m, p) = (inner.q_block.rows, inner.q_block.cols);
    let status = match sol.status {
        SolveStatus::Optimal => InnerStatus::Feasible,
        SolveStatus::Infeasible => InnerStatus::Infeasible,
        SolveStatus::MaxIter => InnerStatus::Stalled,
    };
    let (q, eps1, eps2, value) = if status == InnerStatus::Feasible {
        let taps = (0..inner.q_block.n_taps)
            .map(|t| {
                DMatrix::from_fn(m, p, |r, c| sol.x[inner.q_block.start + t * m * p + c * m + r])
            })
            .collect();
        (
            Some(FirSystem::from_taps(taps)?),
            sol.x[inner.eps1],
            sol.x[inner.eps2],
            sol.objective,
        )
    } else {
        (None, f64::NAN, f64::NAN, f64::INFINITY)
    };
    Ok(InnerSolution {
        status,
        q,
        eps1,
        eps2,
        value,
        iterations: sol.iterations,
        primal_residual: sol.primal_residual,
        dual_residual: sol.dual_residual,
    })
}
