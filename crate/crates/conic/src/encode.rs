//! Constraint encoders that turn FIR norm conditions into cone blocks.
//!
//! H-infinity: for an FIR `F(z) = sum_j F_j z^-j` with taps `F_j` of shape
//! r x c, the constraint `||F||_inf <= alpha` is equivalent to the existence
//! of a PSD Gram matrix S of side r(n+1) whose block sub-diagonal sums are
//! pinned,
//!
//! ```text
//!   sum_{i=0}^{n-k} S_{i+k,i} = beta delta[k] I_r   (k = 0..n),
//!   [ S    Fbar  ]
//!   [ Fbar^T  eta I_c ] >= 0,      Fbar = [F_0; F_1; ...; F_n],
//! ```
//!
//! which certifies `||F||_inf <= sqrt(beta eta)`. Two equivalent scalings are
//! provided — `beta = alpha, eta = alpha` and `beta = alpha^2, eta = 1` — and
//! they map onto each other by rescaling S, so both thresholds sit exactly at
//! `||F||_inf` (the calibration test pins this empirically for both).
//!
//! The top-right block may be affine in a decision variable Q through the
//! convolution `F_j(Q) = H_j + sum_t K_{j-t} Q_t`, which is how the synthesis
//! layer constrains its Youla-shifted factor stack.
//!
//! H2: truncated H2 norms are Euclidean norms of stacked tap vectorizations;
//! `vec_stack`/`stacked_vec` and `series_vec_operator` produce the data for
//! the corresponding second-order cone rows, and `build_qhat` materializes the
//! convolution-by-Q operator in the Kronecker form used by the q-hat matrix.

use crate::admm::{solve_with_options, SolveOptions, SolveStatus};
use crate::cones::{svec_dim, svec_index, Cone};
use crate::program::{ConicProgram, ProgramBuilder};
use crate::{ConicError, Result};
use lti_core::FirSystem;
use nalgebra::{DMatrix, DVector};

/// Normalization of the Gram-matrix H-infinity LMI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SchurScaling {
    /// Block traces alpha delta[k] I, Schur corner alpha I.
    #[default]
    AlphaCorner,
    /// Block traces alpha^2 delta[k] I, Schur corner I.
    UnitCorner,
}

/// Location of the Gram variable block inside an assembled program.
#[derive(Debug, Clone, Copy)]
pub struct HinfLmiInfo {
    /// First svec coordinate of S.
    pub s_start: usize,
    /// Matrix side of S.
    pub s_side: usize,
}

/// Variable block holding the taps of a decision FIR Q.
///
/// Tap t occupies `rows * cols` variables starting at
/// `start + t * rows * cols`, packed column-major like `vec`.
#[derive(Debug, Clone, Copy)]
pub struct QVarBlock {
    pub start: usize,
    pub rows: usize,
    pub cols: usize,
    pub n_taps: usize,
}

enum AlphaTerm {
    Fixed(f64),
    Var(usize),
}

/// Shared emitter for the Gram LMI with a fixed or affine top-right block.
fn emit_hinf_lmi(
    builder: &mut ProgramBuilder,
    h: &FirSystem,
    affine: Option<(&FirSystem, &QVarBlock)>,
    alpha: &AlphaTerm,
    scaling: SchurScaling,
) -> Result<HinfLmiInfo> {
    let r = h.rows();
    let c = h.cols();
    let n = h.degree();
    if let Some((k, q)) = affine {
        if k.rows() != r || k.cols() != q.rows || q.cols != c {
            return Err(ConicError::Dimension {
                context: "emit_hinf_lmi affine block",
                expected: format!("K {r}x{q_rows} and Q {q_rows}x{c}", q_rows = k.cols()),
                got: format!("K {}x{}, Q {}x{}", k.rows(), k.cols(), q.rows, q.cols),
            });
        }
    }
    let sqrt2 = std::f64::consts::SQRT_2;
    let sigma_side = r * (n + 1);
    let s_start = builder.add_vars(svec_dim(sigma_side));

    // (i) S itself lives in the PSD cone
    builder.begin_cone(Cone::Psd(sigma_side));
    for idx in 0..svec_dim(sigma_side) {
        builder.push_row(&[(s_start + idx, -1.0)], 0.0);
    }

    // (ii) block sub-diagonal trace pins: sum_i S_{i+k,i} = beta delta[k] I_r
    let beta_of = |alpha_val: f64| match scaling {
        SchurScaling::AlphaCorner => alpha_val,
        SchurScaling::UnitCorner => alpha_val * alpha_val,
    };
    let n_trace_rows = r * (r + 1) / 2 + n * r * r;
    builder.begin_cone(Cone::Zero(n_trace_rows));
    for k in 0..=n {
        for a in 0..r {
            let b_range = if k == 0 { a..r } else { 0..r };
            for b in b_range {
                let mut coeffs = Vec::with_capacity(n + 2);
                for i in 0..=(n - k) {
                    let u = (i + k) * r + a;
                    let v = i * r + b;
                    let (lo, hi) = if u <= v { (u, v) } else { (v, u) };
                    let w = if lo == hi { 1.0 } else { 1.0 / sqrt2 };
                    coeffs.push((s_start + svec_index(lo, hi), w));
                }
                let mut rhs = 0.0;
                if k == 0 && a == b {
                    match alpha {
                        AlphaTerm::Fixed(val) => rhs = beta_of(*val),
                        // the variable is alpha itself (AlphaCorner) or beta = alpha^2
                        AlphaTerm::Var(var) => coeffs.push((*var, -1.0)),
                    }
                }
                builder.push_row(&coeffs, rhs);
            }
        }
    }

    // (iii) Schur block [[S, Fbar], [Fbar^T, eta I_c]] in svec coordinates
    let schur_side = sigma_side + c;
    builder.begin_cone(Cone::Psd(schur_side));
    for jj in 0..schur_side {
        for ii in 0..=jj {
            if jj < sigma_side {
                // S region: tie to the S variables one-to-one
                builder.push_row(&[(s_start + svec_index(ii, jj), -1.0)], 0.0);
            } else if ii < sigma_side {
                // Fbar region: row ii = tap j_tap, matrix row a; column jj - sigma
                let j_tap = ii / r;
                let a = ii % r;
                let col = jj - sigma_side;
                let rhs = sqrt2 * h.tap(j_tap)[(a, col)];
                let mut coeffs = Vec::new();
                if let Some((k_fir, q)) = affine {
                    for t in 0..q.n_taps {
                        if t > j_tap {
                            break;
                        }
                        let k_tap = k_fir.tap(j_tap - t);
                        for s in 0..q.rows {
                            let coef = k_tap[(a, s)];
                            if coef != 0.0 {
                                let var = q.start + t * q.rows * q.cols + col * q.rows + s;
                                coeffs.push((var, -sqrt2 * coef));
                            }
                        }
                    }
                }
                builder.push_row(&coeffs, rhs);
            } else if ii == jj {
                // corner diagonal: eta = alpha (AlphaCorner) or 1 (UnitCorner)
                match (scaling, alpha) {
                    (SchurScaling::AlphaCorner, AlphaTerm::Fixed(val)) => {
                        builder.push_row(&[], *val)
                    }
                    (SchurScaling::AlphaCorner, AlphaTerm::Var(var)) => {
                        builder.push_row(&[(*var, -1.0)], 0.0)
                    }
                    (SchurScaling::UnitCorner, _) => builder.push_row(&[], 1.0),
                }
            } else {
                builder.push_row(&[], 0.0);
            }
        }
    }

    Ok(HinfLmiInfo { s_start, s_side: sigma_side })
}

/// Feasibility program for `||F||_inf <= alpha` with a fixed FIR F.
///
/// Emits the PSD cone for the Gram matrix S, the zero-cone block-trace rows,
/// and the PSD Schur block, exactly in that order.
pub fn hinf_lmi_blocks(f: &FirSystem, alpha: f64, scaling: SchurScaling) -> Result<ConicProgram> {
    if !(alpha > 0.0) {
        return Err(ConicError::InvalidArg(format!(
            "hinf_lmi_blocks needs alpha > 0, got {alpha}"
        )));
    }
    let mut builder = ProgramBuilder::new();
    emit_hinf_lmi(&mut builder, f, None, &AlphaTerm::Fixed(alpha), scaling)?;
    builder.build()
}

/// Append the LMI for `||H + K * Q||_inf <= alpha` with Q a decision variable.
///
/// `q` points at an existing variable block laid out tap-major / column-major;
/// the convolution uses the stated convention Q_t = 0 for t < 0.
pub fn append_hinf_lmi(
    builder: &mut ProgramBuilder,
    h: &FirSystem,
    k: &FirSystem,
    q: &QVarBlock,
    alpha: f64,
    scaling: SchurScaling,
) -> Result<HinfLmiInfo> {
    if !(alpha > 0.0) {
        return Err(ConicError::InvalidArg(format!(
            "append_hinf_lmi needs alpha > 0, got {alpha}"
        )));
    }
    emit_hinf_lmi(builder, h, Some((k, q)), &AlphaTerm::Fixed(alpha), scaling)
}

/// Probe feasibility of the H-infinity LMI at one alpha.
pub fn hinf_feasible(f: &FirSystem, alpha: f64, scaling: SchurScaling) -> Result<bool> {
    let prog = hinf_lmi_blocks(f, alpha, scaling)?;
    let opts = SolveOptions { tol: 1e-7, max_iter: 50_000, ..SolveOptions::default() };
    let sol = solve_with_options(&prog, &opts)?;
    match sol.status {
        SolveStatus::Optimal => Ok(true),
        SolveStatus::Infeasible => Ok(false),
        SolveStatus::MaxIter => Err(ConicError::InvalidArg(format!(
            "feasibility probe undecided at alpha = {alpha} (residuals {:.3e}/{:.3e})",
            sol.primal_residual, sol.dual_residual
        ))),
    }
}

/// Feasibility threshold of the LMI family: the smallest admissible alpha.
///
/// Feasibility is monotone in alpha, so the threshold is the optimum of the
/// SDP that minimizes alpha (AlphaCorner) or alpha^2 (UnitCorner) subject to
/// the same blocks; it should land on `||F||_inf`.
pub fn hinf_threshold(f: &FirSystem, scaling: SchurScaling, opts: &SolveOptions) -> Result<f64> {
    let mut builder = ProgramBuilder::new();
    let level = builder.add_vars(1);
    builder.add_cost(level, 1.0);
    builder.begin_cone(Cone::NonNeg(1));
    builder.push_row(&[(level, -1.0)], 0.0);
    emit_hinf_lmi(&mut builder, f, None, &AlphaTerm::Var(level), scaling)?;
    let prog = builder.build()?;
    let sol = solve_with_options(&prog, opts)?;
    if sol.status != SolveStatus::Optimal {
        return Err(ConicError::InvalidArg(format!(
            "threshold SDP ended with status {:?} (residuals {:.3e}/{:.3e})",
            sol.status, sol.primal_residual, sol.dual_residual
        )));
    }
    let value = sol.x[level].max(0.0);
    Ok(match scaling {
        SchurScaling::AlphaCorner => value,
        SchurScaling::UnitCorner => value.sqrt(),
    })
}

/// Row-stacked tap vectorizations: row j is vec(F_j)^T (column-major vec).
pub fn vec_stack(f: &FirSystem) -> DMatrix<f64> {
    let (r, c) = (f.rows(), f.cols());
    let mut out = DMatrix::zeros(f.degree() + 1, r * c);
    for (j, tap) in f.taps().iter().enumerate() {
        for cc in 0..c {
            for rr in 0..r {
                out[(j, cc * r + rr)] = tap[(rr, cc)];
            }
        }
    }
    out
}

/// Flattened version of `vec_stack`: [vec(F_0); vec(F_1); ...] as one vector.
pub fn stacked_vec(f: &FirSystem) -> DVector<f64> {
    let stack = vec_stack(f);
    let (rows, cols) = (stack.nrows(), stack.ncols());
    DVector::from_fn(rows * cols, |i, _| stack[(i / cols, i % cols)])
}

/// The q-hat block matrix: row block k is [I_p (x) Q_k^T, ..., I_p (x) Q_{k-n}^T].
///
/// Q has taps of shape m x p; the result has (n+1) p^2 rows and (n+1) p m
/// columns with Q_t = 0 for t < 0. For scalar taps this is the lower
/// triangular Toeplitz convolution matrix, which is what makes
/// `||Cbar + Qhat Pbar||` the truncated H2 norm of the affine tap stack.
pub fn build_qhat(q: &FirSystem) -> DMatrix<f64> {
    let n = q.degree();
    let m = q.rows();
    let p = q.cols();
    let eye = DMatrix::<f64>::identity(p, p);
    let mut out = DMatrix::zeros((n + 1) * p * p, (n + 1) * p * m);
    for k in 0..=n {
        for t in 0..=k {
            let block = eye.kronecker(&q.tap(k - t).transpose());
            out.view_mut((k * p * p, t * p * m), (p * p, p * m)).copy_from(&block);
        }
    }
    out
}

/// Linear operator sending stacked vec(Q_t) to stacked vec((Q P)_j), j = 0..n.
///
/// Q taps are q_rows x p.rows(); block (j, t) is P_{j-t}^T (x) I_{q_rows}.
/// This is the exact vectorization of the truncated FIR product for any tap
/// shapes, so `||stacked_vec(C) + T qbar||` equals the truncated H2 norm of
/// C + Q P; it backs the solver-facing second-order cone rows.
pub fn series_vec_operator(p: &FirSystem, q_rows: usize, n: usize) -> DMatrix<f64> {
    let eye = DMatrix::<f64>::identity(q_rows, q_rows);
    let block_rows = q_rows * p.cols();
    let block_cols = q_rows * p.rows();
    let mut out = DMatrix::zeros((n + 1) * block_rows, (n + 1) * block_cols);
    for j in 0..=n {
        for t in 0..=j {
            let block = p.tap(j - t).transpose().kronecker(&eye);
            out.view_mut((j * block_rows, t * block_cols), (block_rows, block_cols))
                .copy_from(&block);
        }
    }
    out
}
