//! Conic program container, incremental builder, and sparse-triplet JSON exchange.
//!
//! A program is `min c^T x  s.t.  A x + s = b, s in K` with `K` the ordered
//! product of the cone list. PSD cones occupy svec-packed rows (side s uses
//! s(s+1)/2 rows), so the row count of A equals the sum of `Cone::dim()` over
//! the list.
//!
//! JSON layout (all indices zero-based, `A` as row/col/value triplets sorted
//! row-major, zero entries omitted):
//!
//! ```text
//! { "n_vars": 3, "c": [...], "b": [...],
//!   "a": [{"row":0,"col":2,"value":-1.0}, ...],
//!   "cones": [{"kind":"zero","dim":2}, {"kind":"soc","dim":3},
//!             {"kind":"psd","dim":4}] }
//! ```
//!
//! For `"psd"` the `dim` field stores the matrix side, not the packed length.

use crate::cones::Cone;
use crate::{ConicError, Result};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Dense conic program in standard slack form.
#[derive(Debug, Clone)]
pub struct ConicProgram {
    /// Cost vector c.
    pub c: DVector<f64>,
    /// Constraint matrix A (rows follow the cone list order).
    pub a: DMatrix<f64>,
    /// Constraint offset b.
    pub b: DVector<f64>,
    /// Ordered cone factors of K.
    pub cones: Vec<Cone>,
}

impl ConicProgram {
    /// Validate and wrap the pieces of a program.
    pub fn new(c: DVector<f64>, a: DMatrix<f64>, b: DVector<f64>, cones: Vec<Cone>) -> Result<Self> {
        let prog = Self { c, a, b, cones };
        prog.validate()?;
        Ok(prog)
    }

    /// Check the container invariants (shapes, cone accounting, finiteness).
    pub fn validate(&self) -> Result<()> {
        if self.a.ncols() != self.c.len() {
            return Err(ConicError::Dimension {
                context: "ConicProgram columns",
                expected: format!("{} (len of c)", self.c.len()),
                got: format!("{}", self.a.ncols()),
            });
        }
        if self.a.nrows() != self.b.len() {
            return Err(ConicError::Dimension {
                context: "ConicProgram rows",
                expected: format!("{} (len of b)", self.b.len()),
                got: format!("{}", self.a.nrows()),
            });
        }
        let cone_rows: usize = self.cones.iter().map(Cone::dim).sum();
        if cone_rows != self.a.nrows() {
            return Err(ConicError::Dimension {
                context: "ConicProgram cone dims",
                expected: format!("{} rows of A", self.a.nrows()),
                got: format!("{cone_rows} summed cone dims"),
            });
        }
        if self.cones.iter().any(|k| k.dim() == 0) {
            return Err(ConicError::InvalidArg("zero-dimensional cone in list".into()));
        }
        for (name, ok) in [
            ("c", self.c.iter().all(|v| v.is_finite())),
            ("A", self.a.iter().all(|v| v.is_finite())),
            ("b", self.b.iter().all(|v| v.is_finite())),
        ] {
            if !ok {
                return Err(ConicError::NonFinite(match name {
                    "c" => "cost vector c",
                    "A" => "constraint matrix A",
                    _ => "offset vector b",
                }));
            }
        }
        Ok(())
    }

    pub fn n_vars(&self) -> usize {
        self.c.len()
    }

    pub fn n_rows(&self) -> usize {
        self.b.len()
    }

    /// Serialize to the documented sparse-triplet JSON string.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ProgramJson::from(self))?)
    }

    /// Parse and validate a program from the sparse-triplet JSON format.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: ProgramJson = serde_json::from_str(text)?;
        raw.try_into()
    }
}

/// One nonzero of A in the JSON exchange format.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct Triplet {
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ConeJson {
    kind: String,
    dim: usize,
}

/// Serde image of a `ConicProgram` (see the module docs for the layout).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProgramJson {
    pub n_vars: usize,
    pub c: Vec<f64>,
    pub b: Vec<f64>,
    pub a: Vec<Triplet>,
    cones: Vec<ConeJson>,
}

impl From<&ConicProgram> for ProgramJson {
    fn from(p: &ConicProgram) -> Self {
        let mut a = Vec::new();
        for row in 0..p.a.nrows() {
            for col in 0..p.a.ncols() {
                let value = p.a[(row, col)];
                if value != 0.0 {
                    a.push(Triplet { row, col, value });
                }
            }
        }
        let cones = p
            .cones
            .iter()
            .map(|k| match *k {
                Cone::Zero(d) => ConeJson { kind: "zero".into(), dim: d },
                Cone::NonNeg(d) => ConeJson { kind: "nonneg".into(), dim: d },
                Cone::Soc(d) => ConeJson { kind: "soc".into(), dim: d },
                Cone::Psd(side) => ConeJson { kind: "psd".into(), dim: side },
            })
            .collect();
        ProgramJson {
            n_vars: p.n_vars(),
            c: p.c.iter().copied().collect(),
            b: p.b.iter().copied().collect(),
            a,
            cones,
        }
    }
}

impl TryFrom<ProgramJson> for ConicProgram {
    type Error = ConicError;

    fn try_from(raw: ProgramJson) -> Result<Self> {
        let mut cones = Vec::with_capacity(raw.cones.len());
        for k in &raw.cones {
            cones.push(match k.kind.as_str() {
                "zero" => Cone::Zero(k.dim),
                "nonneg" => Cone::NonNeg(k.dim),
                "soc" => Cone::Soc(k.dim),
                "psd" => Cone::Psd(k.dim),
                other => {
                    return Err(ConicError::InvalidArg(format!("unknown cone kind '{other}'")))
                }
            });
        }
        let n_rows = raw.b.len();
        let mut a = DMatrix::zeros(n_rows, raw.n_vars);
        for t in &raw.a {
            if t.row >= n_rows || t.col >= raw.n_vars {
                return Err(ConicError::Dimension {
                    context: "ProgramJson triplet",
                    expected: format!("row < {n_rows}, col < {}", raw.n_vars),
                    got: format!("row {}, col {}", t.row, t.col),
                });
            }
            a[(t.row, t.col)] += t.value;
        }
        ConicProgram::new(
            DVector::from_vec(raw.c),
            a,
            DVector::from_vec(raw.b),
            cones,
        )
    }
}

/// Incremental builder: register variable blocks, then emit cone blocks row by row.
///
/// Rows mean `sum_i coeff_i x_i + s_row = rhs` with the slack entering the cone
/// declared by the most recent `begin_cone`. `build` verifies that every cone
/// received exactly `Cone::dim()` rows.
#[derive(Debug, Default)]
pub struct ProgramBuilder {
    n_vars: usize,
    cost: Vec<(usize, f64)>,
    cones: Vec<Cone>,
    rows: Vec<Vec<(usize, f64)>>,
    rhs: Vec<f64>,
}

impl ProgramBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Reserve `count` new variables; returns the index of the first.
    pub fn add_vars(&mut self, count: usize) -> usize {
        let start = self.n_vars;
        self.n_vars += count;
        start
    }

    /// Add `coef` to the cost coefficient of variable `var`.
    pub fn add_cost(&mut self, var: usize, coef: f64) {
        self.cost.push((var, coef));
    }

    /// Open a new cone block; subsequent rows belong to it.
    pub fn begin_cone(&mut self, cone: Cone) {
        self.cones.push(cone);
    }

    /// Append one row (coefficients on x, right-hand side) to the current cone.
    pub fn push_row(&mut self, coeffs: &[(usize, f64)], rhs: f64) {
        self.rows.push(coeffs.to_vec());
        self.rhs.push(rhs);
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    /// Assemble and validate the program.
    pub fn build(self) -> Result<ConicProgram> {
        let declared: usize = self.cones.iter().map(Cone::dim).sum();
        if declared != self.rows.len() {
            return Err(ConicError::Dimension {
                context: "ProgramBuilder rows",
                expected: format!("{declared} rows declared by cones"),
                got: format!("{}", self.rows.len()),
            });
        }
        let mut c = DVector::zeros(self.n_vars);
        for (var, coef) in &self.cost {
            if *var >= self.n_vars {
                return Err(ConicError::Dimension {
                    context: "ProgramBuilder cost index",
                    expected: format!("< {}", self.n_vars),
                    got: format!("{var}"),
                });
            }
            c[*var] += coef;
        }
        let mut a = DMatrix::zeros(self.rows.len(), self.n_vars);
        for (r, row) in self.rows.iter().enumerate() {
            for (var, coef) in row {
                if *var >= self.n_vars {
                    return Err(ConicError::Dimension {
                        context: "ProgramBuilder row index",
                        expected: format!("< {}", self.n_vars),
                        got: format!("{var}"),
                    });
                }
                a[(r, *var)] += coef;
            }
        }
        ConicProgram::new(c, a, DVector::from_vec(self.rhs), self.cones)
    }
}
