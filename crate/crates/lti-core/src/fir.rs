//! Matrix-valued finite impulse responses (truncated Markov-parameter sequences).

use crate::ss::{matrix_to_rows, rows_to_matrix};
use crate::{LtiError, Result};
use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};

/// `G(z) = sum_{j=0}^{N} G_j z^{-j}` with p x m taps `G_j`.
///
/// FIR systems are stable by construction, which is what makes them the working
/// representation for every optimization-facing transfer matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct FirSystem {
    rows: usize,
    cols: usize,
    taps: Vec<DMatrix<f64>>,
}

/// The last tap should carry a negligible share of the response energy;
/// callers compare [`FirSystem::tail_fraction`] against this.
pub const TAIL_ENERGY_WARN: f64 = 1e-6;

impl FirSystem {
    pub fn from_taps(taps: Vec<DMatrix<f64>>) -> Result<Self> {
        let first = taps.first().ok_or_else(|| {
            LtiError::InvalidArg("FirSystem needs at least one tap".into())
        })?;
        let (rows, cols) = (first.nrows(), first.ncols());
        if taps.iter().any(|t| t.nrows() != rows || t.ncols() != cols) {
            return Err(LtiError::DimensionMismatch {
                context: "FirSystem::from_taps",
                left: format!("{}x{}", rows, cols),
                right: "inconsistent tap shapes".into(),
            });
        }
        Ok(Self { rows, cols, taps })
    }

    /// All-zero FIR with `n_taps + 1` taps.
    pub fn zeros(rows: usize, cols: usize, n_taps: usize) -> Self {
        Self {
            rows,
            cols,
            taps: vec![DMatrix::zeros(rows, cols); n_taps + 1],
        }
    }

    /// Identity at tap 0, zero elsewhere.
    pub fn identity(dim: usize, n_taps: usize) -> Self {
        let mut f = Self::zeros(dim, dim, n_taps);
        f.taps[0] = DMatrix::identity(dim, dim);
        f
    }

    /// Static (tap-0 only) system from a constant matrix.
    pub fn constant(m: DMatrix<f64>) -> Self {
        Self {
            rows: m.nrows(),
            cols: m.ncols(),
            taps: vec![m],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Highest tap index N (the system has N+1 taps).
    pub fn degree(&self) -> usize {
        self.taps.len() - 1
    }

    /// Tap j, or a zero matrix past the truncation point.
    pub fn tap(&self, j: usize) -> DMatrix<f64> {
        self.taps
            .get(j)
            .cloned()
            .unwrap_or_else(|| DMatrix::zeros(self.rows, self.cols))
    }

    pub fn taps(&self) -> &[DMatrix<f64>] {
        &self.taps
    }

    pub fn tap_mut(&mut self, j: usize) -> &mut DMatrix<f64> {
        &mut self.taps[j]
    }

    /// Pad or drop taps so the degree becomes exactly N.
    pub fn truncate(&self, n: usize) -> Self {
        let mut taps: Vec<DMatrix<f64>> = self.taps.iter().take(n + 1).cloned().collect();
        while taps.len() < n + 1 {
            taps.push(DMatrix::zeros(self.rows, self.cols));
        }
        Self {
            rows: self.rows,
            cols: self.cols,
            taps,
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            taps: self.taps.iter().map(|t| t * s).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        Self {
            rows: self.cols,
            cols: self.rows,
            taps: self.taps.iter().map(|t| t.transpose()).collect(),
        }
    }

    pub fn add(&self, other: &FirSystem) -> Result<Self> {
        self.zip(other, "FirSystem::add", |a, b| a + b)
    }

    pub fn sub(&self, other: &FirSystem) -> Result<Self> {
        self.zip(other, "FirSystem::sub", |a, b| a - b)
    }

    fn zip(
        &self,
        other: &FirSystem,
        context: &'static str,
        op: impl Fn(&DMatrix<f64>, &DMatrix<f64>) -> DMatrix<f64>,
    ) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(LtiError::DimensionMismatch {
                context,
                left: format!("{}x{}", self.rows, self.cols),
                right: format!("{}x{}", other.rows, other.cols),
            });
        }
        let n = self.degree().max(other.degree());
        let taps = (0..=n).map(|j| op(&self.tap(j), &other.tap(j))).collect();
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            taps,
        })
    }

    /// Truncated product `(self * other)(z)`: tap-wise convolution up to degree N.
    pub fn series(&self, other: &FirSystem, n: usize) -> Result<Self> {
        if self.cols != other.rows {
            return Err(LtiError::DimensionMismatch {
                context: "FirSystem::series",
                left: format!("{} cols", self.cols),
                right: format!("{} rows", other.rows),
            });
        }
        let mut taps = vec![DMatrix::zeros(self.rows, other.cols); n + 1];
        let amax = self.degree().min(n);
        for i in 0..=amax {
            let bmax = (n - i).min(other.degree());
            for j in 0..=bmax {
                taps[i + j] += &self.taps[i] * &other.taps[j];
            }
        }
        Ok(Self {
            rows: self.rows,
            cols: other.cols,
            taps,
        })
    }

    /// Vertical concatenation [self; other].
    pub fn stack_rows(&self, other: &FirSystem) -> Result<Self> {
        if self.cols != other.cols {
            return Err(LtiError::DimensionMismatch {
                context: "FirSystem::stack_rows",
                left: format!("{} cols", self.cols),
                right: format!("{} cols", other.cols),
            });
        }
        let n = self.degree().max(other.degree());
        let rows = self.rows + other.rows;
        let taps = (0..=n)
            .map(|j| {
                let mut t = DMatrix::zeros(rows, self.cols);
                t.view_mut((0, 0), (self.rows, self.cols)).copy_from(&self.tap(j));
                t.view_mut((self.rows, 0), (other.rows, self.cols))
                    .copy_from(&other.tap(j));
                t
            })
            .collect();
        Ok(Self {
            rows,
            cols: self.cols,
            taps,
        })
    }

    /// Horizontal concatenation [self, other].
    pub fn stack_cols(&self, other: &FirSystem) -> Result<Self> {
        if self.rows != other.rows {
            return Err(LtiError::DimensionMismatch {
                context: "FirSystem::stack_cols",
                left: format!("{} rows", self.rows),
                right: format!("{} rows", other.rows),
            });
        }
        let n = self.degree().max(other.degree());
        let cols = self.cols + other.cols;
        let taps = (0..=n)
            .map(|j| {
                let mut t = DMatrix::zeros(self.rows, cols);
                t.view_mut((0, 0), (self.rows, self.cols)).copy_from(&self.tap(j));
                t.view_mut((0, self.cols), (self.rows, other.cols))
                    .copy_from(&other.tap(j));
                t
            })
            .collect();
        Ok(Self {
            rows: self.rows,
            cols,
            taps,
        })
    }

    /// Frequency response `sum_j G_j e^{-i j w}`.
    pub fn eval(&self, omega: f64) -> DMatrix<Complex<f64>> {
        let mut acc = DMatrix::<Complex<f64>>::zeros(self.rows, self.cols);
        for (j, tap) in self.taps.iter().enumerate() {
            let ph = Complex::from_polar(1.0, -(j as f64) * omega);
            for r in 0..self.rows {
                for c in 0..self.cols {
                    acc[(r, c)] += ph * tap[(r, c)];
                }
            }
        }
        acc
    }

    /// Causal filtering of a time series: `y_t = sum_j G_j u_{t-j}`.
    pub fn filter(&self, input: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let t_len = input.len();
        let mut out = vec![vec![0.0; self.rows]; t_len];
        for t in 0..t_len {
            let jmax = t.min(self.degree());
            for j in 0..=jmax {
                let tap = &self.taps[j];
                let u = &input[t - j];
                for r in 0..self.rows {
                    let mut acc = 0.0;
                    for c in 0..self.cols {
                        acc += tap[(r, c)] * u[c];
                    }
                    out[t][r] += acc;
                }
            }
        }
        out
    }

    /// Fraction of total squared tap energy carried by the last tap.
    ///
    /// A value above [`TAIL_ENERGY_WARN`] means the truncation length is too
    /// short for the system being represented.
    pub fn tail_fraction(&self) -> f64 {
        let total: f64 = self.taps.iter().map(|t| t.norm_squared()).sum();
        if total == 0.0 {
            return 0.0;
        }
        self.taps.last().map(|t| t.norm_squared()).unwrap_or(0.0) / total
    }

    /// Frobenius norm of the largest tap (used for residual-style checks).
    pub fn max_tap_norm(&self) -> f64 {
        self.taps.iter().map(|t| t.norm()).fold(0.0, f64::max)
    }

    /// Tap-wise inverse of a square FIR with invertible tap 0, truncated to degree N.
    ///
    /// Solves `self * inv = I` recursively:
    /// `inv_k = G_0^{-1} (delta_k I - sum_{j=1..k} G_j inv_{k-j})`.
    pub fn inverse(&self, n: usize) -> Result<Self> {
        if self.rows != self.cols {
            return Err(LtiError::NonSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let g0 = self
            .taps[0]
            .clone()
            .try_inverse()
            .ok_or(LtiError::Singular("FirSystem::inverse tap 0"))?;
        let dim = self.rows;
        let mut inv_taps: Vec<DMatrix<f64>> = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let mut rhs = if k == 0 {
                DMatrix::identity(dim, dim)
            } else {
                DMatrix::zeros(dim, dim)
            };
            for j in 1..=k.min(self.degree()) {
                rhs -= self.tap(j) * &inv_taps[k - j];
            }
            inv_taps.push(&g0 * rhs);
        }
        Self::from_taps(inv_taps)
    }
}

/// JSON schema: tap-major nested arrays, documented in docs/SCHEMAS.md.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FirJson {
    pub rows: usize,
    pub cols: usize,
    pub taps: Vec<Vec<Vec<f64>>>,
}

impl From<&FirSystem> for FirJson {
    fn from(f: &FirSystem) -> Self {
        Self {
            rows: f.rows,
            cols: f.cols,
            taps: f.taps.iter().map(matrix_to_rows).collect(),
        }
    }
}

impl TryFrom<&FirJson> for FirSystem {
    type Error = LtiError;
    fn try_from(j: &FirJson) -> Result<FirSystem> {
        let taps = j
            .taps
            .iter()
            .map(|t| rows_to_matrix(t))
            .collect::<Result<Vec<_>>>()?;
        let fir = FirSystem::from_taps(taps)?;
        if fir.rows != j.rows || fir.cols != j.cols {
            return Err(LtiError::InvalidArg(
                "FIR JSON dims disagree with tap shapes".into(),
            ));
        }
        Ok(fir)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::dmatrix;

    fn scalar_fir(vals: &[f64]) -> FirSystem {
        FirSystem::from_taps(vals.iter().map(|v| dmatrix![*v]).collect()).unwrap()
    }

    #[test]
    fn series_polynomial_square() {
        // (1 + z^{-1})^2 = 1 + 2 z^{-1} + z^{-2}
        let a = scalar_fir(&[1.0, 1.0]);
        let prod = a.series(&a, 2).unwrap();
        let expect = [1.0, 2.0, 1.0];
        for (j, e) in expect.iter().enumerate() {
            assert_relative_eq!(prod.tap(j)[(0, 0)], *e, epsilon = 1e-12);
        }
    }

    #[test]
    fn add_identity_to_zero() {
        let z = FirSystem::zeros(2, 2, 3);
        let i = FirSystem::identity(2, 3);
        let s = z.add(&i).unwrap();
        assert_eq!(s, i);
    }

    #[test]
    fn convolution_matches_filter() {
        let a = scalar_fir(&[1.0, -0.5, 0.25]);
        let b = scalar_fir(&[0.5, 2.0]);
        let prod = a.series(&b, 3).unwrap();
        // feed an impulse through b then a
        let mut input = vec![vec![0.0]; 4];
        input[0][0] = 1.0;
        let mid = b.filter(&input);
        let out = a.filter(&mid);
        for t in 0..4 {
            assert_relative_eq!(out[t][0], prod.tap(t)[(0, 0)], epsilon = 1e-12);
        }
    }

    #[test]
    fn inverse_round_trip() {
        let a = scalar_fir(&[2.0, -0.6, 0.1, 0.3]);
        let inv = a.inverse(12).unwrap();
        let prod = a.series(&inv, 12).unwrap();
        let ident = FirSystem::identity(1, 12);
        assert!(prod.sub(&ident).unwrap().max_tap_norm() < 1e-12);
    }

    #[test]
    fn stacking_shapes() {
        let a = FirSystem::zeros(1, 2, 1);
        let b = FirSystem::identity(2, 2);
        let v = a.stack_rows(&b).unwrap();
        assert_eq!((v.rows(), v.cols(), v.degree()), (3, 2, 2));
        let h = b.stack_cols(&b).unwrap();
        assert_eq!((h.rows(), h.cols()), (2, 4));
    }

    #[test]
    fn eval_at_zero_frequency_sums_taps() {
        let a = scalar_fir(&[1.0, 2.0, 3.0]);
        let g = a.eval(0.0);
        assert_relative_eq!(g[(0, 0)].re, 6.0, epsilon = 1e-12);
    }

    #[test]
    fn tail_fraction_flags_slow_decay() {
        let slow = scalar_fir(&[1.0, 0.99]);
        assert!(slow.tail_fraction() > TAIL_ENERGY_WARN);
        let sharp = scalar_fir(&[1.0, 1e-9]);
        assert!(sharp.tail_fraction() < TAIL_ENERGY_WARN);
    }

    #[test]
    fn json_round_trip() {
        let a = FirSystem::from_taps(vec![dmatrix![1.0, 2.0; 3.0, 4.0], dmatrix![0.0, 1.0; -1.0, 0.5]])
            .unwrap();
        let j = FirJson::from(&a);
        let text = serde_json::to_string(&j).unwrap();
        let back: FirJson = serde_json::from_str(&text).unwrap();
        let a2 = FirSystem::try_from(&back).unwrap();
        assert_eq!(a, a2);
    }
}
