//! Dense state-space realizations of discrete-time systems.

use crate::fir::FirSystem;
use crate::{spectral_radius, LtiError, Result};
use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};

/// A discrete-time LTI system `G(z) = C (zI - A)^{-1} B + D`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub d: DMatrix<f64>,
}

impl StateSpace {
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>, c: DMatrix<f64>, d: DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(LtiError::NonSquare {
                rows: a.nrows(),
                cols: a.ncols(),
            });
        }
        let (p, m) = (c.nrows(), b.ncols());
        if b.nrows() != n || c.ncols() != n || d.nrows() != p || d.ncols() != m {
            return Err(LtiError::DimensionMismatch {
                context: "StateSpace::new",
                left: format!("A {}x{}, B {}x{}", n, n, b.nrows(), b.ncols()),
                right: format!("C {}x{}, D {}x{}", c.nrows(), c.ncols(), d.nrows(), d.ncols()),
            });
        }
        Ok(Self { a, b, c, d })
    }

    /// Convenience constructor for SISO systems.
    pub fn scalar(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self {
            a: DMatrix::from_element(1, 1, a),
            b: DMatrix::from_element(1, 1, b),
            c: DMatrix::from_element(1, 1, c),
            d: DMatrix::from_element(1, 1, d),
        }
    }

    /// State dimension n.
    pub fn order(&self) -> usize {
        self.a.nrows()
    }

    /// Output dimension p.
    pub fn outputs(&self) -> usize {
        self.c.nrows()
    }

    /// Input dimension m.
    pub fn inputs(&self) -> usize {
        self.b.ncols()
    }

    pub fn spectral_radius(&self) -> f64 {
        spectral_radius(&self.a).expect("A is square by construction")
    }

    pub fn is_stable(&self) -> bool {
        self.spectral_radius() < 1.0
    }

    /// Markov parameters: tap 0 = D, tap j = C A^{j-1} B.
    pub fn markov(&self, n_taps: usize) -> FirSystem {
        let mut taps = Vec::with_capacity(n_taps + 1);
        taps.push(self.d.clone());
        let mut apow_b = self.b.clone();
        for _ in 1..=n_taps {
            taps.push(&self.c * &apow_b);
            apow_b = &self.a * apow_b;
        }
        FirSystem::from_taps(taps).expect("markov taps share dimensions")
    }

    /// Frequency response `C (zI - A)^{-1} B + D` at a point on the unit circle.
    pub fn eval(&self, z: Complex<f64>) -> Result<DMatrix<Complex<f64>>> {
        let n = self.order();
        let mut zi_a = DMatrix::<Complex<f64>>::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                zi_a[(i, j)] = Complex::new(-self.a[(i, j)], 0.0);
            }
            zi_a[(i, i)] += z;
        }
        let b_c: DMatrix<Complex<f64>> = self.b.map(|v| Complex::new(v, 0.0));
        let lu = zi_a.lu();
        let sol = lu
            .solve(&b_c)
            .ok_or(LtiError::Singular("StateSpace::eval (zI - A)"))?;
        let c_c: DMatrix<Complex<f64>> = self.c.map(|v| Complex::new(v, 0.0));
        let d_c: DMatrix<Complex<f64>> = self.d.map(|v| Complex::new(v, 0.0));
        Ok(&c_c * sol + d_c)
    }

    /// Causal filtering of a time series from zero initial state.
    ///
    /// `input[t]` is the m-vector at time t; the output collects `y_t = C x_t + D u_t`
    /// with `x_{t+1} = A x_t + B u_t`.
    pub fn filter(&self, input: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let n = self.order();
        let mut x = DMatrix::<f64>::zeros(n, 1);
        let mut out = Vec::with_capacity(input.len());
        for u_t in input {
            let u = DMatrix::from_column_slice(u_t.len(), 1, u_t);
            let y = &self.c * &x + &self.d * &u;
            out.push(y.column(0).iter().copied().collect());
            x = &self.a * x + &self.b * u;
        }
        out
    }

    /// Series interconnection: `self` applied after `other`, i.e. G(z) = self(z) * other(z).
    pub fn series(&self, other: &StateSpace) -> Result<StateSpace> {
        if self.inputs() != other.outputs() {
            return Err(LtiError::DimensionMismatch {
                context: "StateSpace::series",
                left: format!("{} inputs", self.inputs()),
                right: format!("{} outputs", other.outputs()),
            });
        }
        let (n1, n2) = (self.order(), other.order());
        let n = n1 + n2;
        let mut a = DMatrix::<f64>::zeros(n, n);
        a.view_mut((0, 0), (n1, n1)).copy_from(&self.a);
        a.view_mut((0, n1), (n1, n2)).copy_from(&(&self.b * &other.c));
        a.view_mut((n1, n1), (n2, n2)).copy_from(&other.a);
        let mut b = DMatrix::<f64>::zeros(n, other.inputs());
        b.view_mut((0, 0), (n1, other.inputs()))
            .copy_from(&(&self.b * &other.d));
        b.view_mut((n1, 0), (n2, other.inputs())).copy_from(&other.b);
        let mut c = DMatrix::<f64>::zeros(self.outputs(), n);
        c.view_mut((0, 0), (self.outputs(), n1)).copy_from(&self.c);
        c.view_mut((0, n1), (self.outputs(), n2))
            .copy_from(&(&self.d * &other.c));
        let d = &self.d * &other.d;
        StateSpace::new(a, b, c, d)
    }
}

/// JSON schema: nested row-major arrays, documented in docs/SCHEMAS.md.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateSpaceJson {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
    pub c: Vec<Vec<f64>>,
    pub d: Vec<Vec<f64>>,
}

/// Row-major nested-Vec view of a matrix (JSON helper).
pub fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

/// Matrix from row-major nested Vecs; rows must have equal length (JSON helper).
pub fn rows_to_matrix(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let r = rows.len();
    if r == 0 {
        return Err(LtiError::InvalidArg("empty matrix rows".into()));
    }
    let c = rows[0].len();
    if rows.iter().any(|row| row.len() != c) {
        return Err(LtiError::InvalidArg("ragged matrix rows".into()));
    }
    Ok(DMatrix::from_fn(r, c, |i, j| rows[i][j]))
}

impl From<&StateSpace> for StateSpaceJson {
    fn from(s: &StateSpace) -> Self {
        Self {
            a: matrix_to_rows(&s.a),
            b: matrix_to_rows(&s.b),
            c: matrix_to_rows(&s.c),
            d: matrix_to_rows(&s.d),
        }
    }
}

impl TryFrom<&StateSpaceJson> for StateSpace {
    type Error = LtiError;
    fn try_from(j: &StateSpaceJson) -> Result<StateSpace> {
        StateSpace::new(
            rows_to_matrix(&j.a)?,
            rows_to_matrix(&j.b)?,
            rows_to_matrix(&j.c)?,
            rows_to_matrix(&j.d)?,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn markov_geometric() {
        let sys = StateSpace::scalar(0.5, 1.0, 1.0, 0.0);
        let fir = sys.markov(3);
        let expect = [0.0, 1.0, 0.5, 0.25];
        for (j, e) in expect.iter().enumerate() {
            assert_relative_eq!(fir.tap(j)[(0, 0)], *e, epsilon = 1e-12);
        }
    }

    #[test]
    fn markov_nilpotent() {
        let sys = StateSpace::scalar(0.0, 1.0, 1.0, 1.0);
        let fir = sys.markov(2);
        let expect = [1.0, 1.0, 0.0];
        for (j, e) in expect.iter().enumerate() {
            assert_relative_eq!(fir.tap(j)[(0, 0)], *e, epsilon = 1e-12);
        }
    }

    #[test]
    fn markov_worked_m_factor() {
        // M(z) = (z-2)/(z-0.5) realized as (A=0.5, B=1, C=-1.5, D=1)
        let sys = StateSpace::scalar(0.5, 1.0, -1.5, 1.0);
        let fir = sys.markov(3);
        let expect = [1.0, -1.5, -0.75, -0.375];
        for (j, e) in expect.iter().enumerate() {
            assert_relative_eq!(fir.tap(j)[(0, 0)], *e, epsilon = 1e-12);
        }
    }

    #[test]
    fn eval_matches_rational_form() {
        // G(z) = 1/(z-0.5) at z=1 equals 2
        let sys = StateSpace::scalar(0.5, 1.0, 1.0, 0.0);
        let g = sys.eval(Complex::new(1.0, 0.0)).unwrap();
        assert_relative_eq!(g[(0, 0)].re, 2.0, epsilon = 1e-12);
        assert_relative_eq!(g[(0, 0)].im, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn filter_reproduces_impulse_response() {
        let sys = StateSpace::scalar(0.5, 1.0, -1.5, 1.0);
        let mut input = vec![vec![0.0]; 6];
        input[0][0] = 1.0;
        let out = sys.filter(&input);
        let fir = sys.markov(5);
        for t in 0..6 {
            assert_relative_eq!(out[t][0], fir.tap(t)[(0, 0)], epsilon = 1e-12);
        }
    }

    #[test]
    fn series_matches_tap_convolution() {
        let g1 = StateSpace::scalar(0.5, 1.0, 1.0, 0.0);
        let g2 = StateSpace::scalar(-0.3, 1.0, 2.0, 1.0);
        let cascade = g1.series(&g2).unwrap();
        let direct = cascade.markov(8);
        let conv = g1.markov(8).series(&g2.markov(8), 8).unwrap();
        for j in 0..=8 {
            assert_relative_eq!(direct.tap(j)[(0, 0)], conv.tap(j)[(0, 0)], epsilon = 1e-10);
        }
    }

    #[test]
    fn json_round_trip() {
        let sys = StateSpace::scalar(0.5, 1.0, -1.5, 1.0);
        let j = StateSpaceJson::from(&sys);
        let text = serde_json::to_string(&j).unwrap();
        let back: StateSpaceJson = serde_json::from_str(&text).unwrap();
        let sys2 = StateSpace::try_from(&back).unwrap();
        assert_eq!(sys, sys2);
    }
}
