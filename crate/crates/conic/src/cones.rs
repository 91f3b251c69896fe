//! Cone descriptions and Euclidean projections.
//!
//! Symmetric matrices travel in scaled `svec` coordinates: the upper triangle
//! read column-major with off-diagonal entries multiplied by sqrt(2). Under
//! this packing `<svec(A), svec(B)> = trace(A B)`, so the PSD cone stays
//! self-dual and eigenvalue clipping is an exact Euclidean projection in the
//! packed coordinates.

use crate::{ConicError, Result};
use nalgebra::{DMatrix, DVector};

/// One factor of the Cartesian product cone K.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cone {
    /// {0}^d — equality rows.
    Zero(usize),
    /// Nonnegative orthant of dimension d.
    NonNeg(usize),
    /// Second-order cone {(t, x) : ||x||_2 <= t} of total dimension d >= 1.
    Soc(usize),
    /// PSD cone of side s, stored as svec coordinates (s(s+1)/2 slots).
    Psd(usize),
}

impl Cone {
    /// Number of slack coordinates this cone occupies.
    pub fn dim(&self) -> usize {
        match *self {
            Cone::Zero(d) | Cone::NonNeg(d) | Cone::Soc(d) => d,
            Cone::Psd(side) => svec_dim(side),
        }
    }
}

/// Length of the svec packing of a symmetric side x side matrix.
pub fn svec_dim(side: usize) -> usize {
    side * (side + 1) / 2
}

/// Position of entry (i, j), i <= j, inside the svec packing.
pub fn svec_index(i: usize, j: usize) -> usize {
    debug_assert!(i <= j);
    j * (j + 1) / 2 + i
}

/// Scaled upper-triangle packing of the symmetric part of `m`.
pub fn svec(m: &DMatrix<f64>) -> DVector<f64> {
    let side = m.nrows();
    debug_assert_eq!(side, m.ncols(), "svec needs a square matrix");
    let sqrt2 = std::f64::consts::SQRT_2;
    let mut v = DVector::zeros(svec_dim(side));
    for j in 0..side {
        for i in 0..=j {
            let sym = 0.5 * (m[(i, j)] + m[(j, i)]);
            v[svec_index(i, j)] = if i == j { sym } else { sqrt2 * sym };
        }
    }
    v
}

/// Inverse of `svec`: rebuild the symmetric matrix of side `side`.
pub fn smat(v: &DVector<f64>, side: usize) -> DMatrix<f64> {
    debug_assert_eq!(v.len(), svec_dim(side), "smat length mismatch");
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let mut m = DMatrix::zeros(side, side);
    for j in 0..side {
        for i in 0..=j {
            let raw = v[svec_index(i, j)];
            let val = if i == j { raw } else { inv_sqrt2 * raw };
            m[(i, j)] = val;
            m[(j, i)] = val;
        }
    }
    m
}

/// Projection onto the PSD cone by eigenvalue clipping.
///
/// Non-symmetric input is replaced by its symmetric part first; the returned
/// flag is true when that replacement actually changed something.
pub fn project_psd(m: &DMatrix<f64>) -> (DMatrix<f64>, bool) {
    let side = m.nrows();
    assert_eq!(side, m.ncols(), "project_psd needs a square matrix");
    let sym = 0.5 * (m + m.transpose());
    let asymmetry = (m - &sym).norm();
    let symmetrized = asymmetry > 1e-14 * (1.0 + sym.norm());
    let eig = sym.clone().symmetric_eigen();
    let mut projected = DMatrix::zeros(side, side);
    for (idx, lambda) in eig.eigenvalues.iter().enumerate() {
        if *lambda > 0.0 {
            let v = eig.eigenvectors.column(idx);
            projected.syger(*lambda, &v, &v, 1.0);
        }
    }
    // syger fills only the lower triangle; mirror it
    for j in 0..side {
        for i in 0..j {
            projected[(i, j)] = projected[(j, i)];
        }
    }
    (projected, symmetrized)
}

/// Projection onto the second-order cone {(t, x) : ||x|| <= t}.
pub fn project_soc(v: &DVector<f64>) -> DVector<f64> {
    assert!(!v.is_empty(), "project_soc needs at least the radius slot");
    let t = v[0];
    if v.len() == 1 {
        return DVector::from_element(1, t.max(0.0));
    }
    let x = v.rows(1, v.len() - 1);
    let nx = x.norm();
    if nx <= t {
        return v.clone();
    }
    if nx <= -t {
        return DVector::zeros(v.len());
    }
    let scale = 0.5 * (t + nx);
    let mut out = DVector::zeros(v.len());
    out[0] = scale;
    out.rows_mut(1, v.len() - 1).copy_from(&(x * (scale / nx)));
    out
}

/// Euclidean projection of one slack block onto its cone.
pub fn project_cone(cone: Cone, block: &DVector<f64>) -> Result<DVector<f64>> {
    if block.len() != cone.dim() {
        return Err(ConicError::Dimension {
            context: "project_cone",
            expected: format!("{} coordinates", cone.dim()),
            got: format!("{}", block.len()),
        });
    }
    Ok(match cone {
        Cone::Zero(d) => DVector::zeros(d),
        Cone::NonNeg(_) => block.map(|v| v.max(0.0)),
        Cone::Soc(_) => project_soc(block),
        Cone::Psd(side) => svec(&project_psd(&smat(block, side)).0),
    })
}

/// Projection onto the dual cone K* (zero rows have a free dual).
pub fn project_dual_cone(cone: Cone, block: &DVector<f64>) -> Result<DVector<f64>> {
    match cone {
        Cone::Zero(_) => {
            if block.len() != cone.dim() {
                return Err(ConicError::Dimension {
                    context: "project_dual_cone",
                    expected: format!("{} coordinates", cone.dim()),
                    got: format!("{}", block.len()),
                });
            }
            Ok(block.clone())
        }
        // the remaining cones are self-dual under this packing
        other => project_cone(other, block),
    }
}
