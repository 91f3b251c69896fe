//! Construction and validation of doubly-coprime factorizations.

use crate::{CoprimeError, Result, BEZOUT_TOL};
use lti_core::ss::{matrix_to_rows, rows_to_matrix, StateSpaceJson};
use lti_core::{FirSystem, StateSpace};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Default number of taps kept when a factor is viewed as an FIR system.
pub const DEFAULT_FIR_LEN: usize = 32;

/// Stabilizing state-feedback and estimation gains for one plant.
#[derive(Debug, Clone, PartialEq)]
pub struct GainPair {
    /// State feedback, m x n.
    pub f: DMatrix<f64>,
    /// Estimation gain, n x p.
    pub l: DMatrix<f64>,
}

impl GainPair {
    pub fn new(f: DMatrix<f64>, l: DMatrix<f64>) -> Self {
        Self { f, l }
    }
}

/// A doubly-coprime factorization of a plant under a fixed gain pair.
///
/// The right factors satisfy G = N M^-1, the left factors G = M~^-1 N~, and
/// the two-sided Bezout identity ties all eight together. Each factor is kept
/// as an exact state-space realization; FIR views are derived on demand.
#[derive(Debug, Clone)]
pub struct Dcf {
    pub plant: StateSpace,
    pub gains: GainPair,
    pub m: StateSpace,
    pub n: StateSpace,
    pub m_tilde: StateSpace,
    pub n_tilde: StateSpace,
    pub x: StateSpace,
    pub y: StateSpace,
    pub x_tilde: StateSpace,
    pub y_tilde: StateSpace,
    /// Tap count used by default when this factorization feeds FIR compositions.
    pub fir_len: usize,
}

/// FIR views of the eight factors, truncated to a common length.
///
/// Identified (rebased) factorizations that never existed in state-space form
/// are also carried in this shape, so everything downstream of synthesis works
/// from `FactorSet` alone.
#[derive(Debug, Clone)]
pub struct FactorSet {
    pub m: FirSystem,
    pub n: FirSystem,
    pub m_tilde: FirSystem,
    pub n_tilde: FirSystem,
    pub x: FirSystem,
    pub y: FirSystem,
    pub x_tilde: FirSystem,
    pub y_tilde: FirSystem,
}

impl Dcf {
    /// Number of control inputs m.
    pub fn m_inputs(&self) -> usize {
        self.plant.inputs()
    }

    /// Number of measured outputs p.
    pub fn p_outputs(&self) -> usize {
        self.plant.outputs()
    }

    /// Plant order n.
    pub fn order(&self) -> usize {
        self.plant.order()
    }

    /// FIR views of all eight factors with `n_taps` taps beyond tap zero.
    pub fn factors(&self, n_taps: usize) -> FactorSet {
        FactorSet {
            m: self.m.markov(n_taps),
            n: self.n.markov(n_taps),
            m_tilde: self.m_tilde.markov(n_taps),
            n_tilde: self.n_tilde.markov(n_taps),
            x: self.x.markov(n_taps),
            y: self.y.markov(n_taps),
            x_tilde: self.x_tilde.markov(n_taps),
            y_tilde: self.y_tilde.markov(n_taps),
        }
    }

    /// FIR views at the configured default length.
    pub fn factor_set(&self) -> FactorSet {
        self.factors(self.fir_len)
    }

    /// Largest fraction of factor tap energy beyond the configured FIR length.
    ///
    /// Values above roughly 1e-6 mean the truncated views are materially lossy
    /// and a longer `fir_len` should be used.
    pub fn tail_fraction(&self) -> f64 {
        let probe = (4 * self.fir_len).max(self.fir_len + 64);
        [
            &self.m,
            &self.n,
            &self.m_tilde,
            &self.n_tilde,
            &self.x,
            &self.y,
            &self.x_tilde,
            &self.y_tilde,
        ]
        .iter()
        .map(|s| {
            let long = s.markov(probe);
            let total: f64 = long.taps().iter().map(|t| t.norm_squared()).sum();
            if total == 0.0 {
                return 0.0;
            }
            let tail: f64 = long
                .taps()
                .iter()
                .skip(self.fir_len + 1)
                .map(|t| t.norm_squared())
                .sum();
            tail / total
        })
        .fold(0.0, f64::max)
    }
}

impl FactorSet {
    pub fn m_inputs(&self) -> usize {
        self.m.rows()
    }

    pub fn p_outputs(&self) -> usize {
        self.m_tilde.rows()
    }

    /// Common tap degree of the stored views.
    pub fn degree(&self) -> usize {
        self.m.degree()
    }
}

fn check_gains(plant: &StateSpace, gains: &GainPair) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let (n, m, p) = (plant.order(), plant.inputs(), plant.outputs());
    if gains.f.nrows() != m || gains.f.ncols() != n {
        return Err(CoprimeError::Dimension {
            context: "gain F",
            expected: format!("{m}x{n}"),
            got: format!("{}x{}", gains.f.nrows(), gains.f.ncols()),
        });
    }
    if gains.l.nrows() != n || gains.l.ncols() != p {
        return Err(CoprimeError::Dimension {
            context: "gain L",
            expected: format!("{n}x{p}"),
            got: format!("{}x{}", gains.l.nrows(), gains.l.ncols()),
        });
    }
    let a_f = &plant.a + &plant.b * &gains.f;
    let a_l = &plant.a - &gains.l * &plant.c;
    let rf = lti_core::spectral_radius(&a_f)?;
    if rf >= 1.0 {
        return Err(CoprimeError::NotStabilizing { gain: "F", radius: rf });
    }
    let rl = lti_core::spectral_radius(&a_l)?;
    if rl >= 1.0 {
        return Err(CoprimeError::NotStabilizing { gain: "L", radius: rl });
    }
    Ok((a_f, a_l))
}

/// Build the eight-factor doubly-coprime factorization for `plant` under `gains`.
pub fn build_dcf_with_len(plant: &StateSpace, gains: &GainPair, fir_len: usize) -> Result<Dcf> {
    let (a_f, a_l) = check_gains(plant, gains)?;
    let (n, m, p) = (plant.order(), plant.inputs(), plant.outputs());
    let c_f = &plant.c + &plant.d * &gains.f;
    let b_l = &plant.b - &gains.l * &plant.d;
    let eye_m = DMatrix::identity(m, m);
    let eye_p = DMatrix::identity(p, p);

    let ss = |a: &DMatrix<f64>, b: &DMatrix<f64>, c: DMatrix<f64>, d: DMatrix<f64>| {
        StateSpace::new(a.clone(), b.clone(), c, d).map_err(CoprimeError::from)
    };

    let dcf = Dcf {
        m: ss(&a_f, &plant.b, gains.f.clone(), eye_m.clone())?,
        n: ss(&a_f, &plant.b, c_f.clone(), plant.d.clone())?,
        m_tilde: ss(&a_l, &gains.l, -&plant.c, eye_p.clone())?,
        n_tilde: ss(&a_l, &b_l, plant.c.clone(), plant.d.clone())?,
        x: ss(&a_l, &gains.l, -&gains.f, DMatrix::zeros(m, p))?,
        y: ss(&a_l, &b_l, -&gains.f, eye_m)?,
        x_tilde: ss(&a_f, &gains.l, -&gains.f, DMatrix::zeros(m, p))?,
        y_tilde: ss(&a_f, &gains.l, c_f, eye_p)?,
        plant: plant.clone(),
        gains: gains.clone(),
        fir_len,
    };
    debug_assert_eq!(dcf.order(), n);

    let residual = bezout_residual(&dcf, fir_len);
    if residual > BEZOUT_TOL {
        return Err(CoprimeError::BezoutResidual { residual, tol: BEZOUT_TOL });
    }
    Ok(dcf)
}

/// `build_dcf_with_len` at the default FIR length.
pub fn build_dcf(plant: &StateSpace, gains: &GainPair) -> Result<Dcf> {
    build_dcf_with_len(plant, gains, DEFAULT_FIR_LEN)
}

/// Two-sided Bezout residual of the FIR views at `n_taps` taps.
///
/// Both block products are formed tap-by-tap; the result is the largest
/// Frobenius deviation from the identity over all taps. Because product taps
/// up to the truncation length only involve factor taps up to that length, the
/// reported value is exact for the inspected range.
pub fn bezout_residual_fir(fs: &FactorSet, n_taps: usize) -> f64 {
    let blocks = |a: &FirSystem, b: &FirSystem| a.series(b, n_taps).expect("factor dims agree");
    let m_dim = fs.m_inputs();
    let p_dim = fs.p_outputs();
    let neg = |s: &FirSystem| s.scale(-1.0);

    // left * right
    let lr = [
        blocks(&fs.y, &fs.m).add(&blocks(&fs.x, &fs.n)).expect("add"),
        blocks(&fs.y, &neg(&fs.x_tilde))
            .add(&blocks(&fs.x, &fs.y_tilde))
            .expect("add"),
        blocks(&neg(&fs.n_tilde), &fs.m).add(&blocks(&fs.m_tilde, &fs.n)).expect("add"),
        blocks(&neg(&fs.n_tilde), &neg(&fs.x_tilde))
            .add(&blocks(&fs.m_tilde, &fs.y_tilde))
            .expect("add"),
    ];
    // right * left
    let rl = [
        blocks(&fs.m, &fs.y).add(&blocks(&neg(&fs.x_tilde), &neg(&fs.n_tilde))).expect("add"),
        blocks(&fs.m, &fs.x).add(&blocks(&neg(&fs.x_tilde), &fs.m_tilde)).expect("add"),
        blocks(&fs.n, &fs.y).add(&blocks(&fs.y_tilde, &neg(&fs.n_tilde))).expect("add"),
        blocks(&fs.n, &fs.x).add(&blocks(&fs.y_tilde, &fs.m_tilde)).expect("add"),
    ];

    let mut worst = 0.0_f64;
    let diag = [true, false, false, true];
    for (prods, dims) in [(&lr, [m_dim, p_dim]), (&rl, [m_dim, p_dim])] {
        for (idx, block) in prods.iter().enumerate() {
            let dim = dims[idx / 2];
            for (j, tap) in block.taps().iter().enumerate() {
                let target = if diag[idx] && j == 0 {
                    DMatrix::identity(dim, dim)
                } else {
                    DMatrix::zeros(tap.nrows(), tap.ncols())
                };
                worst = worst.max((tap - target).norm());
            }
        }
    }
    worst
}

/// Bezout residual of a factorization at `n_taps` taps.
pub fn bezout_residual(dcf: &Dcf, n_taps: usize) -> f64 {
    bezout_residual_fir(&dcf.factors(n_taps), n_taps)
}

/// The map P = (zI - A_F)^-1 B from pseudo-input to state, realized as
/// (A_F, B, I, 0). Satisfies F P = M - I tap-wise.
pub fn p_system(plant: &StateSpace, f: &DMatrix<f64>) -> Result<StateSpace> {
    let (n, m) = (plant.order(), plant.inputs());
    if f.nrows() != m || f.ncols() != n {
        return Err(CoprimeError::Dimension {
            context: "p_system F",
            expected: format!("{m}x{n}"),
            got: format!("{}x{}", f.nrows(), f.ncols()),
        });
    }
    let a_f = &plant.a + &plant.b * f;
    StateSpace::new(a_f, plant.b.clone(), DMatrix::identity(n, n), DMatrix::zeros(n, m))
        .map_err(CoprimeError::from)
}

/// The observer-based controller u = F x^ with the steady-state Luenberger
/// observer, realized as (A + BF - L C_F, L, F, 0) from y to u.
///
/// Feeding the plant with `u = central_controller(y)` realizes the Youla
/// controller at Q = 0, i.e. the y -> u map equals -(Y^-1 X).
pub fn central_controller(dcf: &Dcf) -> StateSpace {
    let c_f = &dcf.plant.c + &dcf.plant.d * &dcf.gains.f;
    let a_k = &dcf.plant.a + &dcf.plant.b * &dcf.gains.f - &dcf.gains.l * c_f;
    StateSpace::new(
        a_k,
        dcf.gains.l.clone(),
        dcf.gains.f.clone(),
        DMatrix::zeros(dcf.m_inputs(), dcf.p_outputs()),
    )
    .expect("controller realization dimensions are consistent")
}

/// Serialized form of a factorization: the eight realizations plus gains.
#[derive(Debug, Serialize, Deserialize)]
pub struct DcfJson {
    pub plant: StateSpaceJson,
    pub f: Vec<Vec<f64>>,
    pub l: Vec<Vec<f64>>,
    pub m: StateSpaceJson,
    pub n: StateSpaceJson,
    pub m_tilde: StateSpaceJson,
    pub n_tilde: StateSpaceJson,
    pub x: StateSpaceJson,
    pub y: StateSpaceJson,
    pub x_tilde: StateSpaceJson,
    pub y_tilde: StateSpaceJson,
    pub fir_len: usize,
}

impl From<&Dcf> for DcfJson {
    fn from(d: &Dcf) -> Self {
        Self {
            plant: (&d.plant).into(),
            f: matrix_to_rows(&d.gains.f),
            l: matrix_to_rows(&d.gains.l),
            m: (&d.m).into(),
            n: (&d.n).into(),
            m_tilde: (&d.m_tilde).into(),
            n_tilde: (&d.n_tilde).into(),
            x: (&d.x).into(),
            y: (&d.y).into(),
            x_tilde: (&d.x_tilde).into(),
            y_tilde: (&d.y_tilde).into(),
            fir_len: d.fir_len,
        }
    }
}

impl TryFrom<&DcfJson> for Dcf {
    type Error = CoprimeError;

    fn try_from(j: &DcfJson) -> Result<Self> {
        let dcf = Dcf {
            plant: StateSpace::try_from(&j.plant)?,
            gains: GainPair::new(rows_to_matrix(&j.f)?, rows_to_matrix(&j.l)?),
            m: StateSpace::try_from(&j.m)?,
            n: StateSpace::try_from(&j.n)?,
            m_tilde: StateSpace::try_from(&j.m_tilde)?,
            n_tilde: StateSpace::try_from(&j.n_tilde)?,
            x: StateSpace::try_from(&j.x)?,
            y: StateSpace::try_from(&j.y)?,
            x_tilde: StateSpace::try_from(&j.x_tilde)?,
            y_tilde: StateSpace::try_from(&j.y_tilde)?,
            fir_len: j.fir_len,
        };
        let residual = bezout_residual(&dcf, dcf.fir_len);
        if residual > BEZOUT_TOL {
            return Err(CoprimeError::BezoutResidual { residual, tol: BEZOUT_TOL });
        }
        Ok(dcf)
    }
}
