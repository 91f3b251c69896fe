//! The gamma-radius uncertainty set and FIR perturbations of its left factors.

use crate::{Result, UncertaintyError};
use coprime::Dcf;
use lti_core::{hinf_norm_fir, FirJson, FirSystem, HINF_DEFAULT_TOL};
use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// All plants `(M~ + D_M~)^{-1} (N~ + D_N~)` whose perturbation pair satisfies
/// `||[D_M~ D_N~]||_inf < gamma`, centered on a nominal factorization.
#[derive(Debug, Clone)]
pub struct UncertaintySet {
    pub gamma: f64,
    pub nominal: Dcf,
}

impl UncertaintySet {
    pub fn new(gamma: f64, nominal: Dcf) -> Result<Self> {
        if !(gamma > 0.0) {
            return Err(UncertaintyError::InvalidArg(format!(
                "uncertainty radius must be positive, got {gamma}"
            )));
        }
        Ok(Self { gamma, nominal })
    }

    /// Strict membership: the measured stack norm stays below the radius.
    pub fn contains(&self, pert: &Perturbation) -> bool {
        pert.stack_norm() < self.gamma
    }
}

/// Additive FIR perturbation of the coprime factors.
///
/// The left pair (`d_m_tilde`, `d_n_tilde`) defines the plant; the right pair
/// is not free — it is pinned down (up to the Bezout kernel) by requiring the
/// perturbed left and right factorizations to describe the same plant — so it
/// is carried as an optional attachment produced by
/// [`crate::solve_right_factors`].
#[derive(Debug, Clone)]
pub struct Perturbation {
    /// p x p additive term on M~.
    pub d_m_tilde: FirSystem,
    /// p x m additive term on N~.
    pub d_n_tilde: FirSystem,
    /// m x m additive term on M, if derived.
    pub d_m: Option<FirSystem>,
    /// p x m additive term on N, if derived.
    pub d_n: Option<FirSystem>,
}

impl Perturbation {
    pub fn new(d_m_tilde: FirSystem, d_n_tilde: FirSystem) -> Result<Self> {
        if d_m_tilde.rows() != d_m_tilde.cols() {
            return Err(UncertaintyError::Dimension {
                context: "Perturbation d_m_tilde",
                expected: "square".into(),
                got: format!("{}x{}", d_m_tilde.rows(), d_m_tilde.cols()),
            });
        }
        if d_n_tilde.rows() != d_m_tilde.rows() {
            return Err(UncertaintyError::Dimension {
                context: "Perturbation d_n_tilde",
                expected: format!("{} rows", d_m_tilde.rows()),
                got: format!("{} rows", d_n_tilde.rows()),
            });
        }
        Ok(Self {
            d_m_tilde,
            d_n_tilde,
            d_m: None,
            d_n: None,
        })
    }

    /// The zero perturbation with `order + 1` (all-zero) taps.
    pub fn zero(p: usize, m: usize, order: usize) -> Self {
        Self {
            d_m_tilde: FirSystem::zeros(p, p, order),
            d_n_tilde: FirSystem::zeros(p, m, order),
            d_m: None,
            d_n: None,
        }
    }

    /// Attach a derived right-factor pair (d_n is p x m, d_m is m x m).
    pub fn with_right_factors(mut self, d_n: FirSystem, d_m: FirSystem) -> Result<Self> {
        let (p, m) = (self.outputs(), self.inputs());
        if d_n.rows() != p || d_n.cols() != m || d_m.rows() != m || d_m.cols() != m {
            return Err(UncertaintyError::Dimension {
                context: "Perturbation right factors",
                expected: format!("d_n {}x{}, d_m {}x{}", p, m, m, m),
                got: format!(
                    "d_n {}x{}, d_m {}x{}",
                    d_n.rows(),
                    d_n.cols(),
                    d_m.rows(),
                    d_m.cols()
                ),
            });
        }
        self.d_n = Some(d_n);
        self.d_m = Some(d_m);
        Ok(self)
    }

    /// Number of plant outputs p.
    pub fn outputs(&self) -> usize {
        self.d_m_tilde.rows()
    }

    /// Number of plant inputs m.
    pub fn inputs(&self) -> usize {
        self.d_n_tilde.cols()
    }

    /// The row stack [D_M~ D_N~] whose H-infinity norm measures set membership.
    pub fn stack(&self) -> FirSystem {
        self.d_m_tilde
            .stack_cols(&self.d_n_tilde)
            .expect("perturbation factor pair shares row count")
    }

    /// Measured `||[D_M~ D_N~]||_inf`.
    pub fn stack_norm(&self) -> f64 {
        hinf_norm_fir(&self.stack(), HINF_DEFAULT_TOL)
    }

    /// Scale the left pair; any attached right factors are dropped because
    /// they do not scale linearly with the left pair.
    pub fn scale(&self, s: f64) -> Self {
        Self {
            d_m_tilde: self.d_m_tilde.scale(s),
            d_n_tilde: self.d_n_tilde.scale(s),
            d_m: None,
            d_n: None,
        }
    }
}

/// Draw a random FIR perturbation direction of the given order and rescale it
/// so the measured stack norm lands exactly on `fraction * gamma`.
///
/// `fraction = 0` returns the zero perturbation; the result is deterministic
/// in the caller's RNG state, so disjoint seeds give independent draws.
pub fn sample_perturbation(
    set: &UncertaintySet,
    order: usize,
    fraction: f64,
    rng: &mut impl Rng,
) -> Result<Perturbation> {
    if order < 1 {
        return Err(UncertaintyError::InvalidArg(format!(
            "perturbation order must be at least 1, got {order}"
        )));
    }
    if !(0.0..1.0).contains(&fraction) {
        return Err(UncertaintyError::InvalidArg(format!(
            "fraction must lie in [0, 1) to keep membership strict, got {fraction}"
        )));
    }
    let p = set.nominal.p_outputs();
    let m = set.nominal.m_inputs();
    if fraction == 0.0 {
        return Ok(Perturbation::zero(p, m, order));
    }
    let pert = Perturbation::new(
        random_fir(rng, p, p, order),
        random_fir(rng, p, m, order),
    )?;
    let norm = pert.stack_norm();
    if norm == 0.0 {
        return Err(UncertaintyError::InvalidArg(
            "sampled a zero direction; cannot rescale".into(),
        ));
    }
    Ok(pert.scale(fraction * set.gamma / norm))
}

fn random_fir(rng: &mut impl Rng, rows: usize, cols: usize, degree: usize) -> FirSystem {
    let taps = (0..=degree)
        .map(|_| DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0)))
        .collect();
    FirSystem::from_taps(taps).expect("random taps share dimensions")
}

/// Serialization image of a perturbation (taps only).
#[derive(Debug, Serialize, Deserialize)]
pub struct PerturbationJson {
    pub d_m_tilde: FirJson,
    pub d_n_tilde: FirJson,
    pub d_m: Option<FirJson>,
    pub d_n: Option<FirJson>,
}

impl From<&Perturbation> for PerturbationJson {
    fn from(p: &Perturbation) -> Self {
        Self {
            d_m_tilde: (&p.d_m_tilde).into(),
            d_n_tilde: (&p.d_n_tilde).into(),
            d_m: p.d_m.as_ref().map(FirJson::from),
            d_n: p.d_n.as_ref().map(FirJson::from),
        }
    }
}

impl TryFrom<&PerturbationJson> for Perturbation {
    type Error = UncertaintyError;
    fn try_from(j: &PerturbationJson) -> Result<Perturbation> {
        let base = Perturbation::new(
            FirSystem::try_from(&j.d_m_tilde)?,
            FirSystem::try_from(&j.d_n_tilde)?,
        )?;
        match (&j.d_n, &j.d_m) {
            (Some(dn), Some(dm)) => {
                base.with_right_factors(FirSystem::try_from(dn)?, FirSystem::try_from(dm)?)
            }
            (None, None) => Ok(base),
            _ => Err(UncertaintyError::InvalidArg(
                "right factors must be attached as a pair".into(),
            )),
        }
    }
}
