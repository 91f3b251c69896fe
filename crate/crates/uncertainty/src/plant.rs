//! Unit-circle evaluation of the perturbed plant `(M~ + D_M~)^{-1} (N~ + D_N~)`.

use crate::set::{Perturbation, UncertaintySet};
use crate::{Result, UncertaintyError};
use lti_core::{FirSystem, StateSpace};
use nalgebra::{Complex, DMatrix};

/// Left factor pair of a perturbed plant.
///
/// The nominal factors are kept as exact state-space realizations so the
/// frequency response carries no FIR truncation error; only the perturbation
/// itself is FIR.
#[derive(Debug, Clone)]
pub struct PerturbedPlant {
    pub m_tilde_nominal: StateSpace,
    pub n_tilde_nominal: StateSpace,
    pub d_m_tilde: FirSystem,
    pub d_n_tilde: FirSystem,
}

/// Bundle the nominal left factors with a perturbation.
pub fn perturbed_plant(set: &UncertaintySet, pert: &Perturbation) -> Result<PerturbedPlant> {
    let (p, m) = (set.nominal.p_outputs(), set.nominal.m_inputs());
    if pert.outputs() != p || pert.inputs() != m {
        return Err(UncertaintyError::Dimension {
            context: "perturbed_plant",
            expected: format!("{p} outputs, {m} inputs"),
            got: format!("{} outputs, {} inputs", pert.outputs(), pert.inputs()),
        });
    }
    Ok(PerturbedPlant {
        m_tilde_nominal: set.nominal.m_tilde.clone(),
        n_tilde_nominal: set.nominal.n_tilde.clone(),
        d_m_tilde: pert.d_m_tilde.clone(),
        d_n_tilde: pert.d_n_tilde.clone(),
    })
}

impl PerturbedPlant {
    /// FIR views (M~ + D_M~, N~ + D_N~) truncated to degree `n_taps`.
    pub fn factor_pair(&self, n_taps: usize) -> Result<(FirSystem, FirSystem)> {
        let mt = self
            .m_tilde_nominal
            .markov(n_taps)
            .add(&self.d_m_tilde.truncate(n_taps))?;
        let nt = self
            .n_tilde_nominal
            .markov(n_taps)
            .add(&self.d_n_tilde.truncate(n_taps))?;
        Ok((mt, nt))
    }

    /// `G(e^{j omega}) = (M~ + D_M~)^{-1} (N~ + D_N~)` at one frequency.
    pub fn eval(&self, omega: f64) -> Result<DMatrix<Complex<f64>>> {
        let z = Complex::from_polar(1.0, omega);
        let mt = self.m_tilde_nominal.eval(z)? + self.d_m_tilde.eval(omega);
        let nt = self.n_tilde_nominal.eval(z)? + self.d_n_tilde.eval(omega);
        let sol = mt
            .lu()
            .solve(&nt)
            .ok_or(UncertaintyError::SingularFrequency { omega })?;
        if sol.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(UncertaintyError::SingularFrequency { omega });
        }
        Ok(sol)
    }

    /// Uniform frequency grid on [0, pi], inclusive of both endpoints.
    pub fn frequency_grid(
        &self,
        points: usize,
    ) -> Result<Vec<(f64, DMatrix<Complex<f64>>)>> {
        if points < 2 {
            return Err(UncertaintyError::InvalidArg(
                "frequency grid needs at least 2 points".into(),
            ));
        }
        (0..points)
            .map(|k| {
                let omega = std::f64::consts::PI * k as f64 / (points - 1) as f64;
                Ok((omega, self.eval(omega)?))
            })
            .collect()
    }
}
