//! Monte-Carlo sweep records, one CSV row per sampled perturbation.
//!
//! Each seed owns an independent ChaCha stream, so rows can be produced in
//! any order (or in parallel) and still reproduce bit-for-bit.

use crate::phi::phi11;
use crate::robust::is_robustly_stabilizing;
use crate::set::sample_perturbation;
use crate::set::UncertaintySet;
use crate::Result;
use coprime::YoulaFactors;
use lti_core::{hinf_norm_fir, FirSystem, HINF_DEFAULT_TOL};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const MONTE_CARLO_CSV_HEADER: &str =
    "seed,fraction,delta_norm,phi11_gap,robust,phi11_unimodular";

/// One sampled perturbation and the verdicts it produced.
#[derive(Debug, Clone, Copy)]
pub struct MonteCarloRecord {
    pub seed: u64,
    pub fraction: f64,
    /// Measured `||[D_M~ D_N~]||_inf`.
    pub delta_norm: f64,
    /// Measured `||Phi11 - I||_inf`.
    pub phi11_gap: f64,
    /// Whether the controller passes the stack-norm test for this radius.
    pub robust: bool,
    /// Whether the sampled Phi11 is a contraction away from identity.
    pub phi11_unimodular: bool,
}

impl MonteCarloRecord {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{:.6e},{:.9e},{:.9e},{},{}",
            self.seed, self.fraction, self.delta_norm, self.phi11_gap, self.robust,
            self.phi11_unimodular
        )
    }
}

/// Sample one perturbation per seed at the given fraction of the radius and
/// record the small-gain evidence for each.
pub fn monte_carlo_phi11(
    set: &UncertaintySet,
    yf: &YoulaFactors,
    order: usize,
    fraction: f64,
    seeds: &[u64],
) -> Result<Vec<MonteCarloRecord>> {
    let verdict = is_robustly_stabilizing(yf, set.gamma)?;
    seeds
        .iter()
        .map(|&seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pert = sample_perturbation(set, order, fraction, &mut rng)?;
            let phi = phi11(&pert, yf)?;
            let gap = hinf_norm_fir(
                &phi.sub(&FirSystem::identity(phi.rows(), 0))?,
                HINF_DEFAULT_TOL,
            );
            Ok(MonteCarloRecord {
                seed,
                fraction,
                delta_norm: pert.stack_norm(),
                phi11_gap: gap,
                robust: verdict.robust,
                phi11_unimodular: gap < 1.0,
            })
        })
        .collect()
}
