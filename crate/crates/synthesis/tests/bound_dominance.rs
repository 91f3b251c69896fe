//! The central correctness property of the synthesis bound: for every
//! admissible factor perturbation, the closed-form upper bound evaluated at a
//! design (Q, alpha) dominates the actual perturbed H2 objective.

use coprime::{build_dcf, youla_factors, GainPair};
use lti_core::{hinf_norm_fir, presets, HINF_DEFAULT_TOL};
use rand::rngs::StdRng;
use rand::SeedableRng;
use synthesis::{outer_search, upper_bound_value, SynthesisConfig};
use uncertainty::{robust_objective_value, sample_perturbation, UncertaintySet};

#[test]
fn bound_dominates_sampled_perturbations() {
    let gamma = 0.15;
    let preset = presets::worked_scalar();
    let nominal = build_dcf(&preset.sys, &GainPair::new(preset.f, preset.l)).unwrap();

    let config = SynthesisConfig {
        fir_len: 8,
        ..SynthesisConfig::new(gamma)
    };
    let result = outer_search(&config, &nominal).unwrap();
    let q = result.q_star.clone();

    // the synthesis certificate is on 8-tap truncations; re-measure the
    // constraint norm on the evaluation-length stacks so the bound premise
    // holds exactly where the objective is evaluated
    let yf = youla_factors(&nominal, &q).unwrap();
    let stack_norm = hinf_norm_fir(
        &yf.y_tilde_q.stack_rows(&yf.x_tilde_q).unwrap(),
        HINF_DEFAULT_TOL,
    );
    let alpha_eval = result.alpha_star.max(stack_norm * (1.0 + 1e-9));
    assert!(gamma * alpha_eval < 1.0, "evaluation alpha broke the premise");
    let bound = upper_bound_value(&nominal, &q, alpha_eval, gamma).unwrap();

    let set = UncertaintySet::new(gamma, nominal.clone()).unwrap();
    let mut rng = StdRng::seed_from_u64(0xd0_17);
    let mut checked = 0;
    for order in [4usize, 8] {
        for fraction in [0.25, 0.5, 0.75, 0.95] {
            for _ in 0..13 {
                let pert = sample_perturbation(&set, order, fraction, &mut rng).unwrap();
                let value = robust_objective_value(&nominal, &q, &pert).unwrap();
                assert!(
                    value <= bound + 1e-6,
                    "objective {value} exceeds bound {bound} (order {order}, fraction {fraction})"
                );
                checked += 1;
            }
        }
    }
    assert!(checked >= 100, "need at least 100 draws, got {checked}");

    // the synthesized design also certifies robust stabilization at gamma
    let verdict = uncertainty::is_robustly_stabilizing(&yf, gamma).unwrap();
    assert!(
        verdict.stack_norm <= verdict.threshold * (1.0 + 1e-6),
        "stack norm {} vs threshold {}",
        verdict.stack_norm,
        verdict.threshold
    );
}
