//! Regenerates the calibration constant in `SampleComplexityParams::default`.
//!
//! The closed-loop identification pipeline runs on the scalar benchmark loop
//! with the nominal plant itself in the loop (true parameter zero), so the
//! measured factor error is pure estimation noise. The printed
//! recommendation makes the a-priori radius cover the worst observed error
//! with ~30% headroom at every horizon:
//!
//!   cargo run -p sysid --example calibrate --release

use coprime::{build_dcf, GainPair};
use lti_core::{presets, NoiseConfig};
use sysid::{
    choose_depth, dual_youla_signals, ho_kalman, ols_hankel, recover_factors,
    simulate_closed_loop, SampleComplexityParams,
};

fn main() -> sysid::Result<()> {
    let pre = presets::worked_scalar();
    let dcf = build_dcf(&pre.sys, &GainPair::new(pre.f, pre.l))?;
    let raw = SampleComplexityParams {
        beta: 1.0,
        script_r: 1.0,
        c_const: 1.0,
        delta_fail: 0.05,
        m: 1,
        p: 1,
    };
    let mut overall: f64 = 0.0;
    println!(
        "{:>6} {:>4} {:>12} {:>12} {:>12} {:>8}",
        "T", "d", "med(meas)", "max(meas)", "theory(c=1)", "ratio"
    );
    for exp in [8u32, 10, 12, 14] {
        let t_len = 1usize << exp;
        let mut measured = Vec::new();
        let mut theory = 0.0_f64;
        let mut d_used = 0;
        for seed in 0..20 {
            let noise = NoiseConfig {
                sigma_nu: 1.0,
                seed,
                ..NoiseConfig::default()
            };
            let traj = simulate_closed_loop(&dcf.plant, &dcf, None, &noise, t_len)?;
            let (e1, e2) = dual_youla_signals(&traj, &dcf)?;
            let d_hat = choose_depth(&e1, &e2, raw.delta_fail)?;
            let est = ols_hankel(&e1, &e2, d_hat)?;
            let id = ho_kalman(&est, 1)?;
            let rec = recover_factors(&dcf, &id, &raw, t_len, 0.0)?;
            measured.push(rec.measured);
            theory = rec.theory;
            d_used = d_hat;
        }
        measured.sort_by(f64::total_cmp);
        let max = *measured.last().unwrap();
        let ratio = max / theory;
        overall = overall.max(ratio);
        println!(
            "{:>6} {:>4} {:>12.5} {:>12.5} {:>12.5} {:>8.5}",
            t_len, d_used, measured[10], max, theory, ratio
        );
    }
    println!(
        "max ratio {overall:.5}; recommended c_const = {:.4}",
        1.3 * overall
    );
    Ok(())
}
