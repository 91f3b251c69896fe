//! The plant-dependent norm constants that weight the synthesis objective.

use crate::Result;
use coprime::Dcf;
use lti_core::{hinf_norm_ss, StateSpace, HINF_DEFAULT_TOL};
use nalgebra::DMatrix;

/// H-infinity norms of the nominal factor stacks entering the upper bound.
#[derive(Debug, Clone, Copy)]
pub struct SynthesisConstants {
    /// ||I - M||_inf, the weight on the Q tail of the objective.
    pub lambda1: f64,
    /// ||[N; M]||_inf over the right factors.
    pub lambda2_right: f64,
    /// ||[N~  M~]||_inf over the left factors; this is the variant the bound uses.
    pub lambda2_left: f64,
    /// ||[Y~; X~]||_inf at Q = 0, the smallest alpha with an obviously
    /// nonempty constraint set.
    pub alpha_floor: f64,
}

/// Stack two systems vertically (shared input, outputs concatenated).
fn vcat(top: &StateSpace, bottom: &StateSpace) -> StateSpace {
    let (nt, nb) = (top.order(), bottom.order());
    let mut a = DMatrix::zeros(nt + nb, nt + nb);
    a.view_mut((0, 0), (nt, nt)).copy_from(&top.a);
    a.view_mut((nt, nt), (nb, nb)).copy_from(&bottom.a);
    let mut b = DMatrix::zeros(nt + nb, top.inputs());
    b.view_mut((0, 0), (nt, top.inputs())).copy_from(&top.b);
    b.view_mut((nt, 0), (nb, bottom.inputs())).copy_from(&bottom.b);
    let (pt, pb) = (top.outputs(), bottom.outputs());
    let mut c = DMatrix::zeros(pt + pb, nt + nb);
    c.view_mut((0, 0), (pt, nt)).copy_from(&top.c);
    c.view_mut((pt, nt), (pb, nb)).copy_from(&bottom.c);
    let mut d = DMatrix::zeros(pt + pb, top.inputs());
    d.view_mut((0, 0), (pt, top.inputs())).copy_from(&top.d);
    d.view_mut((pt, 0), (pb, bottom.inputs())).copy_from(&bottom.d);
    StateSpace::new(a, b, c, d).expect("vcat shapes are consistent")
}

/// Stack two systems horizontally (shared output, inputs concatenated).
fn hcat(left: &StateSpace, right: &StateSpace) -> StateSpace {
    let (nl, nr) = (left.order(), right.order());
    let mut a = DMatrix::zeros(nl + nr, nl + nr);
    a.view_mut((0, 0), (nl, nl)).copy_from(&left.a);
    a.view_mut((nl, nl), (nr, nr)).copy_from(&right.a);
    let (ml, mr) = (left.inputs(), right.inputs());
    let mut b = DMatrix::zeros(nl + nr, ml + mr);
    b.view_mut((0, 0), (nl, ml)).copy_from(&left.b);
    b.view_mut((nl, ml), (nr, mr)).copy_from(&right.b);
    let mut c = DMatrix::zeros(left.outputs(), nl + nr);
    c.view_mut((0, 0), (left.outputs(), nl)).copy_from(&left.c);
    c.view_mut((0, nl), (right.outputs(), nr)).copy_from(&right.c);
    let mut d = DMatrix::zeros(left.outputs(), ml + mr);
    d.view_mut((0, 0), (left.outputs(), ml)).copy_from(&left.d);
    d.view_mut((0, ml), (right.outputs(), mr)).copy_from(&right.d);
    StateSpace::new(a, b, c, d).expect("hcat shapes are consistent")
}

/// I - G as a state-space system (same state, negated C, complemented D).
fn identity_minus(g: &StateSpace) -> StateSpace {
    let d = DMatrix::identity(g.outputs(), g.inputs()) - &g.d;
    StateSpace::new(g.a.clone(), g.b.clone(), -&g.c, d).expect("I - G shapes are consistent")
}

/// Compute the objective constants from exact state-space factor realizations.
///
/// All four norms come from `hinf_norm_ss` on composed realizations, so no FIR
/// truncation enters; the factors of a valid factorization are stable by
/// construction.
pub fn constants(nominal: &Dcf) -> Result<SynthesisConstants> {
    let lambda1 = hinf_norm_ss(&identity_minus(&nominal.m), HINF_DEFAULT_TOL)?;
    let lambda2_right = hinf_norm_ss(&vcat(&nominal.n, &nominal.m), HINF_DEFAULT_TOL)?;
    let lambda2_left = hinf_norm_ss(&hcat(&nominal.n_tilde, &nominal.m_tilde), HINF_DEFAULT_TOL)?;
    let alpha_floor = hinf_norm_ss(&vcat(&nominal.y_tilde, &nominal.x_tilde), HINF_DEFAULT_TOL)?;
    Ok(SynthesisConstants {
        lambda1,
        lambda2_right,
        lambda2_left,
        alpha_floor,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use coprime::{build_dcf, GainPair};
    use lti_core::presets;
    use nalgebra::{dmatrix, Complex};

    fn worked_dcf() -> Dcf {
        let p = presets::worked_scalar();
        build_dcf(&p.sys, &GainPair::new(p.f, p.l)).unwrap()
    }

    #[test]
    fn worked_scalar_lambda1_is_three() {
        // I - M = 1.5/(z - 0.5) peaks at z = 1
        let c = constants(&worked_dcf()).unwrap();
        assert_relative_eq!(c.lambda1, 3.0, epsilon = 1e-6);
    }

    #[test]
    fn zero_feedback_gain_makes_lambda1_vanish() {
        // stable plant, F = 0: M = I exactly
        let plant = lti_core::StateSpace::scalar(0.5, 1.0, 1.0, 0.0);
        let dcf = build_dcf(&plant, &GainPair::new(dmatrix![0.0], dmatrix![0.2])).unwrap();
        let c = constants(&dcf).unwrap();
        assert!(c.lambda1 <= 1e-9, "lambda1 = {}", c.lambda1);
    }

    #[test]
    fn worked_scalar_alpha_floor_matches_stack_norm() {
        // ||[Y~; X~]||_inf = sqrt(36.25) at omega = 0 for the worked plant
        let c = constants(&worked_dcf()).unwrap();
        assert_relative_eq!(c.alpha_floor, 36.25f64.sqrt(), epsilon = 1e-5);
    }

    #[test]
    fn lambda2_variants_match_pointwise_grid_oracle() {
        // independent oracle: evaluate each factor on a dense frequency grid
        // and take sigma_max of the concatenated response
        let dcf = worked_dcf();
        let c = constants(&dcf).unwrap();
        let mut best_right: f64 = 0.0;
        let mut best_left: f64 = 0.0;
        for k in 0..4096 {
            let omega = std::f64::consts::PI * k as f64 / 4095.0;
            let z = Complex::new(omega.cos(), omega.sin());
            let n = dcf.n.eval(z).unwrap();
            let m = dcf.m.eval(z).unwrap();
            let nt = dcf.n_tilde.eval(z).unwrap();
            let mt = dcf.m_tilde.eval(z).unwrap();
            // scalar case: stack norms are root-sum-squares of the entries
            let right = (n[(0, 0)].norm_sqr() + m[(0, 0)].norm_sqr()).sqrt();
            let left = (nt[(0, 0)].norm_sqr() + mt[(0, 0)].norm_sqr()).sqrt();
            best_right = best_right.max(right);
            best_left = best_left.max(left);
        }
        assert_relative_eq!(c.lambda2_right, best_right, max_relative = 1e-4);
        assert_relative_eq!(c.lambda2_left, best_left, max_relative = 1e-4);
    }

    #[test]
    fn concatenations_match_factor_responses() {
        let dcf = worked_dcf();
        let z = Complex::new(0.3, 0.7);
        let v = vcat(&dcf.n, &dcf.m).eval(z).unwrap();
        assert_relative_eq!(v[(0, 0)].re, dcf.n.eval(z).unwrap()[(0, 0)].re, epsilon = 1e-12);
        assert_relative_eq!(v[(1, 0)].re, dcf.m.eval(z).unwrap()[(0, 0)].re, epsilon = 1e-12);
        let h = hcat(&dcf.n_tilde, &dcf.m_tilde).eval(z).unwrap();
        assert_relative_eq!(h[(0, 0)].im, dcf.n_tilde.eval(z).unwrap()[(0, 0)].im, epsilon = 1e-12);
        assert_relative_eq!(h[(0, 1)].im, dcf.m_tilde.eval(z).unwrap()[(0, 0)].im, epsilon = 1e-12);
    }
}
