use proptest::prelude::*;
use shockfit::model::{check_lax, check_oleinik, shock_speed, slope, RiemannShockSpec, OLEINIK_SAMPLES};
use shockfit::{Poly, ScalarLaw};

fn law_from(coeffs: Vec<f64>) -> ScalarLaw {
    ScalarLaw::new(Poly::new(coeffs), Poly::zero(), "random")
}

fn flux_coeffs() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0..2.0f64, 1..6)
}

proptest! {
    #[test]
    fn slope_is_the_divided_difference(c in flux_coeffs(), a in -2.0..2.0f64, b in -2.0..2.0f64) {
        prop_assume!((a - b).abs() > 1e-3);
        let law = law_from(c);
        let s = slope(&law, a, b);
        let d = shock_speed(&law, a, b).unwrap();
        prop_assert!((s - d).abs() <= 1e-10 * (1.0 + d.abs()), "{s} vs {d}");
    }

    #[test]
    fn slope_is_symmetric(c in flux_coeffs(), a in -2.0..2.0f64, b in -2.0..2.0f64) {
        let law = law_from(c);
        prop_assert!((slope(&law, a, b) - slope(&law, b, a)).abs() <= 1e-12);
    }

    /// `f = sum c_k u^k` with `f'' > 0` on [-2, 2] by construction.
    #[test]
    fn convex_flux_passes_oleinik(
        c2 in 0.2..2.0f64,
        c1 in -1.0..1.0f64,
        c4 in 0.0..0.2f64,
        um in -1.8..1.8f64,
        gap in 0.05..1.5f64,
    ) {
        let up = (um - gap).max(-1.95);
        prop_assume!(um - up > 0.01);
        let law = law_from(vec![0.0, c1, c2, 0.0, c4]);
        let shock = RiemannShockSpec::new(&law, um, up, 0.0).unwrap();
        let check = check_oleinik(&law, &shock, OLEINIK_SAMPLES).unwrap();
        prop_assert!(check.passed);
        prop_assert!(check.worst_margin() > 0.0);
        prop_assert!(check.convexity_certified);
    }

    #[test]
    fn lax_speed_lies_between_characteristic_speeds(c in flux_coeffs(), ul in -2.0..2.0f64, ur in -2.0..2.0f64) {
        prop_assume!((ul - ur).abs() > 1e-3);
        let law = law_from(c);
        let s = shock_speed(&law, ul, ur).unwrap();
        if check_lax(&law, ul, ur, s).ok {
            prop_assert!(law.df(ur) < s && s < law.df(ul));
        }
    }
}
