use std::sync::Arc;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use shockfit::extension::{extend_half_line, HalfLineData, Profile, Shape, Side};
use shockfit::harness::config::random_spline;

/// Sup norms of value, negative slope, positive slope and |slope| on `[lo, hi]`.
fn norms(p: &dyn Profile, lo: f64, hi: f64) -> [f64; 4] {
    let n = 8001;
    let mut out = [0.0f64; 4];
    for k in 0..n {
        let x = lo + (hi - lo) * k as f64 / (n - 1) as f64;
        let (v, s) = (p.value(x), p.slope(x));
        out[0] = out[0].max(v.abs());
        out[1] = out[1].max(-s);
        out[2] = out[2].max(s);
        out[3] = out[3].max(s.abs());
    }
    out
}

const ROUNDING: f64 = 1e-14;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn extension_bounds_and_gluing(seed in any::<u64>(), c0 in 1.0001..3.0f64, side_left in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spline = random_spline(&mut rng, -1.5, 2.5, 0.7);
        let shape: Arc<dyn Profile> = Arc::new(Shape::Spline(spline));
        let side = if side_left { Side::Left } else { Side::Right };
        let data = HalfLineData::new(side, 0.5, shape.clone());
        let ext = extend_half_line(&data, c0).unwrap();
        let dir = if side_left { -1.0 } else { 1.0 };
        let (dlo, dhi) = if side_left { (-1.6, 0.5) } else { (0.5, 2.6) };
        let d = norms(shape.as_ref(), dlo, dhi);
        let reach = 2.0 * ext.delta.max(1e-3);
        let (elo, ehi) = if side_left { (0.5, 0.5 + reach) } else { (0.5 - reach, 0.5) };
        let e = norms(&ext, elo, ehi);
        let tol = |b: f64| b * (1.0 + ROUNDING) + 1e-300;
        prop_assert!(e[0] <= tol(c0 * d[0]), "sup {} > {} * {}", e[0], c0, d[0]);
        prop_assert!(e[1] <= tol(d[1]));
        prop_assert!(e[2] <= tol(d[2]));
        prop_assert!(e[3] <= tol(d[3]));

        // one-sided limits at the anchor and at the blend edge
        let h = 1e-10;
        let edge = 0.5 - dir * ext.delta;
        for x in [0.5, edge] {
            let (vm, vp) = (ext.value(x - h), ext.value(x + h));
            prop_assert!((vp - vm).abs() <= 1e-7 * (1.0 + d[3]), "value jump at {x}");
            let (sm, sp) = (ext.slope(x - h), ext.slope(x + h));
            prop_assert!((sp - sm).abs() <= 1e-4 * (1.0 + d[3]), "slope jump at {x}: {sm} vs {sp}");
        }
        // blend derivative is (1 - |r| / delta) times the boundary slope
        if ext.delta > 0.0 {
            let r = 0.3 * ext.delta;
            let want = (1.0 - 0.3) * data.boundary_slope;
            prop_assert!((ext.slope(0.5 - dir * r) - want).abs() <= 1e-12 * (1.0 + want.abs()));
        }
    }
}
