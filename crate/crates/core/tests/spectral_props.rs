use std::sync::Arc;

use num_complex::Complex64;
use proptest::prelude::*;
use shockfit::spectral::{resolvent_solve, Grid, ResolventProblem, ResolventSolution};

const STRIDE: usize = 64;

/// `a = s (a0 + a1 sin x)`, `b = b0 + b1 cos x`, `F = f0 + f1 cos^2 x`.
#[derive(Debug, Clone, Copy)]
struct Coeffs {
    s: f64,
    a0: f64,
    a1: f64,
    b0: f64,
    b1: f64,
    f0: f64,
    f1: f64,
    shift: f64,
}

fn coeffs() -> impl Strategy<Value = Coeffs> {
    (any::<bool>(), 1.0..2.5f64, 0.0..1.0f64, -1.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64, 0.1..1.0f64, -1.0..1.0f64)
        .prop_map(|(pos, a0, r, b0, b1, f0, f1, shift)| Coeffs {
            s: if pos { 1.0 } else { -1.0 },
            a0,
            a1: r * (a0 - 0.5),
            b0,
            b1,
            f0,
            f1,
            shift,
        })
}

fn problem(c: Coeffs, lambda: Complex64, sigma: f64, offset: f64) -> ResolventProblem {
    let a = Arc::new(move |x: f64| c.s * (c.a0 + c.a1 * (x + offset).sin()) - sigma);
    let b = Arc::new(move |x: f64| c.b0 + c.b1 * (x + offset).cos());
    let f = Arc::new(move |x: f64| {
        let k = (x + offset + c.shift).cos();
        Complex64::new(c.f0 + c.f1 * k * k, 0.0)
    });
    let margin = lambda.re - (c.b0 + c.b1);
    let grid = Grid::for_margin(-offset, c.a0 + c.a1, margin).unwrap();
    ResolventProblem::new(a, b, lambda, f, grid)
}

fn interior_nodes(sol: &ResolventSolution) -> Vec<f64> {
    let (lo, hi) = sol.interior();
    sol.grid().nodes().step_by(STRIDE).filter(|x| *x >= lo + 0.01 && *x <= hi - 0.01).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn sup_bound_and_residual(c in coeffs(), m in 1.0..3.0f64, im in -2.0..2.0f64) {
        let lambda = Complex64::new(c.b0 + c.b1 + m, im);
        let sol = resolvent_solve(&problem(c, lambda, 0.0, 0.0)).unwrap();
        prop_assert!(sol.sup_norm() <= sol.sup_bound() + 1e-6);
        prop_assert!(sol.residual(STRIDE).unwrap() <= 1e-8 * sol.forcing_norm());
    }

    #[test]
    fn positive_forcing_gives_positive_solution(c in coeffs(), m in 1.0..3.0f64) {
        let lambda = Complex64::new(c.b0 + c.b1 + m, 0.0);
        let sol = resolvent_solve(&problem(c, lambda, 0.0, 0.0)).unwrap();
        for x in interior_nodes(&sol) {
            prop_assert!(sol.eval(x).unwrap().re >= -1e-10);
        }
    }

    /// Constant `b`: `||v'|| <= ||F'|| / (Re lambda - b + inf a')`.
    #[test]
    fn gradient_bound(c in coeffs(), m in 1.0..3.0f64, im in -2.0..2.0f64) {
        let c = Coeffs { b1: 0.0, ..c };
        let lambda = Complex64::new(c.b0 + c.a1 + m, im);
        let sol = resolvent_solve(&problem(c, lambda, 0.0, 0.0)).unwrap();
        let df_sup = c.f1;
        let bound = df_sup / (lambda.re - c.b0 - c.a1);
        for x in interior_nodes(&sol) {
            prop_assert!(sol.derivative(x).unwrap().norm() <= bound + 1e-5, "x = {x}");
        }
    }

    /// With `a - sigma`, the solution satisfies the rest-frame equation up to
    /// the transport term `sigma v'`, and shifting the coefficients shifts
    /// the solution.
    #[test]
    fn frame_change(c in coeffs(), m in 1.0..3.0f64, sigma in -0.4..0.4f64, offset in -2.0..2.0f64) {
        let lambda = Complex64::new(c.b0 + c.b1 + m, 0.5);
        let base = problem(c, lambda, 0.0, 0.0);
        let sol = resolvent_solve(&problem(c, lambda, sigma, 0.0)).unwrap();
        let tol = 1e-8 * sol.forcing_norm();
        for x in interior_nodes(&sol) {
            let (v, dv) = (sol.eval(x).unwrap(), sol.derivative(x).unwrap());
            let rest = lambda * v + dv * (base.a)(x) - v * (base.b)(x) - (base.forcing)(x);
            prop_assert!((rest - dv * sigma).norm() <= tol, "x = {x}");
        }

        let plain = resolvent_solve(&base).unwrap();
        let moved = resolvent_solve(&problem(c, lambda, 0.0, offset)).unwrap();
        for x in interior_nodes(&moved).into_iter().step_by(4) {
            let (p, q) = (moved.eval(x).unwrap(), plain.eval(x + offset));
            if let Ok(q) = q {
                prop_assert!((p - q).norm() <= 1e-8 * (1.0 + q.norm()), "x = {x}");
            }
        }
    }
}
