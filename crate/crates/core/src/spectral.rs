//! Resolvent of the transport operator `L v = -a v' + b v` and the
//! spectrum of the linearization about a Riemann shock.
//!
//! For `Re(lambda) > sup b` the bounded solution of `(lambda - L) v = F` is
//! `v(x) = int_{-inf}^x exp(Phi(x) - Phi(y)) F(y) / a(y) dy` with
//! `Phi' = (b - lambda) / a` when `a > 0`, and the mirrored integral from
//! `+inf` when `a < 0`. It is evaluated cell by cell,
//! `v(q) = exp(Phi(q) - Phi(p)) v(p) + int_p^q exp(Phi(q) - Phi(y)) F(y) / a(y) dy`,
//! starting from zero at the upstream end of a truncated grid.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{check_oleinik, RiemannShockSpec, ScalarLaw, OLEINIK_SAMPLES};

pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type ComplexFn = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

pub const DEFAULT_NODES: usize = 8193;
pub const MAX_NODES: usize = 10_000;
/// Grid half-width in units of `sup|a| / (Re(lambda) - sup b)`.
pub const HALF_WIDTH_FACTOR: f64 = 40.0;
/// Decay lengths after which the zero start value is forgotten to 1e-10.
const FORGET_LENGTHS: f64 = 25.0;
/// Step of the finite-difference stencils used for residuals.
const FD_STEP: f64 = 1e-3;

const GL_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
const GL_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189,
    0.478_628_670_499_366,
    0.568_888_888_888_889,
    0.478_628_670_499_366,
    0.236_926_885_056_189,
];

/// Oriented Gauss–Legendre integral over `[p, q]`.
fn gauss<T, F>(p: f64, q: f64, f: F) -> T
where
    T: std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T> + Default,
    F: Fn(f64) -> T,
{
    let half = 0.5 * (q - p);
    let mid = 0.5 * (p + q);
    let mut acc = T::default();
    for (xi, w) in GL_NODES.iter().zip(GL_WEIGHTS) {
        acc = acc + f(mid + half * xi) * (w * half);
    }
    acc
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Grid {
    pub fn new(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(hi > lo) || !(3..=MAX_NODES).contains(&n) {
            return Err(Error::Parameter(format!(
                "grid needs lo < hi and 3..={MAX_NODES} nodes, got [{lo}, {hi}] with {n}"
            )));
        }
        Ok(Grid { lo, hi, n })
    }

    /// Grid centred at `center` wide enough for a declared margin.
    pub fn for_margin(center: f64, sup_abs_a: f64, margin: f64) -> Result<Self> {
        if !(margin > 0.0) {
            return Err(Error::Parameter(format!("grid margin must be positive, got {margin}")));
        }
        let half = HALF_WIDTH_FACTOR * sup_abs_a / margin;
        Grid::new(center - half, center + half, DEFAULT_NODES)
    }

    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / (self.n - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.hi
        } else {
            self.lo + i as f64 * self.spacing()
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(|i| self.node(i))
    }
}

#[derive(Clone)]
pub struct ResolventProblem {
    pub a: RealFn,
    pub b: RealFn,
    pub lambda: Complex64,
    pub forcing: ComplexFn,
    pub grid: Grid,
    /// Required excess of `Re(lambda)` over `sup b`.
    pub margin: f64,
}

impl fmt::Debug for ResolventProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ResolventProblem")
            .field("lambda", &self.lambda)
            .field("grid", &self.grid)
            .field("margin", &self.margin)
            .finish_non_exhaustive()
    }
}

impl ResolventProblem {
    pub fn new(a: RealFn, b: RealFn, lambda: Complex64, forcing: ComplexFn, grid: Grid) -> Self {
        ResolventProblem { a, b, lambda, forcing, grid, margin: 0.0 }
    }

    /// Constant coefficients, usable with closures that capture nothing else.
    pub fn constant(a: f64, b: f64, lambda: Complex64, forcing: ComplexFn, grid: Grid) -> Self {
        ResolventProblem::new(Arc::new(move |_| a), Arc::new(move |_| b), lambda, forcing, grid)
    }

    /// `sup b` over grid nodes and cell midpoints.
    pub fn sup_b(&self) -> f64 {
        let g = &self.grid;
        let h = g.spacing();
        g.nodes()
            .flat_map(|x| [x, x + 0.5 * h])
            .filter(|&x| x <= g.hi)
            .map(|x| (self.b)(x))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn sup_abs_a(&self) -> f64 {
        self.grid.nodes().map(|x| (self.a)(x).abs()).fold(0.0, f64::max)
    }

    fn phi(&self, x: f64) -> Complex64 {
        (Complex64::new((self.b)(x), 0.0) - self.lambda) / (self.a)(x)
    }

    /// `v(q)` from `v(p)` by the exact variation-of-constants formula.
    fn propagate(&self, p: f64, q: f64, vp: Complex64) -> Complex64 {
        if p == q {
            return vp;
        }
        let growth = gauss(p, q, |z| self.phi(z)).exp();
        let source = gauss(p, q, |y| {
            let inner = gauss(y, q, |z| self.phi(z));
            inner.exp() * (self.forcing)(y) / (self.a)(y)
        });
        growth * vp + source
    }
}

#[derive(Debug, Clone)]
pub struct ResolventSolution {
    problem: ResolventProblem,
    values: Vec<Complex64>,
    /// `+1` when integrating rightwards (`a > 0`).
    direction: f64,
    sup_b: f64,
}

/// Solves `(lambda - L_{a,b}) v = F` on the problem grid.
pub fn resolvent_solve(prob: &ResolventProblem) -> Result<ResolventSolution> {
    let g = prob.grid;
    let sup_b = prob.sup_b();
    if !(prob.lambda.re - sup_b > prob.margin) {
        return Err(Error::SpectralMargin { re_lambda: prob.lambda.re, sup_b });
    }
    let a0 = (prob.a)(g.node(0));
    let h = g.spacing();
    for x in g.nodes().flat_map(|x| [x, x + 0.5 * h]).filter(|&x| x <= g.hi) {
        let a = (prob.a)(x);
        if !(a.abs() > 1e-12) || a.signum() != a0.signum() {
            return Err(Error::Ellipticity { x });
        }
    }
    let direction = a0.signum();
    let mut values = vec![Complex64::new(0.0, 0.0); g.n];
    if direction > 0.0 {
        for i in 1..g.n {
            values[i] = prob.propagate(g.node(i - 1), g.node(i), values[i - 1]);
        }
    } else {
        for i in (0..g.n - 1).rev() {
            values[i] = prob.propagate(g.node(i + 1), g.node(i), values[i + 1]);
        }
    }
    Ok(ResolventSolution {
        problem: prob.clone(),
        values,
        direction,
        sup_b,
    })
}

impl ResolventSolution {
    pub fn problem(&self) -> &ResolventProblem {
        &self.problem
    }

    pub fn grid(&self) -> Grid {
        self.problem.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn sup_b(&self) -> f64 {
        self.sup_b
    }

    /// `sup |v|` over the nodes.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `sup |F|` over the nodes.
    pub fn forcing_norm(&self) -> f64 {
        self.grid()
            .nodes()
            .map(|x| (self.problem.forcing)(x).norm())
            .fold(0.0, f64::max)
    }

    /// `||F|| / (Re(lambda) - sup b)`.
    pub fn sup_bound(&self) -> f64 {
        self.forcing_norm() / (self.problem.lambda.re - self.sup_b)
    }

    /// Value at any point of the grid interval.
    pub fn eval(&self, x: f64) -> Result<Complex64> {
        let g = self.grid();
        if !(x >= g.lo && x <= g.hi) {
            return Err(Error::Domain(format!("x = {x} outside [{}, {}]", g.lo, g.hi)));
        }
        let h = g.spacing();
        let cell = (((x - g.lo) / h).floor() as usize).min(g.n - 2);
        let up = if self.direction > 0.0 { cell } else { cell + 1 };
        let up = if self.direction > 0.0 && g.node(up) > x {
            up.saturating_sub(1)
        } else if self.direction < 0.0 && g.node(up) < x {
            (up + 1).min(g.n - 1)
        } else {
            up
        };
        Ok(self.problem.propagate(g.node(up), x, self.values[up]))
    }

    /// Central sixth-order finite difference of `v` at `x`.
    pub fn derivative(&self, x: f64) -> Result<Complex64> {
        const C: [f64; 3] = [3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0];
        let mut d = Complex64::new(0.0, 0.0);
        for (k, c) in C.iter().enumerate() {
            let s = (k + 1) as f64 * FD_STEP;
            d += (self.eval(x + s)? - self.eval(x - s)?) * *c;
        }
        Ok(d / FD_STEP)
    }

    /// `|lambda v + a v' - b v - F|` at `x`.
    pub fn residual_at(&self, x: f64) -> Result<f64> {
        let p = &self.problem;
        let v = self.eval(x)?;
        let dv = self.derivative(x)?;
        let lhs = p.lambda * v + dv * (p.a)(x) - v * (p.b)(x);
        Ok((lhs - (p.forcing)(x)).norm())
    }

    /// Sup of the residual over every `stride`-th node away from the ends.
    pub fn residual(&self, stride: usize) -> Result<f64> {
        let g = self.grid();
        let pad = 3.0 * FD_STEP;
        let mut worst: f64 = 0.0;
        for i in (0..g.n).step_by(stride.max(1)) {
            let x = g.node(i);
            if x - pad < g.lo || x + pad > g.hi {
                continue;
            }
            worst = worst.max(self.residual_at(x)?);
        }
        Ok(worst)
    }

    /// Sub-interval on which the zero start value has decayed below 1e-10
    /// relative to the solution.
    pub fn interior(&self) -> (f64, f64) {
        let g = self.grid();
        let p = &self.problem;
        let len = FORGET_LENGTHS * p.sup_abs_a() / (p.lambda.re - self.sup_b);
        if self.direction > 0.0 {
            ((g.lo + len).min(g.hi), g.hi)
        } else {
            (g.lo, (g.hi - len).max(g.lo))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum SpectralClass {
    ResolventSet,
    EssentialSpectrum,
    Eigenvalue { multiplicity: u32 },
}

/// Forcing `F` on both half-lines and the position datum `phi`.
#[derive(Clone)]
pub struct ShockForcing {
    pub forcing: ComplexFn,
    pub phi: Complex64,
}

impl fmt::Debug for ShockForcing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ShockForcing").field("phi", &self.phi).finish_non_exhaustive()
    }
}

/// Half-line solution traces and the position response.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShockResolvent {
    pub v_minus: Complex64,
    pub v_plus: Complex64,
    pub psi: Complex64,
    pub sup_left: f64,
    pub sup_right: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumVerdict {
    pub lambda: Complex64,
    pub class: SpectralClass,
    /// Present for resolvent-set points when forcing data were supplied.
    pub response: Option<ShockResolvent>,
}

/// Classifies `lambda` for the linearization about a Riemann shock.
pub fn spectrum_classify(
    law: &ScalarLaw,
    shock: &RiemannShockSpec,
    lambda: Complex64,
    data: Option<&ShockForcing>,
) -> Result<SpectrumVerdict> {
    let oleinik = check_oleinik(law, shock, OLEINIK_SAMPLES)?;
    let (gm, gp) = (law.dg(shock.u_minus), law.dg(shock.u_plus));
    if !oleinik.passed || !(gm < 0.0) || !(gp < 0.0) {
        return Err(Error::Precondition(format!(
            "shock not admissible: oleinik {}, g'(u-) = {gm}, g'(u+) = {gp}",
            oleinik.passed
        )));
    }
    let edge = gm.max(gp);
    let verdict = |class| SpectrumVerdict { lambda, class, response: None };
    if lambda == Complex64::new(0.0, 0.0) {
        return Ok(verdict(SpectralClass::Eigenvalue { multiplicity: 1 }));
    }
    if lambda.re <= edge {
        return Ok(verdict(SpectralClass::EssentialSpectrum));
    }
    let Some(data) = data else {
        return Ok(verdict(SpectralClass::ResolventSet));
    };
    let response = shock_resolvent(law, shock, lambda, data)?;
    Ok(SpectrumVerdict {
        lambda,
        class: SpectralClass::ResolventSet,
        response: Some(response),
    })
}

/// Solves the half-line problems from `-inf` and `+inf` and the position
/// equation `lambda psi - (a+ v(0+) - a- v(0-)) / (u+ - u-) = phi`.
pub fn shock_resolvent(
    law: &ScalarLaw,
    shock: &RiemannShockSpec,
    lambda: Complex64,
    data: &ShockForcing,
) -> Result<ShockResolvent> {
    let a_minus = law.df(shock.u_minus) - shock.sigma;
    let a_plus = law.df(shock.u_plus) - shock.sigma;
    let side = |a: f64, b: f64, left: bool| -> Result<ResolventSolution> {
        let margin = lambda.re - b;
        let half = HALF_WIDTH_FACTOR * a.abs() / margin;
        let grid = if left {
            Grid::new(-half, 0.0, DEFAULT_NODES)?
        } else {
            Grid::new(0.0, half, DEFAULT_NODES)?
        };
        resolvent_solve(&ResolventProblem::constant(a, b, lambda, data.forcing.clone(), grid))
    };
    let left = side(a_minus, law.dg(shock.u_minus), true)?;
    let right = side(a_plus, law.dg(shock.u_plus), false)?;
    let v_minus = *left.values().last().unwrap();
    let v_plus = right.values()[0];
    let jump = (v_plus * a_plus - v_minus * a_minus) / (shock.u_plus - shock.u_minus);
    Ok(ShockResolvent {
        v_minus,
        v_plus,
        psi: (data.phi + jump) / lambda,
        sup_left: left.sup_norm(),
        sup_right: right.sup_norm(),
    })
}
