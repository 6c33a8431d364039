//! Reference entropy solutions: Godunov finite volumes with Strang-split
//! source, plus comparison and shock-locus utilities.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fit::linear_fit;
use crate::characteristics::SmoothSolution;
use crate::model::ScalarLaw;
use crate::shocktracker::GluedSolution;

pub const MAX_CFL: f64 = 0.9;
/// Upper bound on the time step so the source splitting stays accurate
/// where transport speeds vanish.
const MAX_DT: f64 = 0.05;
/// Critical points of the flux are searched in `[-R, R]`.
const CRITICAL_RANGE: f64 = 1e3;
/// Cells on each side of an interface used for sub-cell shock location.
const LOCUS_HALF_WINDOW: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FvState {
    pub dx: f64,
    pub x_left: f64,
    pub cells: Vec<f64>,
    pub t: f64,
}

impl FvState {
    /// Midpoint projection of `u0` onto cells of width `dx` covering `[lo, hi]`.
    pub fn project(u0: impl Fn(f64) -> f64, lo: f64, hi: f64, dx: f64) -> Result<Self> {
        if !(dx > 0.0) || !(hi > lo) {
            return Err(Error::Parameter(format!("bad FV grid [{lo}, {hi}] with dx = {dx}")));
        }
        let n = ((hi - lo) / dx).round().max(1.0) as usize;
        let cells = (0..n).map(|i| u0(lo + (i as f64 + 0.5) * dx)).collect();
        Ok(FvState { dx, x_left: lo, cells, t: 0.0 })
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn center(&self, i: usize) -> f64 {
        self.x_left + (i as f64 + 0.5) * self.dx
    }

    pub fn x_right(&self) -> f64 {
        self.x_left + self.cells.len() as f64 * self.dx
    }

    /// Value of the cell containing `x`.
    pub fn value_at(&self, x: f64) -> Option<f64> {
        if x < self.x_left || x > self.x_right() {
            return None;
        }
        let i = (((x - self.x_left) / self.dx) as usize).min(self.cells.len() - 1);
        Some(self.cells[i])
    }

    pub fn mass(&self) -> f64 {
        self.cells.iter().sum::<f64>() * self.dx
    }

    pub fn total_variation(&self) -> f64 {
        self.cells.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
    }

    pub fn sup_deviation(&self, base: f64) -> f64 {
        self.cells.iter().map(|u| (u - base).abs()).fold(0.0, f64::max)
    }

    /// Largest deviation from `base` over cells whose centres lie in `window`.
    pub fn sup_deviation_in(&self, base: f64, window: (f64, f64)) -> f64 {
        (0..self.len())
            .filter(|&i| (window.0..=window.1).contains(&self.center(i)))
            .map(|i| (self.cells[i] - base).abs())
            .fold(0.0, f64::max)
    }
}

/// Exact Riemann-solver flux: `min f` on `[ul, ur]` if `ul <= ur`,
/// `max f` on `[ur, ul]` otherwise.
pub fn godunov_flux(law: &ScalarLaw, ul: f64, ur: f64) -> f64 {
    if ul <= ur {
        law.flux().range_on(ul, ur).0
    } else {
        law.flux().range_on(ur, ul).1
    }
}

/// Godunov flux with the critical points of `f` precomputed.
#[derive(Debug, Clone)]
struct GodunovFlux<'a> {
    law: &'a ScalarLaw,
    critical: Vec<f64>,
}

impl<'a> GodunovFlux<'a> {
    fn new(law: &'a ScalarLaw) -> Self {
        let critical = law.flux().derivative().roots_in(-CRITICAL_RANGE, CRITICAL_RANGE);
        GodunovFlux { law, critical }
    }

    #[inline]
    fn eval(&self, ul: f64, ur: f64) -> f64 {
        let (lo, hi) = if ul <= ur { (ul, ur) } else { (ur, ul) };
        let (fl, fr) = (self.law.f(ul), self.law.f(ur));
        let interior = self.critical.iter().filter(|&&c| c > lo && c < hi).map(|&c| self.law.f(c));
        if ul <= ur {
            interior.fold(fl.min(fr), f64::min)
        } else {
            interior.fold(fl.max(fr), f64::max)
        }
    }
}

fn source_half_step(law: &ScalarLaw, cells: &mut [f64], h: f64) {
    if law.source().is_zero() {
        return;
    }
    cells.par_iter_mut().with_min_len(512).for_each(|u| {
        let k1 = law.g(*u);
        let k2 = law.g(*u + 0.5 * h * k1);
        let k3 = law.g(*u + 0.5 * h * k2);
        let k4 = law.g(*u + h * k3);
        *u += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    });
}

/// Evolves to `t_final`, returning the states at each requested output time
/// (the final time is always included). `observer` sees every step.
pub fn evolve_fv_observed(
    law: &ScalarLaw,
    init: FvState,
    t_final: f64,
    cfl: f64,
    outputs: &[f64],
    observer: &mut dyn FnMut(&FvState),
) -> Result<Vec<FvState>> {
    if !(cfl > 0.0 && cfl <= MAX_CFL) {
        return Err(Error::Parameter(format!("cfl must lie in (0, {MAX_CFL}], got {cfl}")));
    }
    if init.is_empty() || !(t_final >= init.t) {
        return Err(Error::Parameter("empty grid or t_final before the initial time".into()));
    }
    let mut stops: Vec<f64> = outputs
        .iter()
        .copied()
        .filter(|&t| t > init.t && t < t_final)
        .collect();
    stops.push(t_final);
    stops.sort_by(f64::total_cmp);
    stops.dedup();

    let flux = GodunovFlux::new(law);
    let mut out = Vec::with_capacity(stops.len() + 1);
    if outputs.contains(&init.t) {
        out.push(init.clone());
    }
    let mut state = init;
    let n = state.len();
    let mut fluxes = vec![0.0; n + 1];
    let mut step = 0;
    observer(&state);

    for &stop in &stops {
        while state.t < stop {
            let speed = state.cells.iter().map(|&u| law.df(u).abs()).fold(0.0, f64::max);
            let mut dt = (cfl * state.dx / speed.max(1e-12)).min(MAX_DT);
            if state.t + dt >= stop {
                dt = stop - state.t;
            }
            source_half_step(law, &mut state.cells, 0.5 * dt);
            {
                let cells = &state.cells;
                fluxes.par_iter_mut().with_min_len(512).enumerate().for_each(|(j, fj)| {
                    let ul = cells[j.saturating_sub(1)];
                    let ur = cells[j.min(n - 1)];
                    *fj = flux.eval(ul, ur);
                });
            }
            let ratio = dt / state.dx;
            state
                .cells
                .par_iter_mut()
                .with_min_len(512)
                .enumerate()
                .for_each(|(i, u)| *u -= ratio * (fluxes[i + 1] - fluxes[i]));
            source_half_step(law, &mut state.cells, 0.5 * dt);
            state.t = if state.t + dt >= stop { stop } else { state.t + dt };
            step += 1;
            if let Some(cell) = state.cells.iter().position(|u| !u.is_finite()) {
                return Err(Error::Instability { step, t: state.t, cell });
            }
            observer(&state);
        }
        out.push(state.clone());
    }
    Ok(out)
}

pub fn evolve_fv(
    law: &ScalarLaw,
    init: FvState,
    t_final: f64,
    cfl: f64,
    outputs: &[f64],
) -> Result<Vec<FvState>> {
    evolve_fv_observed(law, init, t_final, cfl, outputs, &mut |_| {})
}

/// A solution the oracle can be compared against.
pub trait Reference: Sync {
    fn value(&self, t: f64, x: f64) -> Result<f64>;
    /// Shock positions at `t`, left to right.
    fn shock_positions(&self, t: f64) -> Result<Vec<f64>>;
}

impl Reference for GluedSolution {
    fn value(&self, t: f64, x: f64) -> Result<f64> {
        GluedSolution::value(self, t, x)
    }
    fn shock_positions(&self, t: f64) -> Result<Vec<f64>> {
        GluedSolution::shock_positions(self, t)
    }
}

impl Reference for SmoothSolution {
    fn value(&self, t: f64, x: f64) -> Result<f64> {
        self.sample(t, x).map(|s| s.0)
    }
    fn shock_positions(&self, _t: f64) -> Result<Vec<f64>> {
        Ok(Vec::new())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Norm {
    L1,
    /// Sup over cells farther than `radius` from every tracked shock.
    LinfAwayFromShock { radius_cells: usize },
}

/// Discrepancy between a reference solution and an FV state on `window`.
pub fn compare(
    glued: &dyn Reference,
    fv: &FvState,
    t: f64,
    norm: Norm,
    window: (f64, f64),
) -> Result<f64> {
    if (fv.t - t).abs() > 1e-9 {
        return Err(Error::Window(format!("FV state at t = {} compared at t = {t}", fv.t)));
    }
    if window.0 < fv.x_left || window.1 > fv.x_right() || !(window.1 > window.0) {
        return Err(Error::Window(format!(
            "window [{}, {}] not inside the FV domain [{}, {}]",
            window.0,
            window.1,
            fv.x_left,
            fv.x_right()
        )));
    }
    let shocks = glued.shock_positions(t)?;
    let cells: Vec<usize> = (0..fv.len())
        .filter(|&i| fv.center(i) - 0.5 * fv.dx >= window.0 && fv.center(i) + 0.5 * fv.dx <= window.1)
        .collect();
    let map_err = |e: Error| match e {
        Error::Extrapolation { x, lo, hi, .. } => {
            Error::Window(format!("x = {x} outside the fan span [{lo}, {hi}]"))
        }
        other => other,
    };
    match norm {
        Norm::L1 => {
            let errs: Result<Vec<f64>> = cells
                .par_iter()
                .map(|&i| {
                    let avg = cell_average(glued, t, fv.center(i), fv.dx, &shocks).map_err(map_err)?;
                    Ok((fv.cells[i] - avg).abs() * fv.dx)
                })
                .collect();
            Ok(errs?.iter().sum())
        }
        Norm::LinfAwayFromShock { radius_cells } => {
            let radius = radius_cells as f64 * fv.dx;
            let mut worst: f64 = 0.0;
            for &i in &cells {
                let x = fv.center(i);
                if shocks.iter().any(|&s| (x - s).abs() <= radius) {
                    continue;
                }
                let u = glued.value(t, x).map_err(map_err)?;
                worst = worst.max((fv.cells[i] - u).abs());
            }
            Ok(worst)
        }
    }
}

/// Mean of the glued solution over a cell, split at any shock inside it.
fn cell_average(glued: &dyn Reference, t: f64, center: f64, dx: f64, shocks: &[f64]) -> Result<f64> {
    let (lo, hi) = (center - 0.5 * dx, center + 0.5 * dx);
    let mut cuts = vec![lo];
    cuts.extend(shocks.iter().copied().filter(|&s| s > lo && s < hi));
    cuts.push(hi);
    let mut acc = 0.0;
    for pair in cuts.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        // two-point Gauss inside each smooth piece
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let off = half / 3f64.sqrt();
        acc += half * (glued.value(t, mid - off)? + glued.value(t, mid + off)?);
    }
    Ok(acc / dx)
}

/// Shock loci as steep interfaces: local maxima of `|u_{i+1} - u_i|` above
/// `min_jump`, at most `count` of them, strongest first, returned left to
/// right with sub-cell positions from local mass balance.
pub fn shock_loci(fv: &FvState, count: usize, min_jump: f64) -> Vec<f64> {
    let n = fv.len();
    if n < 2 {
        return Vec::new();
    }
    let d: Vec<f64> = fv.cells.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let mut peaks: Vec<usize> = (0..d.len())
        .filter(|&i| {
            d[i] >= min_jump
                && (i == 0 || d[i] >= d[i - 1])
                && (i + 1 == d.len() || d[i] > d[i + 1])
        })
        .collect();
    peaks.sort_by(|&a, &b| d[b].total_cmp(&d[a]).then(a.cmp(&b)));
    let mut chosen: Vec<usize> = Vec::new();
    for p in peaks {
        if chosen.len() == count {
            break;
        }
        if chosen.iter().all(|&c| c.abs_diff(p) > 2) {
            chosen.push(p);
        }
    }
    chosen.sort_unstable();
    chosen.iter().map(|&i| refine_locus(fv, i)).collect()
}

/// Position of a jump at interface `i + 1/2` so that the cell mass over a
/// small window matches a two-state profile.
fn refine_locus(fv: &FvState, i: usize) -> f64 {
    let n = fv.len();
    let interface = fv.x_left + (i + 1) as f64 * fv.dx;
    let a = i.saturating_sub(LOCUS_HALF_WINDOW - 1);
    let b = (i + LOCUS_HALF_WINDOW).min(n - 1);
    let (ul, ur) = (fv.cells[a], fv.cells[b]);
    if (ul - ur).abs() < 1e-14 {
        return interface;
    }
    let xa = fv.x_left + a as f64 * fv.dx;
    let xb = fv.x_left + (b + 1) as f64 * fv.dx;
    let mass: f64 = fv.cells[a..=b].iter().sum::<f64>() * fv.dx;
    let x = (mass - ur * xb + ul * xa) / (ul - ur);
    x.clamp(xa, xb)
}

/// Merge time from a series of `(t, gap)` between two tracked loci.
///
/// The gap is fitted by a straight line over samples with
/// `fit_gaps.0 <= gap <= fit_gaps.1` and extrapolated to zero; when fewer
/// than two samples qualify the first time the gap drops to `detect_gap`
/// is returned.
pub fn merge_time_from_gaps(
    series: &[(f64, Option<f64>)],
    detect_gap: f64,
    fit_gaps: (f64, f64),
) -> Option<f64> {
    let detected = series
        .iter()
        .find(|(_, g)| g.is_none_or(|g| g <= detect_gap))
        .map(|&(t, _)| t)?;
    let pts: Vec<(f64, f64)> = series
        .iter()
        .filter(|&&(t, g)| t < detected && g.is_some_and(|g| g >= fit_gaps.0 && g <= fit_gaps.1))
        .map(|&(t, g)| (t, g.unwrap()))
        .collect();
    match linear_fit(&pts) {
        Some((slope, intercept)) if slope < 0.0 => Some(-intercept / slope),
        _ => Some(detected),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Poly;

    #[test]
    fn flux_examples() {
        let law = ScalarLaw::burgers(Poly::zero());
        assert_eq!(godunov_flux(&law, 1.0, -1.0), 0.5);
        assert_eq!(godunov_flux(&law, -1.0, 1.0), 0.0);
        assert_eq!(godunov_flux(&law, 0.3, 0.3), law.f(0.3));
        let fast = GodunovFlux::new(&law);
        for &(a, b) in &[(1.0, -1.0), (-1.0, 1.0), (0.2, 0.7), (-0.4, -0.9)] {
            assert_eq!(fast.eval(a, b), godunov_flux(&law, a, b));
        }
    }

    #[test]
    fn equilibrium_is_preserved() {
        let law = ScalarLaw::burgers_bistable();
        let init = FvState::project(|_| -1.0, -1.0, 1.0, 0.01).unwrap();
        let out = evolve_fv(&law, init, 1.0, 0.9, &[0.5]).unwrap();
        assert_eq!(out.len(), 2);
        assert!(out.iter().all(|s| s.cells.iter().all(|&u| u == -1.0)));
        assert_eq!(out[1].t, 1.0);
    }

    #[test]
    fn stationary_riemann_shock_stays_put() {
        let law = ScalarLaw::burgers_bistable();
        let init = FvState::project(|x| if x < 0.0 { 1.0 } else { -1.0 }, -2.0, 2.0, 0.01).unwrap();
        let out = evolve_fv(&law, init, 1.0, 0.9, &[]).unwrap();
        let loci = shock_loci(&out[0], 1, 0.1);
        assert!(loci[0].abs() <= 0.01, "locus {}", loci[0]);
    }

    #[test]
    fn conservation_without_source() {
        let law = ScalarLaw::burgers(Poly::zero());
        let init = FvState::project(|x| 0.5 * (-(x * x)).exp(), -5.0, 5.0, 0.02).unwrap();
        let mut prev: Option<(f64, f64, f64)> = None;
        let mut worst: f64 = 0.0;
        evolve_fv_observed(&law, init, 1.0, 0.9, &[], &mut |s| {
            let boundary = law.f(s.cells[0]) - law.f(*s.cells.last().unwrap());
            if let Some((t, m, b)) = prev {
                worst = worst.max((s.mass() - m - (s.t - t) * b).abs());
            }
            prev = Some((s.t, s.mass(), boundary));
        })
        .unwrap();
        assert!(worst <= 1e-12, "mass drift {worst}");
    }

    #[test]
    fn bad_cfl_and_instability() {
        let law = ScalarLaw::burgers_bistable();
        let init = FvState::project(|_| 0.0, 0.0, 1.0, 0.1).unwrap();
        assert!(evolve_fv(&law, init.clone(), 1.0, 0.95, &[]).is_err());
        let blow = ScalarLaw::burgers(Poly::new(vec![0.0, 0.0, 0.0, 1.0]));
        let init = FvState::project(|_| 2.0, 0.0, 1.0, 0.1).unwrap();
        assert!(matches!(
            evolve_fv(&blow, init, 5.0, 0.9, &[]),
            Err(Error::Instability { .. })
        ));
    }

    #[test]
    fn loci_and_merge_time() {
        let fv = FvState::project(
            |x| if x < -0.5 { 1.0 } else if x < 0.25 { 0.5 } else { -1.0 },
            -2.0,
            2.0,
            0.01,
        )
        .unwrap();
        let loci = shock_loci(&fv, 2, 0.1);
        assert_eq!(loci.len(), 2);
        assert!((loci[0] + 0.5).abs() < 1e-12 && (loci[1] - 0.25).abs() < 1e-12);

        let series: Vec<(f64, Option<f64>)> = (0..100)
            .map(|k| {
                let t = k as f64 * 0.01;
                let g = 0.8 - t;
                (t, if g > 0.015 { Some(g) } else { None })
            })
            .collect();
        let t = merge_time_from_gaps(&series, 0.02, (0.04, 0.4)).unwrap();
        assert!((t - 0.8).abs() < 1e-12);
    }
}
