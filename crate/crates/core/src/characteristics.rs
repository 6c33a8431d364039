//! Classical solutions by characteristics.
//!
//! Along `x' = f'(u)` a smooth solution obeys `u' = g(u)` and its gradient
//! `w = u_x` the Riccati equation `w' = g'(u) w - f''(u) w^2`. A fan of such
//! curves is advanced with classical RK4 at a fixed step; a curve whose
//! Riccati term becomes stiff is sub-stepped so that gradient blow-up is
//! resolved instead of stepped over.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::extension::{hermite, Profile};
use crate::model::ScalarLaw;

/// `|w|` above which a curve is declared blown up.
pub const BLOWUP_THRESHOLD: f64 = 1e6;
pub const DEFAULT_DT: f64 = 1e-3;
pub const DEFAULT_CURVES: usize = 2049;
pub const MIN_CURVES: usize = 16;

/// Largest admissible `h (|f'' w| + |g'|)` for a single RK4 step.
const STIFFNESS_LIMIT: f64 = 0.2;
/// Fan states kept in memory; snapshots are thinned to stay below it.
const MAX_STORED_STATES: usize = 2_000_000;
/// Resolution of curve-crossing bisection.
const CROSSING_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharacteristicState {
    pub x: f64,
    pub u: f64,
    /// `u_x` carried along the curve.
    pub w: f64,
}

impl CharacteristicState {
    fn is_finite(&self) -> bool {
        self.x.is_finite() && self.u.is_finite() && self.w.is_finite()
    }
}

enum Advance {
    Done(CharacteristicState),
    /// Threshold crossed `after` time units into the step.
    BlowUp { after: f64, x: f64 },
}

#[inline]
fn rhs(law: &ScalarLaw, s: &CharacteristicState) -> [f64; 3] {
    let d2f = law.d2f(s.u);
    [law.df(s.u), law.g(s.u), law.dg(s.u) * s.w - d2f * s.w * s.w]
}

#[inline]
fn stage(s: &CharacteristicState, k: &[f64; 3], h: f64) -> CharacteristicState {
    CharacteristicState {
        x: s.x + h * k[0],
        u: s.u + h * k[1],
        w: s.w + h * k[2],
    }
}

fn out_of_range(s: &CharacteristicState) -> bool {
    !s.is_finite() || s.w.abs() > BLOWUP_THRESHOLD
}

/// One RK4 step; `None` if any stage leaves the admissible range.
fn rk4(law: &ScalarLaw, s: &CharacteristicState, h: f64) -> Option<CharacteristicState> {
    let k1 = rhs(law, s);
    let s2 = stage(s, &k1, 0.5 * h);
    if out_of_range(&s2) {
        return None;
    }
    let k2 = rhs(law, &s2);
    let s3 = stage(s, &k2, 0.5 * h);
    if out_of_range(&s3) {
        return None;
    }
    let k3 = rhs(law, &s3);
    let s4 = stage(s, &k3, h);
    if out_of_range(&s4) {
        return None;
    }
    let k4 = rhs(law, &s4);
    let next = CharacteristicState {
        x: s.x + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        u: s.u + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        w: s.w + h / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
    };
    if out_of_range(&next) {
        None
    } else {
        Some(next)
    }
}

fn advance(law: &ScalarLaw, state: &CharacteristicState, dt: f64) -> Advance {
    let mut s = *state;
    let mut elapsed = 0.0;
    let mut remaining = dt;
    while remaining > 0.0 {
        let rate = (law.d2f(s.u) * s.w).abs() + law.dg(s.u).abs();
        let mut h = if rate * remaining <= STIFFNESS_LIMIT {
            remaining
        } else {
            STIFFNESS_LIMIT / rate
        };
        loop {
            match rk4(law, &s, h) {
                Some(next) => {
                    s = next;
                    elapsed += h;
                    remaining = if h == remaining { 0.0 } else { remaining - h };
                    break;
                }
                None if h > 1e-12 => h *= 0.5,
                None => {
                    return Advance::BlowUp {
                        after: elapsed + h,
                        x: s.x,
                    }
                }
            }
        }
    }
    Advance::Done(s)
}

/// Advances one curve by `dt`. Blow-up is reported as
/// [`Error::BlowUp`] whose `t` is the offset into the step.
pub fn advance_characteristic(
    law: &ScalarLaw,
    state: CharacteristicState,
    dt: f64,
) -> Result<CharacteristicState> {
    if !(dt > 0.0) || !state.is_finite() {
        return Err(Error::Parameter(format!(
            "advance needs dt > 0 and a finite state, got dt = {dt}, {state:?}"
        )));
    }
    match advance(law, &state, dt) {
        Advance::Done(s) => Ok(s),
        Advance::BlowUp { after, x } => Err(Error::BlowUp { t: after, x }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FanStatus {
    Alive,
    BlownUp { t: f64, x: f64 },
}

/// A fan of characteristics with snapshots of every curve.
///
/// Only every `stride`-th step is stored; states in between are recomputed
/// from the preceding snapshot with the same step sequence, so they are
/// bitwise identical to the original run.
#[derive(Debug, Clone)]
pub struct SmoothSolution {
    law: ScalarLaw,
    dt: f64,
    /// Step index of each snapshot; the final snapshot may be off-stride.
    steps: Vec<usize>,
    times: Vec<f64>,
    fan: Vec<Vec<CharacteristicState>>,
    t_final: f64,
    t_end: f64,
    status: FanStatus,
}

#[inline]
pub(crate) fn step_time(k: usize, dt: f64, t_final: f64) -> f64 {
    (k as f64 * dt).min(t_final)
}

/// Seeds `n_curves` characteristics uniformly on `x_span` and advances them
/// to `t_final` or to the first blow-up.
///
/// The caller pads `x_span` by the domain of dependence; the fan only
/// represents the solution between its outermost curves.
pub fn evolve_smooth(
    law: &ScalarLaw,
    data: &dyn Profile,
    t_final: f64,
    n_curves: usize,
    x_span: (f64, f64),
    dt: f64,
) -> Result<SmoothSolution> {
    if n_curves < MIN_CURVES {
        return Err(Error::Parameter(format!(
            "a fan needs at least {MIN_CURVES} curves, got {n_curves}"
        )));
    }
    if !(dt > 0.0) || !(t_final >= 0.0) || !(x_span.1 > x_span.0) {
        return Err(Error::Parameter(format!(
            "bad fan parameters dt = {dt}, t_final = {t_final}, span = {x_span:?}"
        )));
    }
    let h = (x_span.1 - x_span.0) / (n_curves - 1) as f64;
    let seed: Vec<CharacteristicState> = (0..n_curves)
        .map(|i| {
            let x = if i == n_curves - 1 { x_span.1 } else { x_span.0 + i as f64 * h };
            CharacteristicState {
                x,
                u: data.value(x),
                w: data.slope(x),
            }
        })
        .collect();
    if seed.iter().any(|s| !s.is_finite()) {
        return Err(Error::Parameter("initial data not finite on the span".into()));
    }

    let n_steps = ((t_final / dt) - 1e-9).ceil().max(0.0) as usize;
    let stride = (n_steps * n_curves).div_ceil(MAX_STORED_STATES).max(1);

    let mut sol = SmoothSolution {
        law: law.clone(),
        dt,
        steps: vec![0],
        times: vec![0.0],
        fan: vec![seed.clone()],
        t_final,
        t_end: t_final,
        status: FanStatus::Alive,
    };

    let mut current = seed;
    let mut next = current.clone();
    for k in 0..n_steps {
        let t0 = step_time(k, dt, t_final);
        let h = step_time(k + 1, dt, t_final) - t0;
        let blow = next
            .par_iter_mut()
            .with_min_len(256)
            .zip(current.par_iter())
            .map(|(out, s)| match advance(law, s, h) {
                Advance::Done(n) => {
                    *out = n;
                    None
                }
                Advance::BlowUp { after, x } => {
                    *out = *s;
                    Some((after, x))
                }
            })
            .reduce(|| None, earliest);

        let crossing = if blow.is_none() {
            first_crossing(law, &current, &next, h)
        } else {
            None
        };

        if let Some((after, x)) = earliest(blow, crossing) {
            sol.status = FanStatus::BlownUp { t: t0 + after, x };
            sol.t_end = t0;
            if *sol.steps.last().unwrap() != k {
                sol.steps.push(k);
                sol.times.push(t0);
                sol.fan.push(current);
            }
            return Ok(sol);
        }

        std::mem::swap(&mut current, &mut next);
        if (k + 1) % stride == 0 || k + 1 == n_steps {
            sol.steps.push(k + 1);
            sol.times.push(step_time(k + 1, dt, t_final));
            sol.fan.push(current.clone());
        }
    }
    Ok(sol)
}

fn earliest(a: Option<(f64, f64)>, b: Option<(f64, f64)>) -> Option<(f64, f64)> {
    match (a, b) {
        (Some(p), Some(q)) => Some(if q.0 < p.0 { q } else { p }),
        (p, None) => p,
        (None, q) => q,
    }
}

/// Locates the first neighbour crossing in a step by bisection on the
/// partial step length.
fn first_crossing(
    law: &ScalarLaw,
    before: &[CharacteristicState],
    after: &[CharacteristicState],
    h: f64,
) -> Option<(f64, f64)> {
    let mut found: Option<(f64, f64)> = None;
    for i in 0..after.len() - 1 {
        if after[i + 1].x > after[i].x {
            continue;
        }
        let gap_at = |tau: f64| -> f64 {
            let a = match advance(law, &before[i], tau) {
                Advance::Done(s) => s.x,
                Advance::BlowUp { x, .. } => x,
            };
            let b = match advance(law, &before[i + 1], tau) {
                Advance::Done(s) => s.x,
                Advance::BlowUp { x, .. } => x,
            };
            b - a
        };
        let (mut lo, mut hi) = (0.0, h);
        while hi - lo > CROSSING_TOL {
            let mid = 0.5 * (lo + hi);
            if gap_at(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let x = 0.5 * (after[i].x + after[i + 1].x);
        found = earliest(found, Some((hi, x)));
    }
    found
}

/// Fan values and norms at one time, restricted to a spatial window.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FanNorms {
    /// `sup |u - base|` over nodes and interpolated midpoints.
    pub sup_deviation: f64,
    /// `sup (sign * w)_-` over nodes.
    pub negpart_gradient: f64,
    /// `sup |w|` over nodes.
    pub gradient: f64,
    /// Largest spacing between neighbouring curves inside the window.
    pub max_gap: f64,
}

impl SmoothSolution {
    pub fn law(&self) -> &ScalarLaw {
        &self.law
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn status(&self) -> FanStatus {
        self.status
    }

    /// Snapshot times.
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn n_curves(&self) -> usize {
        self.fan[0].len()
    }

    /// Last time at which every curve is classical.
    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    /// Stored snapshot `j`.
    pub fn snapshot(&self, j: usize) -> &[CharacteristicState] {
        &self.fan[j]
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if let FanStatus::BlownUp { t: tb, x } = self.status {
            if t > self.t_end {
                return Err(Error::BlowUp { t: tb, x });
            }
        }
        if !(t >= 0.0) || t > self.t_end + 1e-12 {
            return Err(Error::Validity {
                t,
                valid_until: self.t_end,
            });
        }
        Ok(())
    }

    fn snapshot_before(&self, t: f64) -> usize {
        self.times.partition_point(|&s| s <= t + 1e-12).saturating_sub(1)
    }

    /// Re-integrates curve `i` from snapshot `j` to time `t` (`t >= times[j]`).
    fn replay(&self, j: usize, i: usize, t: f64) -> CharacteristicState {
        let mut s = self.fan[j][i];
        let mut k = self.steps[j];
        let mut tk = self.times[j];
        loop {
            let t_next = step_time(k + 1, self.dt, self.t_final);
            if t_next > t + 1e-12 || t_next <= tk {
                break;
            }
            s = match advance(&self.law, &s, t_next - tk) {
                Advance::Done(n) => n,
                Advance::BlowUp { .. } => return s,
            };
            k += 1;
            tk = t_next;
        }
        let rest = t - tk;
        if rest > 1e-14 {
            if let Advance::Done(n) = advance(&self.law, &s, rest) {
                s = n;
            }
        }
        s
    }

    /// State of curve `i` at time `t`.
    pub fn curve_at(&self, i: usize, t: f64) -> Result<CharacteristicState> {
        self.check_time(t)?;
        let j = self.snapshot_before(t);
        Ok(self.replay(j, i, t))
    }

    /// All curves at time `t`.
    pub fn slice(&self, t: f64) -> Result<Vec<CharacteristicState>> {
        self.check_time(t)?;
        let j = self.snapshot_before(t);
        if (self.times[j] - t).abs() <= 1e-12 {
            return Ok(self.fan[j].clone());
        }
        Ok((0..self.n_curves())
            .into_par_iter()
            .with_min_len(256)
            .map(|i| self.replay(j, i, t))
            .collect())
    }

    /// Spatial extent of the fan at time `t`.
    pub fn span_at(&self, t: f64) -> Result<(f64, f64)> {
        let n = self.n_curves();
        Ok((self.curve_at(0, t)?.x, self.curve_at(n - 1, t)?.x))
    }

    /// Value and gradient at `(t, x)`: Hermite interpolation of `u` using the
    /// carried gradients as slopes, linear interpolation of `w`.
    pub fn sample(&self, t: f64, x: f64) -> Result<(f64, f64)> {
        self.check_time(t)?;
        let j = self.snapshot_before(t);
        let snap = &self.fan[j];
        let n = snap.len();
        let at = |i: usize| self.replay(j, i, t);

        let mut i = snap.partition_point(|s| s.x <= x).saturating_sub(1).min(n - 2);
        let mut lo = at(i);
        while lo.x > x {
            if i == 0 {
                let hi = at(n - 1);
                return Err(Error::Extrapolation { t, x, lo: lo.x, hi: hi.x });
            }
            i -= 1;
            lo = at(i);
        }
        let mut hi = at(i + 1);
        while hi.x < x {
            if i + 2 >= n {
                let first = at(0);
                return Err(Error::Extrapolation { t, x, lo: first.x, hi: hi.x });
            }
            i += 1;
            lo = hi;
            hi = at(i + 1);
        }
        Ok(interpolate(&lo, &hi, x))
    }

    /// Norms over curves whose position lies in `window` at time `t`.
    pub fn norms(&self, t: f64, base: f64, sign: f64, window: (f64, f64)) -> Result<FanNorms> {
        let slice = self.slice(t)?;
        Ok(norms_of(&slice, base, sign, window))
    }
}

pub(crate) fn norms_of(
    slice: &[CharacteristicState],
    base: f64,
    sign: f64,
    window: (f64, f64),
) -> FanNorms {
    let inside = |x: f64| x >= window.0 && x <= window.1;
    let mut out = FanNorms::default();
    for (k, s) in slice.iter().enumerate() {
        if !inside(s.x) {
            continue;
        }
        out.sup_deviation = out.sup_deviation.max((s.u - base).abs());
        out.negpart_gradient = out.negpart_gradient.max(-(sign * s.w)).max(out.negpart_gradient);
        out.gradient = out.gradient.max(s.w.abs());
        if let Some(n) = slice.get(k + 1) {
            if inside(n.x) {
                out.max_gap = out.max_gap.max(n.x - s.x);
                let mid = interpolate(s, n, 0.5 * (s.x + n.x));
                out.sup_deviation = out.sup_deviation.max((mid.0 - base).abs());
            }
        }
    }
    out.negpart_gradient = out.negpart_gradient.max(0.0);
    out
}

/// Hermite value with gradient slopes, limited where the nodal data are
/// monotone but the slopes would overshoot.
fn interpolate(a: &CharacteristicState, b: &CharacteristicState, x: f64) -> (f64, f64) {
    if x == a.x {
        return (a.u, a.w);
    }
    if x == b.x {
        return (b.u, b.w);
    }
    let h = b.x - a.x;
    if !(h > 0.0) {
        return (a.u, a.w);
    }
    let s = (x - a.x) / h;
    let delta = (b.u - a.u) / h;
    let (mut m0, mut m1) = (a.w, b.w);
    if delta != 0.0 {
        let (alpha, beta) = (m0 / delta, m1 / delta);
        if alpha < 0.0 && beta < 0.0 {
            m0 = 0.0;
            m1 = 0.0;
        } else if alpha > 0.0 && beta > 0.0 {
            let r = alpha * alpha + beta * beta;
            if r > 9.0 {
                let tau = 3.0 / r.sqrt();
                m0 = tau * alpha * delta;
                m1 = tau * beta * delta;
            }
        }
    }
    let (u, _) = hermite(s, h, a.u, b.u, m0, m1);
    (u, a.w + s * (b.w - a.w))
}

/// Blow-up time of `w' = -beta w - alpha w^2` from `w0`, which happens iff
/// `alpha w0 < -beta` (for `beta >= 0`).
pub fn toy_blowup_time(alpha: f64, beta: f64, w0: f64) -> Option<f64> {
    let z0 = alpha * w0;
    if z0 >= -beta {
        return None;
    }
    if beta == 0.0 {
        Some(-1.0 / z0)
    } else {
        Some((z0 / (z0 + beta)).ln() / beta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extension::{FnProfile, Shape, Shifted};
    use crate::model::{bistable_source, burgers_flux, linear_source};
    use crate::poly::Poly;

    fn linear_law(c: f64) -> ScalarLaw {
        ScalarLaw::new(Poly::new(vec![0.0, c]), linear_source(2.0, 0.0), "linear")
    }

    #[test]
    fn linear_advection_decay_closed_form() {
        let law = linear_law(0.7);
        let mut s = CharacteristicState { x: 0.3, u: 0.4, w: -0.2 };
        let dt = 1e-2;
        for _ in 0..100 {
            s = advance_characteristic(&law, s, dt).unwrap();
        }
        let e = (-2.0f64).exp();
        assert!((s.x - (0.3 + 0.7)).abs() < 1e-12);
        assert!((s.u - 0.4 * e).abs() < 1e-8);
        assert!((s.w + 0.2 * e).abs() < 1e-8);
    }

    #[test]
    fn riccati_closed_form_and_blowup() {
        let law = ScalarLaw::burgers(Poly::zero());
        let mut s = CharacteristicState { x: 0.0, u: 0.0, w: -1.0 };
        let dt = 1e-3;
        for _ in 0..500 {
            s = advance_characteristic(&law, s, dt).unwrap();
        }
        // w(t) = w0 / (1 + w0 t) at t = 0.5
        assert!((s.w + 2.0).abs() < 1e-10);
        let mut t = 0.5;
        let blow = loop {
            match advance_characteristic(&law, s, dt) {
                Ok(n) => {
                    s = n;
                    t += dt;
                }
                Err(Error::BlowUp { t: after, .. }) => break t + after,
                Err(e) => panic!("{e}"),
            }
        };
        assert!((blow - 1.0).abs() < 1e-5, "blow-up at {blow}");
    }

    #[test]
    fn bistable_relaxation_rate() {
        let law = ScalarLaw::new(Poly::new(vec![0.0, 0.3]), bistable_source(), "b");
        let mut s = CharacteristicState { x: 0.0, u: 1.1, w: 0.0 };
        let dt = 1e-3;
        let mut prev = s.u - 1.0;
        let mut rate = 0.0;
        for k in 1..=8000 {
            s = advance_characteristic(&law, s, dt).unwrap();
            if k % 1000 == 0 {
                let d = s.u - 1.0;
                rate = (d / prev).ln();
                prev = d;
            }
        }
        assert!((rate + 2.0).abs() < 1e-4, "rate {rate}");
    }

    #[test]
    fn constant_equilibrium_fan() {
        let law = ScalarLaw::burgers_bistable();
        let sol = evolve_smooth(&law, &Shape::Constant(-1.0), 1.0, 33, (-2.0, 2.0), 1e-2).unwrap();
        let last = sol.slice(1.0).unwrap();
        assert!(last.iter().all(|s| s.u == -1.0 && s.w == 0.0));
        assert_eq!(sol.sample(0.37, 0.1).unwrap(), (-1.0, 0.0));
    }

    #[test]
    fn linear_fan_matches_closed_form() {
        let law = ScalarLaw::new(Poly::new(vec![0.0, 1.0]), linear_source(2.0, 0.0), "lin");
        let data = FnProfile::new(|x: f64| 0.1 * x.sin(), |x: f64| 0.1 * x.cos());
        let sol = evolve_smooth(&law, &data, 1.0, 257, (-8.0, 8.0), 1e-2).unwrap();
        let mut err: f64 = 0.0;
        for k in 0..50 {
            let t = 0.02 * k as f64 + 0.013;
            let x = -5.0 + 0.2 * k as f64;
            let (u, _) = sol.sample(t, x).unwrap();
            err = err.max((u - 0.1 * (-2.0 * t).exp() * (x - t).sin()).abs());
        }
        let spacing = 16.0 / 256.0;
        assert!(err <= 0.1 * spacing * spacing, "err {err}");
    }

    #[test]
    fn sampling_on_a_curve_returns_its_state() {
        let law = ScalarLaw::burgers_bistable();
        let data = Shifted { base: -1.0, inner: Shape::Sech { amplitude: 0.05, width: 1.0, center: 0.0 } };
        let sol = evolve_smooth(&law, &data, 0.5, 65, (-6.0, 6.0), 1e-2).unwrap();
        let c = sol.curve_at(20, 0.25).unwrap();
        let (u, w) = sol.sample(0.25, c.x).unwrap();
        assert!((u - c.u).abs() <= 1e-12 && (w - c.w).abs() <= 1e-12);
    }

    #[test]
    fn replay_is_bitwise_identical_to_the_run() {
        let law = ScalarLaw::burgers_bistable();
        let data = Shifted { base: 1.0, inner: Shape::Gaussian { amplitude: 0.1, width: 1.0, center: 0.0 } };
        let sol = evolve_smooth(&law, &data, 0.3, 17, (-3.0, 3.0), 1e-2).unwrap();
        let last = sol.snapshot(sol.times().len() - 1).to_vec();
        let mut s = sol.snapshot(0)[5];
        for k in 0..30 {
            let h = (k + 1) as f64 * 1e-2 - k as f64 * 1e-2;
            s = advance_characteristic(&law, s, h).unwrap();
        }
        assert_eq!(s, last[5]);
        assert_eq!(sol.curve_at(5, 0.3).unwrap(), last[5]);
    }

    #[test]
    fn sampling_errors() {
        let law = ScalarLaw::burgers_bistable();
        let sol = evolve_smooth(&law, &Shape::Constant(1.0), 1.0, 17, (0.0, 1.0), 1e-2).unwrap();
        assert!(matches!(sol.sample(0.5, -3.0), Err(Error::Extrapolation { .. })));
        assert!(matches!(sol.sample(0.5, 3.0), Err(Error::Extrapolation { .. })));
        assert!(matches!(sol.sample(2.0, 1.0), Err(Error::Validity { .. })));
        assert!(evolve_smooth(&law, &Shape::Constant(1.0), 1.0, 8, (0.0, 1.0), 1e-2).is_err());
    }

    #[test]
    fn fan_blowup_matches_toy_formula() {
        let law = ScalarLaw::new(burgers_flux(), linear_source(1.0, 0.0), "toy");
        let data = Shape::Tanh { amplitude: -2.0, width: 1.0, center: 0.0 };
        let sol = evolve_smooth(&law, &data, 2.0, 257, (-8.0, 8.0), 1e-3).unwrap();
        let FanStatus::BlownUp { t, x } = sol.status() else {
            panic!("expected blow-up");
        };
        assert!((t - 2f64.ln()).abs() < 1e-5, "t = {t}");
        assert!(x.abs() < 0.1);
        assert!(matches!(sol.sample(1.0, 0.0), Err(Error::BlowUp { .. })));
        assert!(sol.sample(0.5, 0.0).is_ok());
    }

    #[test]
    fn toy_blowup_examples() {
        assert!((toy_blowup_time(1.0, 1.0, -2.0).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert_eq!(toy_blowup_time(1.0, 1.0, -1.0), None);
        assert_eq!(toy_blowup_time(1.0, 1.0, 0.5), None);
        assert_eq!(toy_blowup_time(2.0, 0.0, -1.0), Some(0.5));
    }

    #[test]
    fn toy_formula_agrees_with_direct_integration() {
        // w' = -w - w^2 from w0 = -2 until |w| > 1e6
        let mut w: f64 = -2.0;
        let mut t = 0.0;
        while w.abs() <= 1e6 {
            let h = (1e-4f64).min(1e-2 / w.abs());
            let f = |w: f64| -w - w * w;
            let k1 = f(w);
            let k2 = f(w + 0.5 * h * k1);
            let k3 = f(w + 0.5 * h * k2);
            let k4 = f(w + h * k3);
            w += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            t += h;
        }
        assert!((t - toy_blowup_time(1.0, 1.0, -2.0).unwrap()).abs() < 1e-5);
    }
}
