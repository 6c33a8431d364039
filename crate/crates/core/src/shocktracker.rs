//! Shock fitting: Rankine–Hugoniot tracking between smooth solutions,
//! gluing, asymptotic phase and the two-shock merge.

use serde::Serialize;

use crate::characteristics::SmoothSolution;
use crate::error::{Error, Result};
use crate::fit::{at_floor, fit_decay_rate, DecayFit, VALUE_FLOOR};
use crate::extension::hermite;
use crate::model::{slope, ScalarLaw};

/// Relative resolution of the merge-time bisection, in units of `dt`.
const MERGE_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShockNode {
    pub t: f64,
    pub psi: f64,
    pub psi_prime: f64,
    pub u_left: f64,
    pub u_right: f64,
    /// `f'(u_left) - psi'`.
    pub lax_left: f64,
    /// `psi' - f'(u_right)`.
    pub lax_right: f64,
}

#[derive(Debug, Clone)]
pub struct ShockPath {
    nodes: Vec<ShockNode>,
    t_final: f64,
    valid_until: Option<f64>,
}

impl ShockPath {
    pub fn nodes(&self) -> &[ShockNode] {
        &self.nodes
    }

    pub fn times(&self) -> Vec<f64> {
        self.nodes.iter().map(|n| n.t).collect()
    }

    pub fn psi(&self) -> Vec<f64> {
        self.nodes.iter().map(|n| n.psi).collect()
    }

    pub fn psi_prime(&self) -> Vec<f64> {
        self.nodes.iter().map(|n| n.psi_prime).collect()
    }

    pub fn lax_margins(&self) -> Vec<(f64, f64)> {
        self.nodes.iter().map(|n| (n.lax_left, n.lax_right)).collect()
    }

    /// Set when the path was truncated by a failing Lax margin.
    pub fn valid_until(&self) -> Option<f64> {
        self.valid_until
    }

    pub fn start(&self) -> &ShockNode {
        &self.nodes[0]
    }

    pub fn last(&self) -> &ShockNode {
        self.nodes.last().expect("paths hold at least one node")
    }

    /// Smallest Lax margin over all recorded nodes.
    pub fn min_lax_margin(&self) -> f64 {
        self.nodes
            .iter()
            .map(|n| n.lax_left.min(n.lax_right))
            .fold(f64::INFINITY, f64::min)
    }

    /// End of the interval on which the path may be queried.
    pub fn end(&self) -> f64 {
        self.valid_until.unwrap_or(self.t_final).min(self.last().t)
    }

    fn locate(&self, t: f64) -> Result<usize> {
        let (t0, t1) = (self.start().t, self.end());
        if t < t0 - 1e-12 || t > t1 + 1e-12 {
            return Err(Error::Validity { t, valid_until: t1 });
        }
        let i = self.nodes.partition_point(|n| n.t <= t).saturating_sub(1);
        Ok(i.min(self.nodes.len().saturating_sub(2)))
    }

    /// Position by cubic Hermite interpolation of the nodes.
    pub fn position(&self, t: f64) -> Result<f64> {
        let i = self.locate(t)?;
        if self.nodes.len() == 1 {
            return Ok(self.nodes[0].psi);
        }
        let (a, b) = (&self.nodes[i], &self.nodes[i + 1]);
        let h = b.t - a.t;
        let s = ((t - a.t) / h).clamp(0.0, 1.0);
        Ok(hermite(s, h, a.psi, b.psi, a.psi_prime, b.psi_prime).0)
    }

    /// Speed by linear interpolation of the nodes.
    pub fn speed(&self, t: f64) -> Result<f64> {
        let i = self.locate(t)?;
        if self.nodes.len() == 1 {
            return Ok(self.nodes[0].psi_prime);
        }
        let (a, b) = (&self.nodes[i], &self.nodes[i + 1]);
        let s = ((t - a.t) / (b.t - a.t)).clamp(0.0, 1.0);
        Ok(a.psi_prime + s * (b.psi_prime - a.psi_prime))
    }
}

fn span_error(t: f64) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::Extrapolation { .. } => Error::Span { t },
        other => other,
    }
}

/// Rankine–Hugoniot speed of the interface between two smooth solutions.
fn rh_node(
    law: &ScalarLaw,
    left: &SmoothSolution,
    right: &SmoothSolution,
    t: f64,
    psi: f64,
) -> Result<ShockNode> {
    let (u_left, _) = left.sample(t, psi).map_err(span_error(t))?;
    let (u_right, _) = right.sample(t, psi).map_err(span_error(t))?;
    let psi_prime = slope(law, u_left, u_right);
    Ok(ShockNode {
        t,
        psi,
        psi_prime,
        u_left,
        u_right,
        lax_left: law.df(u_left) - psi_prime,
        lax_right: psi_prime - law.df(u_right),
    })
}

fn rh_speed(
    law: &ScalarLaw,
    left: &SmoothSolution,
    right: &SmoothSolution,
    t: f64,
    psi: f64,
) -> Result<f64> {
    Ok(rh_node(law, left, right, t, psi)?.psi_prime)
}

/// RK4 step of the RH equation from a node whose speed is already known.
fn rh_step(
    law: &ScalarLaw,
    left: &SmoothSolution,
    right: &SmoothSolution,
    node: &ShockNode,
    h: f64,
) -> Result<f64> {
    let (t, psi, k1) = (node.t, node.psi, node.psi_prime);
    let k2 = rh_speed(law, left, right, t + 0.5 * h, psi + 0.5 * h * k1)?;
    let k3 = rh_speed(law, left, right, t + 0.5 * h, psi + 0.5 * h * k2)?;
    let k4 = rh_speed(law, left, right, t + h, psi + h * k3)?;
    Ok(psi + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
}

fn admissible(node: &ShockNode, jump_sign: f64) -> bool {
    node.lax_left > 0.0 && node.lax_right > 0.0 && (node.u_right - node.u_left) * jump_sign > 0.0
}

#[inline]
fn grid(t0: f64, k: usize, dt: f64, t_final: f64) -> f64 {
    (t0 + k as f64 * dt).min(t_final)
}

fn check_step(dt: f64, t0: f64, t_final: f64) -> Result<()> {
    if !(dt > 0.0) || !(t_final >= t0) {
        return Err(Error::Parameter(format!(
            "shock tracking needs dt > 0 and t_final >= t0, got dt = {dt}, [{t0}, {t_final}]"
        )));
    }
    Ok(())
}

/// Integrates `psi' = s_f(u_l(t, psi), u_r(t, psi))` from `(t0, psi0)`.
///
/// The path is truncated at the last node with positive Lax margins.
pub fn track_shock_from(
    law: &ScalarLaw,
    left: &SmoothSolution,
    right: &SmoothSolution,
    t0: f64,
    psi0: f64,
    t_final: f64,
    dt: f64,
) -> Result<ShockPath> {
    check_step(dt, t0, t_final)?;
    let first = rh_node(law, left, right, t0, psi0)?;
    let jump_sign = (first.u_right - first.u_left).signum();
    if !admissible(&first, jump_sign) {
        return Err(Error::Precondition(format!(
            "Lax condition fails at t = {t0}, psi = {psi0}: margins ({}, {})",
            first.lax_left, first.lax_right
        )));
    }
    let mut path = ShockPath {
        nodes: vec![first],
        t_final,
        valid_until: None,
    };
    let mut k = 0;
    while path.last().t < t_final {
        let node = *path.last();
        let t_next = grid(t0, k + 1, dt, t_final);
        let psi = rh_step(law, left, right, &node, t_next - node.t)?;
        let next = rh_node(law, left, right, t_next, psi)?;
        if !admissible(&next, jump_sign) {
            path.valid_until = Some(node.t);
            break;
        }
        path.nodes.push(next);
        k += 1;
    }
    Ok(path)
}

pub fn track_shock(
    law: &ScalarLaw,
    left: &SmoothSolution,
    right: &SmoothSolution,
    psi0: f64,
    t_final: f64,
    dt: f64,
) -> Result<ShockPath> {
    track_shock_from(law, left, right, 0.0, psi0, t_final, dt)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MergeEvent {
    pub t_star: f64,
    pub x_star: f64,
}

/// One-sided values at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Smooth(f64),
    Jump { left: f64, right: f64 },
}

impl Value {
    /// The left trace at a jump.
    pub fn left(self) -> f64 {
        match self {
            Value::Smooth(u) => u,
            Value::Jump { left, .. } => left,
        }
    }
}

/// Smooth pieces patched along shock paths.
#[derive(Debug)]
pub struct GluedSolution {
    pub left: SmoothSolution,
    pub right: SmoothSolution,
    pub middle: Option<SmoothSolution>,
    /// One path, or the left and right paths bounding the middle piece.
    pub paths: Vec<ShockPath>,
    /// Path of the merged shock, starting at the merge time.
    pub merged: Option<ShockPath>,
    pub merge: Option<MergeEvent>,
}

pub fn glue(left: SmoothSolution, right: SmoothSolution, path: ShockPath) -> GluedSolution {
    GluedSolution {
        left,
        right,
        middle: None,
        paths: vec![path],
        merged: None,
        merge: None,
    }
}

impl GluedSolution {
    /// End of the interval on which the glued solution is defined.
    pub fn valid_until(&self) -> f64 {
        match (&self.merge, &self.merged) {
            (Some(_), Some(p)) => p.end(),
            _ => self.paths.iter().map(ShockPath::end).fold(f64::INFINITY, f64::min),
        }
    }

    /// Shock positions at `t`, left to right.
    pub fn shock_positions(&self, t: f64) -> Result<Vec<f64>> {
        if let (Some(m), Some(p)) = (&self.merge, &self.merged) {
            if t >= m.t_star {
                return Ok(vec![p.position(t)?]);
            }
        }
        self.paths.iter().map(|p| p.position(t)).collect()
    }

    /// Evaluates the patched solution; at a shock both traces are returned.
    pub fn evaluate(&self, t: f64, x: f64) -> Result<Value> {
        let valid = self.valid_until();
        if t > valid + 1e-12 {
            return Err(Error::Validity { t, valid_until: valid });
        }
        let shocks = self.shock_positions(t)?;
        let pieces: Vec<&SmoothSolution> = if shocks.len() == 2 {
            let middle = self.middle.as_ref().ok_or_else(|| {
                Error::Precondition("two shock paths without a middle solution".into())
            })?;
            vec![&self.left, middle, &self.right]
        } else {
            vec![&self.left, &self.right]
        };
        let at = |piece: &SmoothSolution| piece.sample(t, x).map(|s| s.0);
        for (k, &psi) in shocks.iter().enumerate() {
            if x < psi {
                return Ok(Value::Smooth(at(pieces[k])?));
            }
            if x == psi {
                return Ok(Value::Jump {
                    left: at(pieces[k])?,
                    right: at(pieces[k + 1])?,
                });
            }
        }
        Ok(Value::Smooth(at(pieces[pieces.len() - 1])?))
    }

    /// Pointwise value, taking the left trace at a shock.
    pub fn value(&self, t: f64, x: f64) -> Result<f64> {
        self.evaluate(t, x).map(Value::left)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseResult {
    pub psi_infty: f64,
    /// `|psi'(T) - sigma| / |rate_hint|`.
    pub tail_bound: f64,
    pub truncation_time: f64,
    /// Fit of `|psi' - sigma|` over the second half of the path, when not at floor.
    pub speed_decay: Option<DecayFit>,
}

/// Asymptotic position: `psi0 + int_0^T (psi' - sigma) dt` by trapezoid,
/// plus the exponential tail `(psi'(T) - sigma) / |rate_hint|`.
pub fn asymptotic_phase(path: &ShockPath, sigma: f64, rate_hint: f64) -> Result<PhaseResult> {
    if !(rate_hint < 0.0) {
        return Err(Error::Parameter(format!("rate hint must be negative, got {rate_hint}")));
    }
    let t_end = path.end();
    let nodes: Vec<&ShockNode> = path.nodes.iter().filter(|n| n.t <= t_end).collect();
    let mut integral = 0.0;
    for pair in nodes.windows(2) {
        let h = pair[1].t - pair[0].t;
        integral += 0.5 * h * (pair[0].psi_prime - sigma + pair[1].psi_prime - sigma);
    }
    let last = nodes[nodes.len() - 1];
    let excess = last.psi_prime - sigma;

    let t0 = nodes[0].t;
    let window = (0.5 * (t0 + t_end), t_end);
    let series: Vec<(f64, f64)> = nodes
        .iter()
        .map(|n| (n.t, (n.psi_prime - sigma).abs()))
        .collect();
    let speed_decay = if at_floor(&series, window) {
        None
    } else {
        let floored: Vec<(f64, f64)> = series.iter().map(|&(t, y)| (t, y.max(VALUE_FLOOR))).collect();
        let fit = fit_decay_rate(&floored, window)?;
        if !(fit.rate < 0.0) {
            return Err(Error::Fit(format!(
                "|psi' - sigma| does not decay: fitted rate {} on [{}, {}]",
                fit.rate, window.0, window.1
            )));
        }
        Some(fit)
    };

    let tail = excess / rate_hint.abs();
    Ok(PhaseResult {
        psi_infty: nodes[0].psi + integral + tail,
        tail_bound: tail.abs(),
        truncation_time: t_end,
        speed_decay,
    })
}

/// Tracks the two shocks around a middle state, detects their merge and
/// continues with the merged shock.
///
/// Without a crossing before `t_final` the result has no merge event.
#[allow(clippy::too_many_arguments)]
pub fn two_shock_evolution(
    law: &ScalarLaw,
    left: SmoothSolution,
    middle: SmoothSolution,
    right: SmoothSolution,
    psi_s0: f64,
    psi0: f64,
    t_final: f64,
    dt: f64,
) -> Result<GluedSolution> {
    if !(psi_s0 < psi0) {
        return Err(Error::Parameter(format!(
            "small shock must start left of the main shock: {psi_s0} >= {psi0}"
        )));
    }
    check_step(dt, 0.0, t_final)?;
    let nl = rh_node(law, &left, &middle, 0.0, psi_s0)?;
    let nr = rh_node(law, &middle, &right, 0.0, psi0)?;
    let sign_l = (nl.u_right - nl.u_left).signum();
    let sign_r = (nr.u_right - nr.u_left).signum();
    for (n, sign) in [(&nl, sign_l), (&nr, sign_r)] {
        if !admissible(n, sign) {
            return Err(Error::Precondition(format!(
                "Lax condition fails at psi = {}: margins ({}, {})",
                n.psi, n.lax_left, n.lax_right
            )));
        }
    }
    let mut pl = ShockPath { nodes: vec![nl], t_final, valid_until: None };
    let mut pr = ShockPath { nodes: vec![nr], t_final, valid_until: None };
    let mut merge = None;

    let mut k = 0;
    while pl.last().t < t_final {
        let (a, b) = (*pl.last(), *pr.last());
        let t_next = grid(0.0, k + 1, dt, t_final);
        let h = t_next - a.t;
        let psi_l = rh_step(law, &left, &middle, &a, h)?;
        let psi_r = rh_step(law, &middle, &right, &b, h)?;
        if psi_r - psi_l <= 0.0 {
            let gap = |tau: f64| -> Result<(f64, f64)> {
                let l = rh_step(law, &left, &middle, &a, tau)?;
                let r = rh_step(law, &middle, &right, &b, tau)?;
                Ok((l, r))
            };
            let (mut lo, mut hi) = (0.0, h);
            while hi - lo > dt * MERGE_TOL {
                let mid = 0.5 * (lo + hi);
                let (l, r) = gap(mid)?;
                if r - l > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let tau = 0.5 * (lo + hi);
            let (l, r) = gap(tau)?;
            let t_star = a.t + tau;
            pl.nodes.push(rh_node(law, &left, &middle, t_star, l)?);
            pr.nodes.push(rh_node(law, &middle, &right, t_star, r)?);
            pl.t_final = t_star;
            pr.t_final = t_star;
            merge = Some(MergeEvent { t_star, x_star: r });
            break;
        }
        let nl = rh_node(law, &left, &middle, t_next, psi_l)?;
        let nr = rh_node(law, &middle, &right, t_next, psi_r)?;
        if !admissible(&nl, sign_l) || !admissible(&nr, sign_r) {
            pl.valid_until = Some(a.t);
            pr.valid_until = Some(a.t);
            break;
        }
        pl.nodes.push(nl);
        pr.nodes.push(nr);
        k += 1;
    }

    let merged = match merge {
        Some(m) => Some(track_shock_from(law, &left, &right, m.t_star, m.x_star, t_final.max(m.t_star), dt)?),
        None => None,
    };
    Ok(GluedSolution {
        left,
        right,
        middle: Some(middle),
        paths: vec![pl, pr],
        merged,
        merge,
    })
}
