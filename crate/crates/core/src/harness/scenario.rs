//! Scenario orchestration: data, extension, fans, shocks, oracle, fits.

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::characteristics::{evolve_smooth, toy_blowup_time, FanStatus, SmoothSolution};
use crate::error::{Error, Result, StageExt};
use crate::extension::{extend_half_line, extend_interval, HalfLineData, Profile, Shifted, Side};
use crate::fit::{at_floor, fit_decay_rate, VALUE_FLOOR};
use crate::harness::config::{
    Band, ForcingKind, Laws, PerturbationSpec, ScenarioConfig, ScenarioKind, ToySpec,
};
use crate::harness::report::{CheckResult, DecayReport, FitOutcome, Outcome, Row, Snapshots};
use crate::model::{check_equilibrium, linear_source, RiemannShockSpec, ScalarLaw, EQUILIBRIUM_TOL};
use crate::oracle::{compare, evolve_fv, evolve_fv_observed, merge_time_from_gaps, shock_loci, FvState, Norm};
use crate::poly::Poly;
use crate::shocktracker::{asymptotic_phase, glue, track_shock, two_shock_evolution, GluedSolution, ShockPath};
use crate::spectral::{resolvent_solve, ResolventSolution, spectrum_classify, Grid, ResolventProblem, ShockForcing, SpectralClass};

/// Fraction of the fan's safe half-width used as the default oracle window.
const ORACLE_WINDOW_FRACTION: f64 = 0.8;
/// Merge detection gap and fit band of the FV loci, in cells.
const LOCUS_DETECT_CELLS: f64 = 2.0;
const LOCUS_FIT_CELLS: (f64, f64) = (8.0, 40.0);
/// Stride between grid nodes at which resolvent residuals are evaluated.
const RESIDUAL_STRIDE: usize = 16;

pub fn run_scenario(cfg: &ScenarioConfig) -> Result<DecayReport> {
    cfg.validate()?;
    let laws = cfg.law.build().stage("law")?;
    let mut report = match cfg.kind {
        ScenarioKind::ConstantState => constant_state(cfg, &laws)?,
        ScenarioKind::RiemannShock => riemann_shock(cfg, &laws)?,
        ScenarioKind::ShockPlusSmallShock => shock_plus_small_shock(cfg, &laws)?,
        ScenarioKind::ToyBlowup => toy_blowup(cfg)?,
        ScenarioKind::ResolventCheck => resolvent_check(cfg)?,
        ScenarioKind::SpectrumScan => spectrum_scan(cfg, &laws)?,
    };
    if !cfg.output.snapshots {
        report.snapshots = None;
    }
    Ok(report)
}

fn fit_outcome(series: &[(f64, f64)], window: (f64, f64)) -> FitOutcome {
    if series.iter().any(|&(t, _)| t >= window.0 && t <= window.1) && at_floor(series, window) {
        return FitOutcome::AtFloor { window };
    }
    let floored: Vec<(f64, f64)> = series.iter().map(|&(t, y)| (t, y.max(VALUE_FLOOR))).collect();
    match fit_decay_rate(&floored, window) {
        Ok(f) => FitOutcome::Fitted(f),
        Err(e) => FitOutcome::Failed { window, reason: e.to_string() },
    }
}

fn band_margin(fit: &FitOutcome, band: Band) -> f64 {
    match fit {
        FitOutcome::Fitted(f) => (f.rate - band.lo).min(band.hi - f.rate),
        FitOutcome::AtFloor { .. } => f64::INFINITY,
        FitOutcome::Failed { .. } => f64::NEG_INFINITY,
    }
}

fn max_margin(fit: &FitOutcome, max: f64) -> f64 {
    match fit {
        FitOutcome::Fitted(f) => max - f.rate,
        FitOutcome::AtFloor { .. } => f64::INFINITY,
        FitOutcome::Failed { .. } => f64::NEG_INFINITY,
    }
}

fn side_checks(cfg: &ScenarioConfig, report: &mut DecayReport, sup: &[&str], grad: &[&str]) {
    let worst = |report: &DecayReport, names: &[&str], band: Band| {
        names
            .iter()
            .map(|n| report.fit(n).map_or(f64::NEG_INFINITY, |f| band_margin(f, band)))
            .fold(f64::INFINITY, f64::min)
    };
    if let Some(b) = cfg.checks.decay_rate {
        let m = worst(report, sup, b);
        report.checks.push(CheckResult::from_margin("decay_rate", m));
    }
    if let Some(b) = cfg.checks.gradient_rate {
        let m = worst(report, grad, b);
        report.checks.push(CheckResult::from_margin("gradient_rate", m));
    }
}

fn oracle_l1_check(cfg: &ScenarioConfig, report: &mut DecayReport) {
    if let Some(m) = cfg.checks.oracle_l1 {
        let last = report.rows.iter().rev().find_map(|r| r.oracle_l1);
        let margin = last.map_or(f64::NEG_INFINITY, |v| m.max - v);
        report.checks.push(CheckResult::from_margin("oracle_l1", margin));
    }
}

fn perturbation(spec: &Option<PerturbationSpec>, seed: u64, salt: u64) -> Result<Arc<dyn Profile>> {
    match spec {
        Some(p) => p.profile(seed, salt),
        None => PerturbationSpec::default().profile(seed, salt),
    }
}

/// `g'(u)` at an equilibrium `u`; stability is not required.
fn require_equilibrium(law: &ScalarLaw, u: f64, what: &str) -> Result<f64> {
    let eq = check_equilibrium(law, u, EQUILIBRIUM_TOL);
    if !(eq.g_value.abs() <= EQUILIBRIUM_TOL) {
        return Err(Error::Precondition(format!("{what} = {u} is not an equilibrium: g = {}", eq.g_value)));
    }
    Ok(eq.g_prime)
}

fn convexity(law: &ScalarLaw, lo: f64, hi: f64) -> f64 {
    law.convexity_sign(lo, hi).unwrap_or(1.0)
}

fn fan_snapshot(points: &mut Snapshots, label: &str, fan: &SmoothSolution, t: f64, window: (f64, f64)) {
    if let Ok(slice) = fan.slice(t) {
        points.points.extend(
            slice
                .iter()
                .filter(|s| s.x >= window.0 && s.x <= window.1)
                .map(|s| (label.to_string(), s.x, s.u, Some(s.w))),
        );
    }
}

fn fv_snapshot(points: &mut Snapshots, fv: &FvState) {
    points
        .points
        .extend((0..fv.len()).map(|i| ("fv".to_string(), fv.center(i), fv.cells[i], None)));
}

fn blow_up(fans: &[&SmoothSolution]) -> Option<(f64, f64)> {
    fans.iter()
        .filter_map(|f| match f.status() {
            FanStatus::BlownUp { t, x } => Some((t, x)),
            FanStatus::Alive => None,
        })
        .min_by(|a, b| a.0.total_cmp(&b.0))
}

fn horizon(fans: &[&SmoothSolution]) -> f64 {
    fans.iter().map(|f| f.t_end()).fold(f64::INFINITY, f64::min)
}

fn constant_state(cfg: &ScenarioConfig, laws: &Laws) -> Result<DecayReport> {
    let law = &laws.main;
    let n = &cfg.numerics;
    let ubar = cfg.state.expect("validated").u;
    let rate_hint = require_equilibrium(law, ubar, "state.u").stage("model")?;
    let spec = cfg.perturbation.line.clone().unwrap_or_default();
    let inner = perturbation(&cfg.perturbation.line, cfg.seed, 0)?;
    let data = Shifted { base: ubar, inner: inner.clone() };

    let amp = spec.amplitude;
    let speed = law.max_speed(ubar - amp, ubar + amp);
    let half = n.t_final * speed + n.padding + 8.0 * spec.width;
    let span = (spec.center - half, spec.center + half);
    let fan = evolve_smooth(law, &data, n.t_final, n.n_curves, span, n.dt).stage("characteristics")?;
    let sign = convexity(law, ubar - amp, ubar + amp);

    let mut report = DecayReport::new(cfg.kind);
    report.num("state.u", ubar);
    report.num("g_prime", rate_hint);
    let end = horizon(&[&fan]);
    if let Some((t, x)) = blow_up(&[&fan]) {
        report.outcome = Outcome::BlowUp { t, x };
    }
    let times: Vec<f64> = n.sample_times().into_iter().filter(|&t| t <= end).collect();
    let rows: Result<Vec<Row>> = times
        .par_iter()
        .map(|&t| {
            let (lo, hi) = fan.span_at(t)?;
            let norms = fan.norms(t, ubar, sign, (lo, hi))?;
            Ok(Row {
                sup_err_left: Some(norms.sup_deviation),
                negpart_grad_left: Some(norms.negpart_gradient),
                ..Row::at(t)
            })
        })
        .collect();
    report.rows = rows.stage("characteristics")?;

    let window = n.fit_window();
    report.fits.push(("sup".into(), fit_outcome(&report.column(1), window)));
    report.fits.push(("negpart".into(), fit_outcome(&report.column(3), window)));

    let mut snaps = Snapshots::default();
    fan_snapshot(&mut snaps, "fan", &fan, end, (f64::NEG_INFINITY, f64::INFINITY));

    if cfg.oracle.enabled {
        let o = &cfg.oracle;
        let (a, b) = aligned_domain(spec.center, half, half, o.dx);
        let init = FvState::project(|x| data.value(x), a, b, o.dx).stage("oracle")?;
        let fvs = evolve_fv(law, init.clone(), end, o.cfl, &times).stage("oracle")?;
        let mut tv = vec![(0.0, init.total_variation())];
        tv.extend(fvs.iter().filter(|s| s.t > 0.0).map(|s| (s.t, s.total_variation())));
        report.fits.push(("tv".into(), fit_outcome(&tv, window)));
        let safe = half - n.t_final * speed;
        for row in report.rows.iter_mut() {
            let Some(state) = fvs.iter().find(|s| (s.t - row.t).abs() < 1e-12) else { continue };
            let w = match o.window {
                Some([a, b]) => (a, b),
                None => {
                    let drift = law.df(ubar) * row.t;
                    let r = ORACLE_WINDOW_FRACTION * safe;
                    (spec.center + drift - r, spec.center + drift + r)
                }
            };
            row.oracle_l1 = Some(compare(&fan, state, row.t, Norm::L1, w).stage("oracle")?);
        }
        if let Some(last) = fvs.last() {
            fv_snapshot(&mut snaps, last);
        }
        if let Some(m) = cfg.checks.tv_rate {
            let margin = max_margin(report.fit("tv").expect("pushed above"), m.max);
            report.checks.push(CheckResult::from_margin("tv_rate", margin));
        }
    }
    side_checks(cfg, &mut report, &["sup"], &["negpart"]);
    oracle_l1_check(cfg, &mut report);
    sort_checks(cfg, &mut report);
    report.snapshots = Some(snaps);
    Ok(report)
}

/// Data, fans and the tracked shock of a single-shock scenario.
#[derive(Debug)]
pub struct RiemannRun {
    pub shock: RiemannShockSpec,
    pub glued: GluedSolution,
    pub rate_hint: f64,
    /// Half-width of the fan spans around `psi0`.
    pub half_span: f64,
    /// Largest characteristic speed over the data range.
    pub speed: f64,
    left_data: Arc<dyn Profile>,
    right_data: Arc<dyn Profile>,
    pub delta: f64,
}

impl RiemannRun {
    /// Unextended initial data, left data at the shock itself.
    pub fn initial(&self, x: f64) -> f64 {
        if x <= self.shock.psi0 {
            self.left_data.value(x)
        } else {
            self.right_data.value(x)
        }
    }

    /// FV domain for spacing `dx`, with `psi0` on a cell interface.
    pub fn oracle_domain(&self, dx: f64) -> (f64, f64) {
        aligned_domain(self.shock.psi0, self.half_span, self.half_span, dx)
    }

    /// Default comparison window for a run up to `t_final`.
    pub fn oracle_window(&self, t_final: f64) -> (f64, f64) {
        let r = ORACLE_WINDOW_FRACTION * (self.half_span - t_final * self.speed);
        (self.shock.psi0 - r, self.shock.psi0 + r)
    }
}

/// `[anchor - below, anchor + above]` widened to whole cells of `dx`
/// counted from `anchor`.
fn aligned_domain(anchor: f64, below: f64, above: f64, dx: f64) -> (f64, f64) {
    let k0 = (below / dx).ceil();
    let k1 = (above / dx).ceil();
    (anchor - k0 * dx, anchor + k1 * dx)
}

/// Builds both fans and tracks the shock up to the first blow-up, if any.
pub fn build_riemann(cfg: &ScenarioConfig, laws: &Laws) -> Result<RiemannRun> {
    let n = &cfg.numerics;
    let s = cfg.shock.expect("validated");
    let shock = RiemannShockSpec::new(&laws.main, s.u_minus, s.u_plus, s.psi0).stage("model")?;
    let gm = require_equilibrium(&laws.left, s.u_minus, "shock.u_minus").stage("model")?;
    let gp = require_equilibrium(&laws.right, s.u_plus, "shock.u_plus").stage("model")?;

    let pl = perturbation(&cfg.perturbation.left, cfg.seed, 1)?;
    let pr = perturbation(&cfg.perturbation.right, cfg.seed, 2)?;
    let hl = HalfLineData::new(Side::Left, s.psi0, pl.clone());
    let hr = HalfLineData::new(Side::Right, s.psi0, pr.clone());
    let el = extend_half_line(&hl, n.amplification).stage("extension")?;
    let er = extend_half_line(&hr, n.amplification).stage("extension")?;
    let delta = el.delta.max(er.delta);

    let amp = n.amplification * hl.sup_norm.max(hr.sup_norm);
    let lo = s.u_minus.min(s.u_plus) - amp;
    let hi = s.u_minus.max(s.u_plus) + amp;
    let speed = laws.main.max_speed(lo, hi);
    let half_span = n.t_final * speed + 4.0 * delta + n.padding;
    let span = (s.psi0 - half_span, s.psi0 + half_span);

    let left_data = Shifted { base: s.u_minus, inner: el };
    let right_data = Shifted { base: s.u_plus, inner: er };
    let (left, right) = rayon::join(
        || evolve_smooth(&laws.left, &left_data, n.t_final, n.n_curves, span, n.dt),
        || evolve_smooth(&laws.right, &right_data, n.t_final, n.n_curves, span, n.dt),
    );
    let (left, right) = (left.stage("characteristics")?, right.stage("characteristics")?);
    let end = horizon(&[&left, &right]);
    let path = track_shock(&laws.main, &left, &right, s.psi0, end, n.dt).stage("shocktracker")?;
    Ok(RiemannRun {
        shock,
        glued: glue(left, right, path),
        rate_hint: gm.max(gp),
        half_span,
        speed,
        left_data: Arc::new(Shifted { base: s.u_minus, inner: pl }),
        right_data: Arc::new(Shifted { base: s.u_plus, inner: pr }),
        delta,
    })
}

/// Row of side norms, shock position, speed and Lax margins at `t`.
fn shock_row(
    law: &ScalarLaw,
    left: &SmoothSolution,
    right: &SmoothSolution,
    path: &ShockPath,
    bases: (f64, f64),
    sign: f64,
    t: f64,
) -> Result<Row> {
    let psi = path.position(t)?;
    let speed = path.speed(t)?;
    let (l0, _) = left.span_at(t)?;
    let (_, r1) = right.span_at(t)?;
    let nl = left.norms(t, bases.0, sign, (l0, psi))?;
    let nr = right.norms(t, bases.1, sign, (psi, r1))?;
    let ul = left.sample(t, psi)?.0;
    let ur = right.sample(t, psi)?.0;
    Ok(Row {
        sup_err_left: Some(nl.sup_deviation),
        sup_err_right: Some(nr.sup_deviation),
        negpart_grad_left: Some(nl.negpart_gradient),
        negpart_grad_right: Some(nr.negpart_gradient),
        psi: Some(psi),
        psi_prime: Some(speed),
        lax_margin_left: Some(law.df(ul) - speed),
        lax_margin_right: Some(speed - law.df(ur)),
        ..Row::at(t)
    })
}

fn riemann_shock(cfg: &ScenarioConfig, laws: &Laws) -> Result<DecayReport> {
    let n = &cfg.numerics;
    let run = build_riemann(cfg, laws)?;
    let g = &run.glued;
    let path = &g.paths[0];
    let shock = run.shock;
    let sign = convexity(&laws.main, shock.u_minus.min(shock.u_plus), shock.u_minus.max(shock.u_plus));

    let mut report = DecayReport::new(cfg.kind);
    report.num("u_minus", shock.u_minus);
    report.num("u_plus", shock.u_plus);
    report.num("sigma", shock.sigma);
    report.num("psi0", shock.psi0);
    report.num("delta", run.delta);
    report.num("min_lax_margin", path.min_lax_margin());
    if let Some(v) = path.valid_until() {
        report.num("valid_until", v);
    }
    if let Some((t, x)) = blow_up(&[&g.left, &g.right]) {
        report.outcome = Outcome::BlowUp { t, x };
    }
    let end = path.end();
    let times: Vec<f64> = n.sample_times().into_iter().filter(|&t| t <= end + 1e-12).collect();
    let rows: Result<Vec<Row>> = times
        .par_iter()
        .map(|&t| shock_row(&laws.main, &g.left, &g.right, path, (shock.u_minus, shock.u_plus), sign, t))
        .collect();
    report.rows = rows.stage("shocktracker")?;

    let window = n.fit_window();
    for (name, col) in [("sup_left", 1), ("sup_right", 2), ("negpart_left", 3), ("negpart_right", 4)] {
        report.fits.push((name.into(), fit_outcome(&report.column(col), window)));
    }

    let phase = if run.rate_hint < 0.0 {
        asymptotic_phase(path, shock.sigma, run.rate_hint)
    } else {
        Err(Error::Precondition(format!("no asymptotic phase without decay: max g' = {}", run.rate_hint)))
    };
    let mut psi_infty = None;
    match &phase {
        Ok(ph) => {
            report.num("psi_infty", ph.psi_infty);
            report.num("phase_offset", ph.psi_infty - shock.psi0);
            report.num("phase_tail_bound", ph.tail_bound);
            report.num("phase_truncation_time", ph.truncation_time);
            psi_infty = Some(ph.psi_infty);
            let series: Vec<(f64, f64)> = report
                .column(5)
                .into_iter()
                .map(|(t, psi)| (t, (psi - ph.psi_infty).abs()))
                .collect();
            report.fits.push(("phase".into(), fit_outcome(&series, window)));
        }
        Err(e) => {
            report.text("phase_error", e.to_string());
            report.fits.push(("phase".into(), FitOutcome::Failed { window, reason: e.to_string() }));
        }
    }

    let mut snaps = Snapshots::default();
    let psi_end = path.position(end).stage("shocktracker")?;
    fan_snapshot(&mut snaps, "fan_left", &g.left, end, (f64::NEG_INFINITY, psi_end));
    fan_snapshot(&mut snaps, "fan_right", &g.right, end, (psi_end, f64::INFINITY));

    if cfg.oracle.enabled {
        let o = &cfg.oracle;
        let (lo, hi) = run.oracle_domain(o.dx);
        let init = FvState::project(|x| run.initial(x), lo, hi, o.dx).stage("oracle")?;
        let fvs = evolve_fv(&laws.main, init, end, o.cfl, &times).stage("oracle")?;
        let w = match o.window {
            Some([a, b]) => (a, b),
            None => run.oracle_window(n.t_final),
        };
        for row in report.rows.iter_mut() {
            if let Some(state) = fvs.iter().find(|s| (s.t - row.t).abs() < 1e-12) {
                row.oracle_l1 = Some(compare(g, state, row.t, Norm::L1, w).stage("oracle")?);
            }
        }
        if let Some(last) = fvs.last() {
            fv_snapshot(&mut snaps, last);
        }
    }

    side_checks(cfg, &mut report, &["sup_left", "sup_right"], &["negpart_left", "negpart_right"]);
    if let Some(m) = cfg.checks.phase_rate {
        let margin = max_margin(report.fit("phase").expect("pushed above"), m.max);
        report.checks.push(CheckResult::from_margin("phase_rate", margin));
    }
    if let Some(m) = cfg.checks.min_lax_margin {
        report.checks.push(CheckResult::from_margin("min_lax_margin", path.min_lax_margin() - m.min));
    }
    if let Some(e) = cfg.checks.phase_offset {
        let margin = psi_infty.map_or(f64::NEG_INFINITY, |p| e.tol - (p - shock.psi0 - e.value).abs());
        report.checks.push(CheckResult::from_margin("phase_offset", margin));
    }
    oracle_l1_check(cfg, &mut report);
    sort_checks(cfg, &mut report);
    report.snapshots = Some(snaps);
    Ok(report)
}

/// L1 discrepancy against the FV oracle at `t_final` for `dx, dx/2, ...`
/// and the fitted order of convergence.
pub fn oracle_refinement(cfg: &ScenarioConfig, dx: f64, levels: usize) -> Result<(Vec<(f64, f64)>, f64)> {
    if cfg.kind != ScenarioKind::RiemannShock {
        return Err(Error::Config("refinement studies need a riemann_shock config".into()));
    }
    if levels < 2 || !(dx > 0.0) {
        return Err(Error::Config("refinement needs dx > 0 and at least 2 levels".into()));
    }
    let laws = cfg.law.build().stage("law")?;
    let run = build_riemann(cfg, &laws)?;
    let t = run.glued.paths[0].end();
    if t < cfg.numerics.t_final {
        return Err(Error::Precondition(format!("shock path ends at t = {t} before t_final")));
    }
    let w = match cfg.oracle.window {
        Some([a, b]) => (a, b),
        None => run.oracle_window(t),
    };
    let dxs: Vec<f64> = (0..levels).map(|k| dx / 2f64.powi(k as i32)).collect();
    let errs: Result<Vec<(f64, f64)>> = dxs
        .iter()
        .map(|&h| {
            let (lo, hi) = run.oracle_domain(h);
            let init = FvState::project(|x| run.initial(x), lo, hi, h)?;
            let fv = evolve_fv(&laws.main, init, t, cfg.oracle.cfl, &[])?;
            let e = compare(&run.glued, fv.last().expect("final state"), t, Norm::L1, w)?;
            Ok((h, e))
        })
        .collect();
    let errs = errs.stage("oracle")?;
    let logs: Vec<(f64, f64)> = errs.iter().map(|&(h, e)| (h.ln(), e.max(VALUE_FLOOR).ln())).collect();
    let order = crate::fit::linear_fit(&logs).map_or(f64::NAN, |(s, _)| s);
    Ok((errs, order))
}

fn shock_plus_small_shock(cfg: &ScenarioConfig, laws: &Laws) -> Result<DecayReport> {
    let n = &cfg.numerics;
    let s = cfg.shock.expect("validated");
    let (um, up) = (s.u_minus, s.u_plus);
    let umid = s.u_middle.expect("validated");
    let psi_s0 = s.psi_s0.expect("validated");
    if !(psi_s0 < s.psi0) {
        return Err(Error::Config("shock.psi_s0 must lie left of shock.psi0".into()));
    }
    let gm = require_equilibrium(&laws.left, um, "shock.u_minus").stage("model")?;
    let gp = require_equilibrium(&laws.right, up, "shock.u_plus").stage("model")?;

    let pl = perturbation(&cfg.perturbation.left, cfg.seed, 1)?;
    let pm = perturbation(&cfg.perturbation.middle, cfg.seed, 3)?;
    let pr = perturbation(&cfg.perturbation.right, cfg.seed, 2)?;
    let hl = HalfLineData::new(Side::Left, psi_s0, pl.clone());
    let hr = HalfLineData::new(Side::Right, s.psi0, pr.clone());
    let el = extend_half_line(&hl, n.amplification).stage("extension")?;
    let er = extend_half_line(&hr, n.amplification).stage("extension")?;
    let em = extend_interval(psi_s0, s.psi0, pm.clone(), n.amplification).stage("extension")?;
    let delta = el.delta.max(er.delta).max(em.delta);
    let amp = n.amplification * hl.sup_norm.max(hr.sup_norm).max(em.value(0.5 * (psi_s0 + s.psi0)).abs());
    let (lo, hi) = (um.min(up).min(umid) - amp, um.max(up).max(umid) + amp);
    let speed = laws.main.max_speed(lo, hi);
    let pad = n.t_final * speed + 4.0 * delta + n.padding;
    let span = (psi_s0 - pad, s.psi0 + pad);

    let dl = Shifted { base: um, inner: el };
    let dm = Shifted { base: umid, inner: em };
    let dr = Shifted { base: up, inner: er };
    let evolve = |law: &ScalarLaw, d: &dyn Profile| evolve_smooth(law, d, n.t_final, n.n_curves, span, n.dt);
    let (left, (middle, right)) = rayon::join(
        || evolve(&laws.left, &dl),
        || rayon::join(|| evolve(&laws.main, &dm), || evolve(&laws.right, &dr)),
    );
    let left = left.stage("characteristics")?;
    let middle = middle.stage("characteristics")?;
    let right = right.stage("characteristics")?;

    let mut report = DecayReport::new(cfg.kind);
    report.num("u_minus", um);
    report.num("u_middle", umid);
    report.num("u_plus", up);
    report.num("psi_s0", psi_s0);
    report.num("psi0", s.psi0);
    if let Some((t, x)) = blow_up(&[&left, &middle, &right]) {
        report.outcome = Outcome::BlowUp { t, x };
    }
    let end = horizon(&[&left, &middle, &right]);
    let g = two_shock_evolution(&laws.main, left, middle, right, psi_s0, s.psi0, end, n.dt)
        .stage("shocktracker")?;
    let t_star = g.merge.map(|m| m.t_star);
    match g.merge {
        Some(m) => {
            report.num("t_star", m.t_star);
            report.num("x_star", m.x_star);
        }
        None => report.text("t_star", "none"),
    }
    let min_lax = g
        .paths
        .iter()
        .chain(g.merged.iter())
        .map(ShockPath::min_lax_margin)
        .fold(f64::INFINITY, f64::min);
    report.num("min_lax_margin", min_lax);

    let valid = g.valid_until();
    let times: Vec<f64> = n.sample_times().into_iter().filter(|&t| t <= valid + 1e-12).collect();
    let sign = convexity(&laws.main, lo, hi);
    let rows: Result<Vec<Row>> = times
        .par_iter()
        .map(|&t| two_shock_row(&laws.main, &g, (um, up), sign, t))
        .collect();
    report.rows = rows.stage("shocktracker")?;
    let window = n.fit_window();
    for (name, col) in [("sup_left", 1), ("sup_right", 2), ("negpart_left", 3), ("negpart_right", 4)] {
        report.fits.push((name.into(), fit_outcome(&report.column(col), window)));
    }
    report.num("rate_hint", gm.max(gp));

    let mut snaps = Snapshots::default();
    if let Ok(shocks) = g.shock_positions(valid) {
        let first = shocks.first().copied().unwrap_or(f64::INFINITY);
        let last = shocks.last().copied().unwrap_or(f64::NEG_INFINITY);
        fan_snapshot(&mut snaps, "fan_left", &g.left, valid, (f64::NEG_INFINITY, first));
        if shocks.len() == 2 {
            if let Some(m) = &g.middle {
                fan_snapshot(&mut snaps, "fan_middle", m, valid, (first, last));
            }
        }
        fan_snapshot(&mut snaps, "fan_right", &g.right, valid, (last, f64::INFINITY));
    }

    let mut fv_merge = None;
    if cfg.oracle.enabled {
        let o = &cfg.oracle;
        let init_fn = |x: f64| {
            if x <= psi_s0 {
                um + pl.value(x)
            } else if x <= s.psi0 {
                umid + pm.value(x)
            } else {
                up + pr.value(x)
            }
        };
        let (a, b) = aligned_domain(psi_s0, psi_s0 - span.0, span.1 - psi_s0, o.dx);
        let init = FvState::project(init_fn, a, b, o.dx).stage("oracle")?;
        let mut gaps: Vec<(f64, Option<f64>)> = Vec::new();
        let threshold = o.locus_threshold;
        let mut observer = |st: &FvState| {
            let loci = shock_loci(st, 2, threshold);
            let gap = if loci.len() == 2 { Some(loci[1] - loci[0]) } else { None };
            gaps.push((st.t, gap));
        };
        let fvs = evolve_fv_observed(&laws.main, init, valid, o.cfl, &times, &mut observer).stage("oracle")?;
        fv_merge = merge_time_from_gaps(
            &gaps,
            LOCUS_DETECT_CELLS * o.dx,
            (LOCUS_FIT_CELLS.0 * o.dx, LOCUS_FIT_CELLS.1 * o.dx),
        );
        match fv_merge {
            Some(t) => report.num("oracle_t_star", t),
            None => report.text("oracle_t_star", "none"),
        }
        let r = ORACLE_WINDOW_FRACTION * (pad - n.t_final * speed);
        let w = match o.window {
            Some([a, b]) => (a, b),
            None => (psi_s0 - r, s.psi0 + r),
        };
        for row in report.rows.iter_mut() {
            if let Some(state) = fvs.iter().find(|st| (st.t - row.t).abs() < 1e-12) {
                row.oracle_l1 = Some(compare(&g, state, row.t, Norm::L1, w).stage("oracle")?);
            }
        }
        if let Some(last) = fvs.last() {
            fv_snapshot(&mut snaps, last);
        }
    }

    side_checks(cfg, &mut report, &["sup_left", "sup_right"], &["negpart_left", "negpart_right"]);
    if let Some(m) = cfg.checks.min_lax_margin {
        report.checks.push(CheckResult::from_margin("min_lax_margin", min_lax - m.min));
    }
    if let Some(e) = cfg.checks.merge_time {
        let margin = t_star.map_or(f64::NEG_INFINITY, |t| e.tol - (t - e.value).abs());
        report.checks.push(CheckResult::from_margin("merge_time", margin));
    }
    if let Some(c) = cfg.checks.oracle_merge {
        let closing = (g.paths[0].start().psi_prime - g.paths[1].start().psi_prime).abs();
        let tol = c.cells * cfg.oracle.dx / closing.max(f64::MIN_POSITIVE);
        report.num("oracle_merge_tolerance", tol);
        let margin = match (t_star, fv_merge) {
            (Some(a), Some(b)) => tol - (a - b).abs(),
            _ => f64::NEG_INFINITY,
        };
        report.checks.push(CheckResult::from_margin("oracle_merge", margin));
    }
    oracle_l1_check(cfg, &mut report);
    sort_checks(cfg, &mut report);
    report.snapshots = Some(snaps);
    Ok(report)
}

/// Outer-side norms and the rightmost shock of a two-shock solution.
fn two_shock_row(law: &ScalarLaw, g: &GluedSolution, bases: (f64, f64), sign: f64, t: f64) -> Result<Row> {
    let path = match (&g.merge, &g.merged) {
        (Some(m), Some(p)) if t >= m.t_star => p,
        _ => &g.paths[1],
    };
    let mut row = shock_row(law, &g.left, &g.right, path, bases, sign, t)?;
    let shocks = g.shock_positions(t)?;
    let first = shocks[0];
    let (l0, _) = g.left.span_at(t)?;
    let nl = g.left.norms(t, bases.0, sign, (l0, first))?;
    row.sup_err_left = Some(nl.sup_deviation);
    row.negpart_grad_left = Some(nl.negpart_gradient);
    if shocks.len() == 2 {
        let ul = g.middle.as_ref().expect("middle piece").sample(t, path.position(t)?)?.0;
        row.lax_margin_left = Some(law.df(ul) - path.speed(t)?);
    }
    Ok(row)
}

/// `(w0, closed-form time, fan time, max |w|)`.
type ToyCurve = (f64, Option<f64>, Option<f64>, f64);

fn toy_blowup(cfg: &ScenarioConfig) -> Result<DecayReport> {
    let toy: &ToySpec = cfg.toy.as_ref().expect("validated");
    let n = &cfg.numerics;
    let mut report = DecayReport::new(cfg.kind);
    report.num("alpha", toy.alpha);
    report.num("beta", toy.beta);
    let law = ScalarLaw::new(
        Poly::new(vec![0.0, 0.0, 0.5 * toy.alpha]),
        linear_source(toy.beta, 0.0),
        format!("toy alpha={} beta={}", toy.alpha, toy.beta),
    );
    let results: Result<Vec<ToyCurve>> = toy
        .w0
        .par_iter()
        .map(|&w0| {
            let data = crate::extension::Shape::Tanh { amplitude: w0, width: 1.0, center: 0.0 };
            let fan = evolve_smooth(&law, &data, toy.t_final, n.n_curves, (-toy.half_span, toy.half_span), n.dt)?;
            let fan_t = match fan.status() {
                FanStatus::BlownUp { t, .. } => Some(t),
                FanStatus::Alive => None,
            };
            let mut max_w: f64 = 0.0;
            for j in 0..fan.times().len() {
                for s in fan.snapshot(j) {
                    max_w = max_w.max(s.w.abs());
                }
            }
            Ok((w0, toy_blowup_time(toy.alpha, toy.beta, w0), fan_t, max_w))
        })
        .collect();
    let results = results.stage("characteristics")?;
    let mut margin = f64::INFINITY;
    for (i, &(w0, exact, fan_t, max_w)) in results.iter().enumerate() {
        let key = |s: &str| format!("toy.{i}.{s}");
        report.num(key("w0"), w0);
        match exact {
            Some(t) => report.num(key("t_star_closed_form"), t),
            None => report.text(key("t_star_closed_form"), "none"),
        }
        match fan_t {
            Some(t) => report.num(key("t_star_fan"), t),
            None => report.text(key("t_star_fan"), "none"),
        }
        report.num(key("max_abs_w"), max_w);
        if let Some(c) = cfg.checks.blowup_time {
            let m = match (exact, fan_t) {
                (Some(a), Some(b)) => c.tol - (a - b).abs(),
                // global existence: relative growth of |w| over its initial sup
                (None, None) => {
                    let bound = w0.abs().max(f64::MIN_POSITIVE);
                    c.tol - (max_w - bound).max(0.0) / bound
                }
                _ => f64::NEG_INFINITY,
            };
            margin = margin.min(m);
        }
    }
    if cfg.checks.blowup_time.is_some() {
        report.checks.push(CheckResult::from_margin("blowup_time", margin));
    }
    Ok(report)
}

/// One randomized resolvent problem and whether it is a positivity case.
fn random_resolvent(rng: &mut ChaCha8Rng, positivity: bool) -> Result<ResolventProblem> {
    let s = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    let a0: f64 = rng.gen_range(1.0..2.5);
    let a1: f64 = rng.gen_range(0.0..(a0 - 0.5));
    let ka: f64 = rng.gen_range(0.2..2.0);
    let pa: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let b0: f64 = rng.gen_range(-2.0..1.0);
    let b1: f64 = rng.gen_range(0.0..1.0);
    let kb: f64 = rng.gen_range(0.2..2.0);
    let margin: f64 = rng.gen_range(1.0..3.0);
    let im = if positivity { 0.0 } else { rng.gen_range(-2.0..2.0) };
    let (f0, f1, kf): (f64, f64, f64) = (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0), rng.gen_range(0.2..2.0));
    let fi: f64 = if positivity { 0.0 } else { rng.gen_range(-1.0..1.0) };
    let lambda = Complex64::new(b0 + b1 + margin, im);
    let a: Arc<dyn Fn(f64) -> f64 + Send + Sync> = Arc::new(move |x: f64| s * (a0 + a1 * (ka * x + pa).sin()));
    let b: Arc<dyn Fn(f64) -> f64 + Send + Sync> = Arc::new(move |x: f64| b0 + b1 * (kb * x).cos());
    let forcing: Arc<dyn Fn(f64) -> Complex64 + Send + Sync> = if positivity {
        Arc::new(move |x: f64| Complex64::new(f0 + f1 * (kf * x).cos().powi(2), 0.0))
    } else {
        Arc::new(move |x: f64| Complex64::new(f0 + f1 * (kf * x).cos(), fi * (kf * x).sin()))
    };
    let grid = Grid::for_margin(0.0, a0 + a1, margin)?;
    Ok(ResolventProblem::new(a, b, lambda, forcing, grid))
}

/// Metrics of one solved resolvent problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolventStats {
    pub relative_residual: f64,
    /// `(sup |v| - ||F|| / (Re lambda - sup b)) / ||F||`; nonpositive when the bound holds.
    pub bound_excess: f64,
    /// Smallest `Re v` at interior grid nodes; only for positivity cases.
    pub min_real: Option<f64>,
}

fn interior_min_real(sol: &ResolventSolution) -> f64 {
    let (lo, hi) = sol.interior();
    let g = sol.grid();
    (0..g.n)
        .filter(|&i| g.node(i) >= lo && g.node(i) <= hi)
        .map(|i| sol.values()[i].re)
        .fold(f64::INFINITY, f64::min)
}

/// Solves `count` seeded problems; every fourth has real `lambda` and
/// nonnegative forcing.
pub fn resolvent_batch(seed: u64, count: usize) -> Result<Vec<ResolventStats>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let problems: Result<Vec<(ResolventProblem, bool)>> = (0..count)
        .map(|k| {
            let pos = k % 4 == 3;
            random_resolvent(&mut rng, pos).map(|p| (p, pos))
        })
        .collect();
    problems?
        .par_iter()
        .map(|(p, pos)| {
            let sol = resolvent_solve(p)?;
            let f = sol.forcing_norm();
            let residual = sol.residual(RESIDUAL_STRIDE)?;
            Ok(ResolventStats {
                relative_residual: residual / f,
                bound_excess: (sol.sup_norm() - sol.sup_bound()) / f,
                min_real: pos.then(|| interior_min_real(&sol)),
            })
        })
        .collect()
}

fn resolvent_check(cfg: &ScenarioConfig) -> Result<DecayReport> {
    let count = cfg.resolvent.as_ref().map_or(100, |r| r.count);
    let stats = resolvent_batch(cfg.seed, count).stage("spectral")?;
    let mut report = DecayReport::new(cfg.kind);
    let max_res = stats.iter().map(|s| s.relative_residual).fold(0.0, f64::max);
    let max_excess = stats.iter().map(|s| s.bound_excess).fold(f64::NEG_INFINITY, f64::max);
    let min_re = stats.iter().filter_map(|s| s.min_real).fold(f64::INFINITY, f64::min);
    report.num("resolvent.count", count as f64);
    report.num("resolvent.max_relative_residual", max_res);
    report.num("resolvent.max_bound_excess", max_excess);
    report.num("resolvent.min_positive_case_real", min_re);
    if let Some(m) = cfg.checks.resolvent_residual {
        report.checks.push(CheckResult::from_margin("resolvent_residual", m.max - max_res));
    }
    if let Some(m) = cfg.checks.resolvent_bound {
        report.checks.push(CheckResult::from_margin("resolvent_bound", m.max - max_excess));
    }
    if let Some(m) = cfg.checks.resolvent_positivity {
        report.checks.push(CheckResult::from_margin("resolvent_positivity", min_re - m.min));
    }
    Ok(report)
}

pub fn class_name(c: SpectralClass) -> &'static str {
    match c {
        SpectralClass::ResolventSet => "resolvent",
        SpectralClass::EssentialSpectrum => "essential",
        SpectralClass::Eigenvalue { .. } => "eigenvalue",
    }
}

fn spectrum_scan(cfg: &ScenarioConfig, laws: &Laws) -> Result<DecayReport> {
    let s = cfg.shock.expect("validated");
    let shock = RiemannShockSpec::new(&laws.main, s.u_minus, s.u_plus, s.psi0).stage("model")?;
    let spec = cfg.spectrum.clone().unwrap_or(crate::harness::config::SpectrumSpec {
        lambdas: Vec::new(),
        phi: [1.0, 0.0],
        forcing: ForcingKind::Zero,
        expect: None,
    });
    let forcing: Arc<dyn Fn(f64) -> Complex64 + Send + Sync> = match spec.forcing {
        ForcingKind::Zero => Arc::new(|_| Complex64::new(0.0, 0.0)),
        ForcingKind::Constant => Arc::new(|_| Complex64::new(1.0, 0.0)),
        ForcingKind::Gaussian => Arc::new(|x: f64| Complex64::new((-x * x).exp(), 0.0)),
    };
    let data = ShockForcing { forcing, phi: Complex64::new(spec.phi[0], spec.phi[1]) };
    let verdicts: Result<Vec<_>> = spec
        .lambdas
        .par_iter()
        .map(|&[re, im]| spectrum_classify(&laws.main, &shock, Complex64::new(re, im), Some(&data)))
        .collect();
    let verdicts = verdicts.stage("spectral")?;
    let mut report = DecayReport::new(cfg.kind);
    report.num("sigma", shock.sigma);
    let mut mismatches = 0usize;
    for (i, v) in verdicts.iter().enumerate() {
        let key = |k: &str| format!("spectrum.{i}.{k}");
        report.num(key("lambda_re"), v.lambda.re);
        report.num(key("lambda_im"), v.lambda.im);
        report.text(key("class"), class_name(v.class));
        if let SpectralClass::Eigenvalue { multiplicity } = v.class {
            report.num(key("multiplicity"), multiplicity as f64);
        }
        if let Some(r) = v.response {
            report.num(key("psi_re"), r.psi.re);
            report.num(key("psi_im"), r.psi.im);
            report.num(key("v_minus_abs"), r.v_minus.norm());
            report.num(key("v_plus_abs"), r.v_plus.norm());
        }
        if let Some(expect) = &spec.expect {
            if expect[i] != class_name(v.class) {
                mismatches += 1;
            }
        }
    }
    if cfg.checks.spectrum_classes.is_some() {
        let margin = if mismatches == 0 { 1.0 } else { -(mismatches as f64) };
        report.checks.push(CheckResult::from_margin("spectrum_classes", margin));
    }
    Ok(report)
}

/// Orders check lines as the config lists them.
fn sort_checks(cfg: &ScenarioConfig, report: &mut DecayReport) {
    let order = cfg.checks.enabled();
    report
        .checks
        .sort_by_key(|c| order.iter().position(|n| *n == c.name).unwrap_or(usize::MAX));
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> ScenarioConfig {
        ScenarioConfig::from_toml(text).unwrap()
    }

    #[test]
    fn unperturbed_shock_is_at_floor() {
        let c = cfg(r#"
            kind = "riemann_shock"
            [shock]
            u_minus = 1.0
            u_plus = -1.0
            psi0 = 0.25
            [numerics]
            t_final = 2.0
            n_curves = 257
            dt = 0.01
            [checks]
            decay_rate = { lo = -2.2, hi = -1.8 }
            phase_offset = { value = 0.0, tol = 1e-12 }
        "#);
        let r = run_scenario(&c).unwrap();
        for name in ["sup_left", "sup_right", "negpart_left", "negpart_right", "phase"] {
            assert!(matches!(r.fit(name), Some(FitOutcome::AtFloor { .. })), "{name}");
        }
        assert_eq!(r.metric("psi_infty"), Some(0.25));
        assert!(r.all_passed());
        assert_eq!(r.exit_code(), 0);
    }

    #[test]
    fn toy_reports_both_times() {
        let c = cfg(r#"
            kind = "toy_blowup"
            [toy]
            w0 = [-2.0]
            t_final = 2.0
            [numerics]
            n_curves = 257
            [checks]
            blowup_time = { tol = 1e-3 }
        "#);
        let r = run_scenario(&c).unwrap();
        let exact = r.metric("toy.0.t_star_closed_form").unwrap();
        let fan = r.metric("toy.0.t_star_fan").unwrap();
        assert!((exact - 2f64.ln()).abs() < 1e-12);
        assert!((fan - exact).abs() < 1e-3);
        assert!(r.all_passed());
    }

    #[test]
    fn unsupported_check_is_a_config_error() {
        let c = ScenarioConfig::from_toml("kind = \"toy_blowup\"\n[toy]\nw0 = [1.0]\n[checks]\nphase_rate = { max = 0.0 }\n");
        assert!(matches!(c, Err(Error::Config(_))));
    }

    #[test]
    fn unstable_state_is_tagged() {
        let c = cfg("kind = \"constant_state\"\n[state]\nu = 0.5\n");
        let err = run_scenario(&c).unwrap_err();
        assert!(matches!(err, Error::Stage { stage: "model", .. }));
        assert!(matches!(err.root(), Error::Precondition(_)));
    }
}
