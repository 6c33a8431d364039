//! The acceptance suite: one function per criterion, each returning a
//! pass/fail line with the measured numbers.

use std::fmt;
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::extension::{extend_half_line, HalfLineData, Profile, Side};
use crate::fit::fit_decay_rate;
use crate::harness::config::{random_spline, ScenarioConfig};
use crate::harness::report::{DecayReport, FitOutcome};
use crate::harness::scenario::{oracle_refinement, resolvent_batch, run_scenario};
use crate::model::ScalarLaw;
use crate::oracle::{evolve_fv, FvState};
use crate::spectral::{spectrum_classify, ShockForcing, SpectralClass};

pub const SUITE_NAME: &str = "acceptance";

pub const A1_CONFIG: &str = include_str!("../../configs/a1_constant_state.toml");
pub const A2_CONFIG: &str = include_str!("../../configs/a2_riemann_shock.toml");
pub const A3_CONFIG: &str = include_str!("../../configs/a3_phase_offset.toml");
pub const A4_CONFIG: &str = include_str!("../../configs/a4_toy_blowup.toml");
pub const A5_FROZEN_CONFIG: &str = include_str!("../../configs/a5_merge_frozen.toml");
pub const A5_BISTABLE_CONFIG: &str = include_str!("../../configs/a5_merge_bistable.toml");
pub const A6_CONFIG: &str = include_str!("../../configs/a6_oracle_convergence.toml");
pub const A7_CONFIG: &str = include_str!("../../configs/a7_resolvent.toml");
pub const A8_CONFIG: &str = include_str!("../../configs/a8_spectrum.toml");

pub const RATE_BAND: (f64, f64) = (-2.2, -1.8);
pub const PHASE_RATE_MAX: f64 = -1.8;
pub const LAX_MARGIN_MIN: f64 = 0.8;
pub const PHASE_OFFSET: f64 = 0.025;
pub const PHASE_OFFSET_TOL: f64 = 1e-4;
pub const BLOWUP_TOL: f64 = 1e-3;
pub const MERGE_TIME_TOL: f64 = 1e-3;
pub const MERGE_ORACLE_CELLS: f64 = 2.0;
pub const A6_DX: [f64; 3] = [1.0 / 100.0, 1.0 / 200.0, 1.0 / 400.0];
pub const A6_MIN_ORDER: f64 = 0.8;
pub const RESOLVENT_RESIDUAL: f64 = 1e-6;
pub const RESOLVENT_SLACK: f64 = 1e-6;
pub const RESOLVENT_PROBLEMS: usize = 100;
pub const SPECTRUM_PSI_TOL: f64 = 1e-12;
pub const A9_SAMPLES: usize = 500;
/// Relative rounding allowance on the extension bounds.
pub const A9_ROUNDING: f64 = 1e-14;
pub const TV_RATE_MAX: f64 = -1.85;

pub const A1_BUDGET: Duration = Duration::from_secs(10);
pub const A2_BUDGET: Duration = Duration::from_secs(30);
pub const A4_BUDGET: Duration = Duration::from_secs(5);
pub const A6_BUDGET: Duration = Duration::from_secs(120);

#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub id: &'static str,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub budget: Option<Duration>,
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{} {verdict} {}: {} [{:.2} s", self.id, self.title, self.detail, self.elapsed.as_secs_f64())?;
        if let Some(b) = self.budget {
            write!(f, " of {} s", b.as_secs())?;
        }
        write!(f, "]")
    }
}

fn timed(
    id: &'static str,
    title: &'static str,
    budget: Option<Duration>,
    body: impl FnOnce() -> Result<(bool, String)>,
) -> CriterionResult {
    let start = Instant::now();
    let outcome = body();
    let elapsed = start.elapsed();
    let (mut passed, mut detail) = match outcome {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}")),
    };
    if let Some(b) = budget {
        if elapsed > b {
            passed = false;
            detail.push_str("; over the runtime budget");
        }
    }
    CriterionResult { id, title, passed, detail, elapsed, budget }
}

fn scenario(text: &str) -> Result<DecayReport> {
    run_scenario(&ScenarioConfig::from_toml(text)?)
}

fn rate(report: &DecayReport, name: &str) -> Option<f64> {
    report.fit(name).and_then(FitOutcome::rate)
}

fn in_band(r: Option<f64>, band: (f64, f64)) -> bool {
    r.is_some_and(|r| r >= band.0 && r <= band.1)
}

fn show(r: Option<f64>) -> String {
    r.map_or("n/a".into(), |v| format!("{v:.4}"))
}

pub fn a1_constant_state() -> CriterionResult {
    timed("A1", "constant-state decay rate", Some(A1_BUDGET), || {
        let r = scenario(A1_CONFIG)?;
        let (sup, neg) = (rate(&r, "sup"), rate(&r, "negpart"));
        let ok = in_band(sup, RATE_BAND) && in_band(neg, RATE_BAND);
        Ok((ok, format!("sup rate {}, negative-part gradient rate {}", show(sup), show(neg))))
    })
}

pub fn a2_riemann_shock() -> CriterionResult {
    timed("A2", "Riemann shock orbital stability", Some(A2_BUDGET), || {
        let r = scenario(A2_CONFIG)?;
        let (l, rr) = (rate(&r, "sup_left"), rate(&r, "sup_right"));
        let phase = rate(&r, "phase");
        let lax = r.metric("min_lax_margin").unwrap_or(f64::NEG_INFINITY);
        let ok = in_band(l, RATE_BAND)
            && in_band(rr, RATE_BAND)
            && phase.is_some_and(|p| p <= PHASE_RATE_MAX)
            && lax > LAX_MARGIN_MIN;
        Ok((
            ok,
            format!(
                "side rates {} / {}, phase rate {}, min Lax margin {lax:.4}",
                show(l),
                show(rr),
                show(phase)
            ),
        ))
    })
}

pub fn a3_phase_offset() -> CriterionResult {
    timed("A3", "asymptotic phase closed form", None, || {
        let r = scenario(A3_CONFIG)?;
        let off = r.metric("phase_offset");
        let ok = off.is_some_and(|o| (o - PHASE_OFFSET).abs() <= PHASE_OFFSET_TOL);
        let err = off.map_or(f64::NAN, |o| (o - PHASE_OFFSET).abs());
        Ok((ok, format!("psi_infty - psi0 = {}, error {err:.2e}", show(off))))
    })
}

pub fn a4_toy_blowup() -> CriterionResult {
    timed("A4", "blow-up iff criterion", Some(A4_BUDGET), || {
        let r = scenario(A4_CONFIG)?;
        let cfg = ScenarioConfig::from_toml(A4_CONFIG)?;
        let toy = cfg.toy.expect("toy config");
        let mut ok = true;
        let mut parts = Vec::new();
        for (i, &w0) in toy.w0.iter().enumerate() {
            let exact = r.metric(&format!("toy.{i}.t_star_closed_form"));
            let fan = r.metric(&format!("toy.{i}.t_star_fan"));
            let max_w = r.metric(&format!("toy.{i}.max_abs_w")).unwrap_or(f64::INFINITY);
            match (exact, fan) {
                (Some(a), Some(b)) => {
                    ok &= (a - b).abs() <= BLOWUP_TOL;
                    parts.push(format!("w0 = {w0}: T* {a:.6} vs fan {b:.6}"));
                }
                (None, None) => {
                    ok &= max_w <= w0.abs().max(toy.beta / toy.alpha);
                    parts.push(format!("w0 = {w0}: global to t = {}, max |w| {max_w:.4}", toy.t_final));
                }
                _ => {
                    ok = false;
                    parts.push(format!("w0 = {w0}: closed form and fan disagree on blow-up"));
                }
            }
        }
        Ok((ok, parts.join("; ")))
    })
}

pub fn a5_merge_time() -> CriterionResult {
    timed("A5", "two-shock merge time", None, || {
        let frozen = scenario(A5_FROZEN_CONFIG)?;
        let bistable = scenario(A5_BISTABLE_CONFIG)?;
        let cfg = ScenarioConfig::from_toml(A5_BISTABLE_CONFIG)?;
        let t0 = frozen.metric("t_star");
        let t1 = bistable.metric("t_star");
        let fv = bistable.metric("oracle_t_star");
        let tol = MERGE_ORACLE_CELLS * cfg.oracle.dx;
        let ok = t0.is_some_and(|t| (t - 1.0).abs() <= MERGE_TIME_TOL)
            && matches!((t1, fv), (Some(a), Some(b)) if (a - b).abs() <= tol);
        Ok((
            ok,
            format!(
                "frozen t* {}, bistable t* {} vs FV {} (tolerance {tol})",
                show(t0),
                show(t1),
                show(fv)
            ),
        ))
    })
}

pub fn a6_oracle_convergence() -> CriterionResult {
    timed("A6", "oracle convergence", Some(A6_BUDGET), || {
        let cfg = ScenarioConfig::from_toml(A6_CONFIG)?;
        let (errs, order) = oracle_refinement(&cfg, A6_DX[0], A6_DX.len())?;
        let decreasing = errs.windows(2).all(|w| w[1].1 < w[0].1);
        let ok = decreasing && order >= A6_MIN_ORDER;
        let list: Vec<String> = errs.iter().map(|(h, e)| format!("{e:.3e} at dx {h}")).collect();
        Ok((ok, format!("L1 {}, order {order:.3}", list.join(", "))))
    })
}

pub fn a7_resolvent() -> CriterionResult {
    timed("A7", "resolvent bounds", None, || {
        let cfg = ScenarioConfig::from_toml(A7_CONFIG)?;
        let count = cfg.resolvent.as_ref().map_or(RESOLVENT_PROBLEMS, |r| r.count);
        let stats = resolvent_batch(cfg.seed, count)?;
        let res = stats.iter().map(|s| s.relative_residual).fold(0.0, f64::max);
        let excess = stats.iter().map(|s| s.bound_excess).fold(f64::NEG_INFINITY, f64::max);
        let pos = stats.iter().filter_map(|s| s.min_real).fold(f64::INFINITY, f64::min);
        let cases = stats.iter().filter(|s| s.min_real.is_some()).count();
        let ok = count >= RESOLVENT_PROBLEMS
            && res <= RESOLVENT_RESIDUAL
            && excess <= RESOLVENT_SLACK
            && cases > 0
            && pos >= 0.0;
        Ok((
            ok,
            format!(
                "{count} problems: max residual/|F| {res:.2e}, max bound excess/|F| {excess:.2e}, \
                 min Re v over {cases} positivity cases {pos:.3e}"
            ),
        ))
    })
}

pub fn a8_spectrum() -> CriterionResult {
    timed("A8", "spectrum classification", None, || {
        let cfg = ScenarioConfig::from_toml(A8_CONFIG)?;
        let laws = cfg.law.build()?;
        let s = cfg.shock.expect("shock config");
        let shock = crate::model::RiemannShockSpec::new(&laws.main, s.u_minus, s.u_plus, s.psi0)?;
        let phi = Complex64::new(1.0, 0.0);
        let data = ShockForcing { forcing: Arc::new(|_| Complex64::new(0.0, 0.0)), phi };
        let at = |re: f64| spectrum_classify(&laws.main, &shock, Complex64::new(re, 0.0), Some(&data));
        let (zero, ess, res) = (at(0.0)?, at(-2.0)?, at(1.0)?);
        let psi_err = res.response.map_or(f64::INFINITY, |r| (r.psi - phi / res.lambda).norm());
        let ok = zero.class == SpectralClass::Eigenvalue { multiplicity: 1 }
            && ess.class == SpectralClass::EssentialSpectrum
            && res.class == SpectralClass::ResolventSet
            && psi_err <= SPECTRUM_PSI_TOL;
        Ok((
            ok,
            format!(
                "0 -> {:?}, -2 -> {:?}, 1 -> {:?} with |psi - phi/lambda| = {psi_err:.1e}",
                zero.class, ess.class, res.class
            ),
        ))
    })
}

/// Bound violations of one randomized extension, relative to the data norms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtensionExcess {
    pub sup: f64,
    pub neg_slope: f64,
    pub pos_slope: f64,
    pub abs_slope: f64,
    /// Largest jump in value or slope across the anchor and across `-delta`.
    pub gluing: f64,
}

impl ExtensionExcess {
    pub fn holds(&self) -> bool {
        self.sup <= A9_ROUNDING
            && self.neg_slope <= A9_ROUNDING
            && self.pos_slope <= A9_ROUNDING
            && self.abs_slope <= A9_ROUNDING
            && self.gluing <= A9_ROUNDING
    }
}

/// Extends a random spline living right of 0 with a random `C0` in (1, 3]
/// and measures how far each bound is from failing.
pub fn extension_trial(rng: &mut ChaCha8Rng) -> Result<ExtensionExcess> {
    let amplitude = rng.gen_range(0.01..2.0);
    let (lo, hi) = (rng.gen_range(-2.0..-0.1), rng.gen_range(0.5..4.0));
    let spline = random_spline(rng, lo, hi, amplitude);
    let c0 = 3.0 - rng.gen_range(0.0..2.0);
    let shape: Arc<dyn Profile> = Arc::new(crate::extension::Shape::Spline(spline));
    let data = HalfLineData::new(Side::Right, 0.0, shape.clone());
    let ext = extend_half_line(&data, c0)?;
    let delta = ext.delta;

    // data norms on x >= 0: dense samples plus the boundary
    let n = 20_001;
    let (mut sup, mut neg, mut pos, mut abs): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    for k in 0..n {
        let x = hi * k as f64 / (n - 1) as f64;
        let (v, s) = (shape.value(x), shape.slope(x));
        sup = sup.max(v.abs());
        neg = neg.max(-s);
        pos = pos.max(s);
        abs = abs.max(s.abs());
    }
    // extension on x <= 0: the blend region and beyond
    let reach = delta.max(1e-3);
    let (mut esup, mut eneg, mut epos, mut eabs): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    for k in 0..n {
        let x = -2.0 * reach * k as f64 / (n - 1) as f64;
        let (v, s) = (ext.value(x), ext.slope(x));
        esup = esup.max(v.abs());
        eneg = eneg.max(-s);
        epos = epos.max(s);
        eabs = eabs.max(s.abs());
    }
    let scale = |x: f64| x.abs().max(f64::MIN_POSITIVE);
    let rel = |got: f64, bound: f64| (got - bound) / scale(bound);

    let eps = 1e-9 * reach;
    let m = data.boundary_slope;
    let jumps = [
        (ext.value(0.0) - shape.value(0.0)).abs() / scale(sup),
        (ext.slope(0.0) - shape.slope(0.0)).abs() / scale(abs.max(1.0)),
        (ext.value(-delta) - (data.boundary_value - 0.5 * delta * m)).abs() / scale(sup),
        ext.slope(-delta).abs() / scale(abs.max(1.0)),
        (ext.slope(-delta + eps) - eps / delta * m).abs() / scale(abs.max(1.0)),
        ext.slope(-delta - eps).abs() / scale(abs.max(1.0)),
    ];
    Ok(ExtensionExcess {
        sup: rel(esup, c0 * sup),
        neg_slope: if eneg > 0.0 { rel(eneg, neg) } else { f64::NEG_INFINITY },
        pos_slope: if epos > 0.0 { rel(epos, pos) } else { f64::NEG_INFINITY },
        abs_slope: if eabs > 0.0 { rel(eabs, abs) } else { f64::NEG_INFINITY },
        gluing: jumps.iter().copied().fold(0.0, f64::max),
    })
}

pub fn a9_extension() -> CriterionResult {
    timed("A9", "extension bounds", None, || {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut failures = 0usize;
        let mut worst = [f64::NEG_INFINITY; 5];
        for _ in 0..A9_SAMPLES {
            let e = extension_trial(&mut rng)?;
            if !e.holds() {
                failures += 1;
            }
            for (w, v) in worst.iter_mut().zip([e.sup, e.neg_slope, e.pos_slope, e.abs_slope, e.gluing]) {
                *w = w.max(v);
            }
        }
        Ok((
            failures == 0,
            format!(
                "{A9_SAMPLES} splines, {failures} failures; worst relative excess sup {:.1e}, \
                 neg slope {:.1e}, pos slope {:.1e}, |slope| {:.1e}, gluing {:.1e}",
                worst[0], worst[1], worst[2], worst[3], worst[4]
            ),
        ))
    })
}

/// Discrete TV of FV runs from box data around `u = -1`.
pub fn tv_series(dx: f64, t_final: f64, every: f64) -> Result<Vec<(f64, f64)>> {
    let law = ScalarLaw::burgers_bistable();
    let box_data = |x: f64| if (-1.0..1.0).contains(&x) { -0.95 } else { -1.0 };
    let init = FvState::project(box_data, -4.0 - 1.1 * t_final, 4.0, dx)?;
    let n = (t_final / every).round() as usize;
    let times: Vec<f64> = (1..=n).map(|k| k as f64 * every).collect();
    let mut out = vec![(0.0, init.total_variation())];
    for s in evolve_fv(&law, init, t_final, 0.9, &times)? {
        out.push((s.t, s.total_variation()));
    }
    Ok(out)
}

pub fn a10_tv_decay() -> CriterionResult {
    timed("A10", "TV decay on the oracle", None, || {
        let tv = tv_series(1.0 / 400.0, 5.0, 0.05)?;
        let fit = fit_decay_rate(&tv, (1.0, 4.0))?;
        Ok((fit.rate <= TV_RATE_MAX, format!("box data, TV rate {:.4} (residual {:.1e})", fit.rate, fit.residual)))
    })
}

pub fn run_suite() -> Vec<CriterionResult> {
    vec![
        a1_constant_state(),
        a2_riemann_shock(),
        a3_phase_offset(),
        a4_toy_blowup(),
        a5_merge_time(),
        a6_oracle_convergence(),
        a7_resolvent(),
        a8_spectrum(),
        a9_extension(),
        a10_tv_decay(),
    ]
}
