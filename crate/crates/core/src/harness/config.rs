//! Scenario configuration files.
//!
//! Configs are TOML documents. Every table rejects unknown keys; the
//! grammar is documented in the repository README.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::extension::{HermiteSpline, Profile, Shape};
use crate::model::{bistable_source, burgers_flux, cubic_flux, linear_source, ScalarLaw};
use crate::poly::Poly;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    ConstantState,
    RiemannShock,
    ShockPlusSmallShock,
    ToyBlowup,
    ResolventCheck,
    SpectrumScan,
}

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::ConstantState => "constant_state",
            ScenarioKind::RiemannShock => "riemann_shock",
            ScenarioKind::ShockPlusSmallShock => "shock_plus_small_shock",
            ScenarioKind::ToyBlowup => "toy_blowup",
            ScenarioKind::ResolventCheck => "resolvent_check",
            ScenarioKind::SpectrumScan => "spectrum_scan",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub law: LawSpec,
    #[serde(default)]
    pub state: Option<StateSpec>,
    #[serde(default)]
    pub shock: Option<ShockSpec>,
    #[serde(default)]
    pub perturbation: PerturbationSet,
    #[serde(default)]
    pub numerics: NumericsSpec,
    #[serde(default)]
    pub oracle: OracleSpec,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub toy: Option<ToySpec>,
    #[serde(default)]
    pub resolvent: Option<ResolventSpec>,
    #[serde(default)]
    pub spectrum: Option<SpectrumSpec>,
    #[serde(default)]
    pub checks: ChecksSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Burgers,
    Cubic,
    Zero,
    Bistable,
    Linear,
    Polynomial,
}

/// A flux or source: a named family or explicit coefficients (lowest
/// degree first).
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionSpec {
    pub family: Family,
    #[serde(default)]
    pub coeffs: Option<Vec<f64>>,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default)]
    pub center: Option<f64>,
}

impl FunctionSpec {
    pub fn family(family: Family) -> Self {
        FunctionSpec { family, coeffs: None, beta: None, center: None }
    }

    fn to_poly(&self, role: &str) -> Result<Poly> {
        let extra = |name: &str, present: bool| -> Result<()> {
            if present {
                Err(Error::Config(format!("{role}: `{name}` is not used by family {:?}", self.family)))
            } else {
                Ok(())
            }
        };
        if self.family != Family::Polynomial {
            extra("coeffs", self.coeffs.is_some())?;
        }
        if self.family != Family::Linear {
            extra("beta", self.beta.is_some())?;
            extra("center", self.center.is_some())?;
        }
        let poly = match (role, self.family) {
            (_, Family::Polynomial) => {
                let c = self
                    .coeffs
                    .clone()
                    .ok_or_else(|| Error::Config(format!("{role}: polynomial needs `coeffs`")))?;
                if c.is_empty() || c.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Config(format!("{role}: coefficients must be finite")));
                }
                Poly::new(c)
            }
            ("flux", Family::Burgers) => burgers_flux(),
            ("flux", Family::Cubic) => cubic_flux(),
            ("flux", f) => return Err(Error::Config(format!("{f:?} is not a flux family"))),
            (_, Family::Zero) => Poly::zero(),
            (_, Family::Bistable) => bistable_source(),
            (_, Family::Linear) => {
                let beta = self
                    .beta
                    .ok_or_else(|| Error::Config(format!("{role}: linear source needs `beta`")))?;
                let center = self.center.unwrap_or(0.0);
                if !beta.is_finite() || !center.is_finite() {
                    return Err(Error::Config(format!("{role}: beta and center must be finite")));
                }
                linear_source(beta, center)
            }
            (r, f) => return Err(Error::Config(format!("{f:?} is not a {r} family"))),
        };
        Ok(poly)
    }

    fn describe(&self) -> String {
        match self.family {
            Family::Polynomial => format!("polynomial{:?}", self.coeffs.as_deref().unwrap_or(&[])),
            Family::Linear => format!(
                "linear(beta={}, center={})",
                self.beta.unwrap_or(f64::NAN),
                self.center.unwrap_or(0.0)
            ),
            f => format!("{f:?}").to_lowercase(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LawSpec {
    #[serde(default = "default_flux")]
    pub flux: FunctionSpec,
    #[serde(default = "default_source")]
    pub source: FunctionSpec,
    /// Source used left of the (first) shock instead of `source`.
    #[serde(default)]
    pub source_left: Option<FunctionSpec>,
    #[serde(default)]
    pub source_right: Option<FunctionSpec>,
}

fn default_flux() -> FunctionSpec {
    FunctionSpec::family(Family::Burgers)
}

fn default_source() -> FunctionSpec {
    FunctionSpec::family(Family::Bistable)
}

impl Default for LawSpec {
    fn default() -> Self {
        LawSpec {
            flux: default_flux(),
            source: default_source(),
            source_left: None,
            source_right: None,
        }
    }
}

/// The law itself and the per-side variants.
#[derive(Debug, Clone)]
pub struct Laws {
    pub main: ScalarLaw,
    pub left: ScalarLaw,
    pub right: ScalarLaw,
}

impl LawSpec {
    pub fn build(&self) -> Result<Laws> {
        let flux = self.flux.to_poly("flux")?;
        let source = self.source.to_poly("source")?;
        let desc = format!("flux={} source={}", self.flux.describe(), self.source.describe());
        let main = ScalarLaw::new(flux, source, desc);
        let side = |spec: &Option<FunctionSpec>, role: &str| -> Result<ScalarLaw> {
            match spec {
                Some(s) => {
                    let g = s.to_poly(role)?;
                    Ok(main.with_source(g, format!("{} {role}={}", main.description(), s.describe())))
                }
                None => Ok(main.clone()),
            }
        };
        Ok(Laws {
            left: side(&self.source_left, "source_left")?,
            right: side(&self.source_right, "source_right")?,
            main,
        })
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSpec {
    pub u: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShockSpec {
    pub u_minus: f64,
    pub u_plus: f64,
    #[serde(default)]
    pub psi0: f64,
    /// Middle state of the two-shock configuration.
    #[serde(default)]
    pub u_middle: Option<f64>,
    /// Initial position of the small shock, left of `psi0`.
    #[serde(default)]
    pub psi_s0: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ShapeKind {
    /// `sign * amplitude` everywhere.
    Constant,
    Sech,
    Gaussian,
    Sine,
    Tanh,
    Spline,
    #[default]
    None,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct PerturbationSpec {
    #[serde(default)]
    pub shape: ShapeKind,
    #[serde(default)]
    pub amplitude: f64,
    /// `+1` or `-1`; amplitudes themselves are nonnegative.
    #[serde(default = "one")]
    pub sign: f64,
    #[serde(default = "one")]
    pub width: f64,
    #[serde(default)]
    pub center: f64,
    /// Spline knots; without them a random spline is drawn from the seed.
    #[serde(default)]
    pub knots: Option<Vec<f64>>,
    #[serde(default)]
    pub values: Option<Vec<f64>>,
    #[serde(default)]
    pub slopes: Option<Vec<f64>>,
}

fn one() -> f64 {
    1.0
}

impl PerturbationSpec {
    pub fn is_none(&self) -> bool {
        self.shape == ShapeKind::None || self.amplitude == 0.0
    }

    /// The perturbation profile; `salt` decorrelates random splines of
    /// different sides.
    pub fn profile(&self, seed: u64, salt: u64) -> Result<Arc<dyn Profile>> {
        let a = self.sign * self.amplitude;
        let (w, c) = (self.width, self.center);
        let shape = match self.shape {
            ShapeKind::None => Shape::Constant(0.0),
            _ if self.amplitude == 0.0 => Shape::Constant(0.0),
            ShapeKind::Constant => Shape::Constant(a),
            ShapeKind::Sech => Shape::Sech { amplitude: a, width: w, center: c },
            ShapeKind::Gaussian => Shape::Gaussian { amplitude: a, width: w, center: c },
            ShapeKind::Sine => Shape::Sine { amplitude: a, width: w, center: c },
            ShapeKind::Tanh => Shape::Tanh { amplitude: a, width: w, center: c },
            ShapeKind::Spline => Shape::Spline(self.spline(seed, salt)?),
        };
        Ok(Arc::new(shape))
    }

    fn spline(&self, seed: u64, salt: u64) -> Result<HermiteSpline> {
        match (&self.knots, &self.values, &self.slopes) {
            (Some(k), Some(v), Some(s)) => {
                let scale = |xs: &[f64]| xs.iter().map(|x| x * self.sign * self.amplitude).collect();
                HermiteSpline::new(k.clone(), scale(v), scale(s))
            }
            (None, None, None) => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15));
                Ok(random_spline(&mut rng, self.center - 2.0 * self.width, self.center + 2.0 * self.width, self.sign * self.amplitude))
            }
            _ => Err(Error::Config("spline needs all of knots, values, slopes or none".into())),
        }
    }
}

/// Spline with 4 to 12 knots on `[lo, hi]`, values in `[-amp, amp]` and
/// slopes in `[-2 amp, 2 amp]` per unit width, flat at both ends.
pub fn random_spline(rng: &mut impl Rng, lo: f64, hi: f64, amplitude: f64) -> HermiteSpline {
    let n = rng.gen_range(4..=12);
    let mut knots: Vec<f64> = (0..n).map(|_| rng.gen_range(lo..hi)).collect();
    knots.sort_by(f64::total_cmp);
    knots.dedup_by(|a, b| (*a - *b).abs() < 1e-6 * (hi - lo));
    if knots.len() < 2 {
        knots = vec![lo, hi];
    }
    let scale = (hi - lo).max(1e-12);
    let amp = amplitude.abs();
    let m = knots.len();
    let values: Vec<f64> = (0..m).map(|_| rng.gen_range(-amp..=amp)).collect();
    let mut slopes: Vec<f64> = (0..m)
        .map(|_| rng.gen_range(-2.0 * amp..=2.0 * amp) * 4.0 / scale)
        .collect();
    slopes[0] = 0.0;
    slopes[m - 1] = 0.0;
    HermiteSpline::new(knots, values, slopes).expect("sorted distinct knots")
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct PerturbationSet {
    /// Whole-line perturbation of a constant state.
    #[serde(default)]
    pub line: Option<PerturbationSpec>,
    #[serde(default)]
    pub left: Option<PerturbationSpec>,
    #[serde(default)]
    pub middle: Option<PerturbationSpec>,
    #[serde(default)]
    pub right: Option<PerturbationSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsSpec {
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_curves")]
    pub n_curves: usize,
    #[serde(default = "default_t_final")]
    pub t_final: f64,
    /// Sup-norm amplification of the extension.
    #[serde(default = "default_amplification")]
    pub amplification: f64,
    /// Fit window; defaults to `[t_final / 4, 3 t_final / 4]`.
    #[serde(default)]
    pub fit_window: Option<[f64; 2]>,
    /// Spacing of time-series rows.
    #[serde(default = "default_sample_every")]
    pub sample_every: f64,
    /// Extra half-width added to every fan span.
    #[serde(default = "default_padding")]
    pub padding: f64,
}

fn default_dt() -> f64 {
    crate::characteristics::DEFAULT_DT
}
fn default_curves() -> usize {
    crate::characteristics::DEFAULT_CURVES
}
fn default_t_final() -> f64 {
    5.0
}
fn default_amplification() -> f64 {
    1.05
}
fn default_sample_every() -> f64 {
    0.05
}
fn default_padding() -> f64 {
    4.0
}

impl Default for NumericsSpec {
    fn default() -> Self {
        NumericsSpec {
            dt: default_dt(),
            n_curves: default_curves(),
            t_final: default_t_final(),
            amplification: default_amplification(),
            fit_window: None,
            sample_every: default_sample_every(),
            padding: default_padding(),
        }
    }
}

impl NumericsSpec {
    pub fn fit_window(&self) -> (f64, f64) {
        match self.fit_window {
            Some([a, b]) => (a, b),
            None => (0.25 * self.t_final, 0.75 * self.t_final),
        }
    }

    /// Row times `0, h, 2h, ...` up to and including `t_final`.
    pub fn sample_times(&self) -> Vec<f64> {
        let n = (self.t_final / self.sample_every + 1e-9).floor() as usize;
        let mut ts: Vec<f64> = (0..=n).map(|k| k as f64 * self.sample_every).collect();
        if let Some(last) = ts.last_mut() {
            if (self.t_final - *last).abs() < 1e-9 * self.t_final.max(1.0) {
                *last = self.t_final;
            } else {
                ts.push(self.t_final);
            }
        }
        ts
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSpec {
    #[serde(default)]
    pub enabled: bool,
    #[serde(default = "default_dx")]
    pub dx: f64,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    /// Comparison window; defaults to the central half of the FV domain.
    #[serde(default)]
    pub window: Option<[f64; 2]>,
    /// Smallest interface jump counted as a shock locus.
    #[serde(default = "default_locus_threshold")]
    pub locus_threshold: f64,
}

fn default_dx() -> f64 {
    1.0 / 400.0
}
fn default_cfl() -> f64 {
    0.9
}
fn default_locus_threshold() -> f64 {
    0.005
}

impl Default for OracleSpec {
    fn default() -> Self {
        OracleSpec {
            enabled: false,
            dx: default_dx(),
            cfl: default_cfl(),
            window: None,
            locus_threshold: default_locus_threshold(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub dir: Option<PathBuf>,
    #[serde(default = "default_csv")]
    pub csv: String,
    #[serde(default = "default_summary")]
    pub summary: String,
    /// Also write the final fan and FV slices.
    #[serde(default)]
    pub snapshots: bool,
}

fn default_csv() -> String {
    "timeseries.csv".into()
}
fn default_summary() -> String {
    "summary.txt".into()
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            dir: None,
            csv: default_csv(),
            summary: default_summary(),
            snapshots: false,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToySpec {
    #[serde(default = "one")]
    pub alpha: f64,
    #[serde(default = "one")]
    pub beta: f64,
    pub w0: Vec<f64>,
    #[serde(default = "default_toy_t_final")]
    pub t_final: f64,
    #[serde(default = "default_toy_half_span")]
    pub half_span: f64,
}

fn default_toy_t_final() -> f64 {
    10.0
}
fn default_toy_half_span() -> f64 {
    8.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResolventSpec {
    #[serde(default = "default_count")]
    pub count: usize,
}

fn default_count() -> usize {
    100
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ForcingKind {
    #[default]
    Zero,
    Constant,
    Gaussian,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSpec {
    /// `[re, im]` pairs.
    #[serde(default)]
    pub lambdas: Vec<[f64; 2]>,
    #[serde(default = "default_phi")]
    pub phi: [f64; 2],
    #[serde(default)]
    pub forcing: ForcingKind,
    /// Expected class per lambda: `eigenvalue`, `essential` or `resolvent`.
    #[serde(default)]
    pub expect: Option<Vec<String>>,
}

fn default_phi() -> [f64; 2] {
    [1.0, 0.0]
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Band {
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Max {
    pub max: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Min {
    pub min: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expected {
    pub value: f64,
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tol {
    pub tol: f64,
}

/// A check without parameters, enabled by an empty table.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Enabled {}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Cells {
    pub cells: f64,
}

/// Acceptance rules; a rule is enabled iff its key is present.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChecksSpec {
    /// Fitted sup-norm rates of every side.
    pub decay_rate: Option<Band>,
    /// Fitted negative-part gradient rates of every side.
    pub gradient_rate: Option<Band>,
    /// Fitted rate of `|psi(t) - psi_infty|`.
    pub phase_rate: Option<Max>,
    pub min_lax_margin: Option<Min>,
    /// `psi_infty - psi0`.
    pub phase_offset: Option<Expected>,
    pub merge_time: Option<Expected>,
    /// Merge time of the FV loci within `cells * dx / |speed gap|`.
    pub oracle_merge: Option<Cells>,
    /// Fan blow-up time against the closed form, and global existence for
    /// the non-blowing cases.
    pub blowup_time: Option<Tol>,
    /// Final L1 discrepancy against the FV oracle.
    pub oracle_l1: Option<Max>,
    /// Fitted rate of the FV total variation.
    pub tv_rate: Option<Max>,
    /// Residual relative to `||F||`.
    pub resolvent_residual: Option<Max>,
    /// Slack allowed over the sup bound, relative to `||F||`.
    pub resolvent_bound: Option<Max>,
    /// Smallest allowed `Re v` for nonnegative forcing.
    pub resolvent_positivity: Option<Min>,
    /// Classes match `spectrum.expect`.
    pub spectrum_classes: Option<Enabled>,
}

impl ChecksSpec {
    /// Names of the enabled checks.
    pub fn enabled(&self) -> Vec<&'static str> {
        let flags = [
            ("decay_rate", self.decay_rate.is_some()),
            ("gradient_rate", self.gradient_rate.is_some()),
            ("phase_rate", self.phase_rate.is_some()),
            ("min_lax_margin", self.min_lax_margin.is_some()),
            ("phase_offset", self.phase_offset.is_some()),
            ("merge_time", self.merge_time.is_some()),
            ("oracle_merge", self.oracle_merge.is_some()),
            ("blowup_time", self.blowup_time.is_some()),
            ("oracle_l1", self.oracle_l1.is_some()),
            ("tv_rate", self.tv_rate.is_some()),
            ("resolvent_residual", self.resolvent_residual.is_some()),
            ("resolvent_bound", self.resolvent_bound.is_some()),
            ("resolvent_positivity", self.resolvent_positivity.is_some()),
            ("spectrum_classes", self.spectrum_classes.is_some()),
        ];
        flags.iter().filter(|f| f.1).map(|f| f.0).collect()
    }
}

impl ScenarioKind {
    /// Checks this kind can evaluate.
    pub fn supported_checks(self) -> &'static [&'static str] {
        match self {
            ScenarioKind::ConstantState => &["decay_rate", "gradient_rate", "oracle_l1", "tv_rate"],
            ScenarioKind::RiemannShock => &[
                "decay_rate",
                "gradient_rate",
                "phase_rate",
                "min_lax_margin",
                "phase_offset",
                "oracle_l1",
            ],
            ScenarioKind::ShockPlusSmallShock => &[
                "decay_rate",
                "gradient_rate",
                "min_lax_margin",
                "merge_time",
                "oracle_merge",
                "oracle_l1",
            ],
            ScenarioKind::ToyBlowup => &["blowup_time"],
            ScenarioKind::ResolventCheck => {
                &["resolvent_residual", "resolvent_bound", "resolvent_positivity"]
            }
            ScenarioKind::SpectrumScan => &["spectrum_classes"],
        }
    }
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        ScenarioConfig::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |name: &str, v: f64| -> Result<()> {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("`{name}` must be finite, got {v}")))
            }
        };
        let n = &self.numerics;
        for (name, v) in [
            ("numerics.dt", n.dt),
            ("numerics.t_final", n.t_final),
            ("numerics.amplification", n.amplification),
            ("numerics.sample_every", n.sample_every),
            ("numerics.padding", n.padding),
            ("oracle.dx", self.oracle.dx),
            ("oracle.cfl", self.oracle.cfl),
        ] {
            finite(name, v)?;
        }
        if !(n.dt > 0.0) || !(n.t_final > 0.0) || !(n.sample_every > 0.0) || n.padding < 0.0 {
            return Err(Error::Config("dt, t_final and sample_every must be positive".into()));
        }
        if !(n.amplification > 1.0) {
            return Err(Error::Config("numerics.amplification must exceed 1".into()));
        }
        if let Some([a, b]) = n.fit_window {
            if !(a < b) {
                return Err(Error::Config("numerics.fit_window must be increasing".into()));
            }
        }
        if !(self.oracle.dx > 0.0) || !(self.oracle.cfl > 0.0 && self.oracle.cfl <= 0.9) {
            return Err(Error::Config("oracle needs dx > 0 and cfl in (0, 0.9]".into()));
        }
        let p = &self.perturbation;
        for (side, spec) in [("line", &p.line), ("left", &p.left), ("middle", &p.middle), ("right", &p.right)] {
            if let Some(s) = spec {
                for (name, v) in [("amplitude", s.amplitude), ("width", s.width), ("center", s.center)] {
                    finite(&format!("perturbation.{side}.{name}"), v)?;
                }
                if s.amplitude < 0.0 {
                    return Err(Error::Config(format!("perturbation.{side}.amplitude must be >= 0")));
                }
                if !(s.width > 0.0) {
                    return Err(Error::Config(format!("perturbation.{side}.width must be > 0")));
                }
                if s.sign != 1.0 && s.sign != -1.0 {
                    return Err(Error::Config(format!("perturbation.{side}.sign must be 1 or -1")));
                }
            }
        }
        let need = |present: bool, what: &str| -> Result<()> {
            if present {
                Ok(())
            } else {
                Err(Error::Config(format!("{} scenarios need {what}", self.kind.name())))
            }
        };
        match self.kind {
            ScenarioKind::ConstantState => need(self.state.is_some(), "a [state] table")?,
            ScenarioKind::RiemannShock | ScenarioKind::SpectrumScan => {
                need(self.shock.is_some(), "a [shock] table")?
            }
            ScenarioKind::ShockPlusSmallShock => {
                let ok = self.shock.is_some_and(|s| s.u_middle.is_some() && s.psi_s0.is_some());
                need(ok, "[shock] with u_middle and psi_s0")?;
            }
            ScenarioKind::ToyBlowup => need(self.toy.is_some(), "a [toy] table")?,
            ScenarioKind::ResolventCheck => {}
        }
        if let Some(s) = &self.shock {
            for (name, v) in [("u_minus", s.u_minus), ("u_plus", s.u_plus), ("psi0", s.psi0)] {
                finite(&format!("shock.{name}"), v)?;
            }
            for (name, v) in [("u_middle", s.u_middle), ("psi_s0", s.psi_s0)] {
                if let Some(v) = v {
                    finite(&format!("shock.{name}"), v)?;
                }
            }
        }
        for name in self.checks.enabled() {
            if !self.kind.supported_checks().contains(&name) {
                return Err(Error::Config(format!(
                    "check `{name}` is not available for {} scenarios",
                    self.kind.name()
                )));
            }
            let needs_oracle = matches!(name, "oracle_l1" | "oracle_merge" | "tv_rate");
            if needs_oracle && !self.oracle.enabled {
                return Err(Error::Config(format!("check `{name}` needs oracle.enabled = true")));
            }
        }
        if self.oracle.enabled && (self.law.source_left.is_some() || self.law.source_right.is_some()) {
            return Err(Error::Config("the oracle does not support per-side sources".into()));
        }
        if let Some(s) = &self.spectrum {
            if let Some(e) = &s.expect {
                if e.len() != s.lambdas.len() {
                    return Err(Error::Config("spectrum.expect needs one class per lambda".into()));
                }
                if let Some(bad) = e.iter().find(|c| !matches!(c.as_str(), "eigenvalue" | "essential" | "resolvent")) {
                    return Err(Error::Config(format!("unknown spectral class `{bad}`")));
                }
            }
        }
        if self.checks.spectrum_classes.is_some() && self.spectrum.as_ref().is_none_or(|s| s.expect.is_none()) {
            return Err(Error::Config("check `spectrum_classes` needs spectrum.expect".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_riemann_config() {
        let cfg = ScenarioConfig::from_toml(
            r#"
            kind = "riemann_shock"
            [shock]
            u_minus = 1.0
            u_plus = -1.0
            "#,
        )
        .unwrap();
        assert_eq!(cfg.kind, ScenarioKind::RiemannShock);
        assert_eq!(cfg.numerics.fit_window(), (1.25, 3.75));
        let laws = cfg.law.build().unwrap();
        assert_eq!(laws.main.g(0.5), 0.5 - 0.125);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = ScenarioConfig::from_toml("kind = \"toy_blowup\"\nbogus = 1\n[toy]\nw0 = [-2.0]\n");
        assert!(matches!(err, Err(Error::Config(_))));
        let err = ScenarioConfig::from_toml("kind = \"toy_blowup\"\n[toy]\nw0 = [-2.0]\nspeed = 3\n");
        assert!(matches!(err, Err(Error::Config(_))));
    }

    #[test]
    fn validation() {
        let neg = r#"
            kind = "constant_state"
            [state]
            u = -1.0
            [perturbation.line]
            shape = "sech"
            amplitude = -0.1
        "#;
        assert!(ScenarioConfig::from_toml(neg).is_err());
        assert!(ScenarioConfig::from_toml("kind = \"riemann_shock\"").is_err());
        let bad_flux = "kind = \"resolvent_check\"\n[law]\nflux = { family = \"bistable\" }\n";
        let cfg = ScenarioConfig::from_toml(bad_flux).unwrap();
        assert!(cfg.law.build().is_err());
    }

    #[test]
    fn sample_times_end_at_t_final() {
        let n = NumericsSpec { t_final: 1.0, sample_every: 0.3, ..Default::default() };
        let ts = n.sample_times();
        assert_eq!(ts.len(), 5);
        assert_eq!(*ts.last().unwrap(), 1.0);
        let n = NumericsSpec { t_final: 1.0, sample_every: 0.25, ..Default::default() };
        assert_eq!(n.sample_times(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }
}
