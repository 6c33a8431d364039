//! Scenario reports and their CSV and summary serializations.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::fit::DecayFit;
use crate::harness::config::{OutputSpec, ScenarioKind};

/// Column order of the time-series CSV.
pub const CSV_COLUMNS: [&str; 10] = [
    "t",
    "sup_err_left",
    "sup_err_right",
    "negpart_grad_left",
    "negpart_grad_right",
    "psi",
    "psi_prime",
    "lax_margin_left",
    "lax_margin_right",
    "oracle_l1",
];

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Row {
    pub t: f64,
    pub sup_err_left: Option<f64>,
    pub sup_err_right: Option<f64>,
    pub negpart_grad_left: Option<f64>,
    pub negpart_grad_right: Option<f64>,
    pub psi: Option<f64>,
    pub psi_prime: Option<f64>,
    pub lax_margin_left: Option<f64>,
    pub lax_margin_right: Option<f64>,
    pub oracle_l1: Option<f64>,
}

impl Row {
    pub fn at(t: f64) -> Self {
        Row { t, ..Row::default() }
    }

    fn cells(&self) -> [Option<f64>; 10] {
        [
            Some(self.t),
            self.sup_err_left,
            self.sup_err_right,
            self.negpart_grad_left,
            self.negpart_grad_right,
            self.psi,
            self.psi_prime,
            self.lax_margin_left,
            self.lax_margin_right,
            self.oracle_l1,
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FitOutcome {
    Fitted(DecayFit),
    /// Every sample in the window is at or below the value floor.
    AtFloor { window: (f64, f64) },
    Failed { window: (f64, f64), reason: String },
}

impl FitOutcome {
    pub fn rate(&self) -> Option<f64> {
        match self {
            FitOutcome::Fitted(f) => Some(f.rate),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Metric {
    Num(f64),
    Text(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// Positive when passing; distance to the threshold.
    pub margin: f64,
}

impl CheckResult {
    /// Passes iff `margin >= 0`.
    pub fn from_margin(name: &str, margin: f64) -> Self {
        CheckResult {
            name: name.to_string(),
            passed: margin >= 0.0,
            margin,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Outcome {
    Completed,
    /// A fan lost classical regularity outside a toy scenario.
    BlowUp { t: f64, x: f64 },
}

/// Final slices written next to the time series on request.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Snapshots {
    /// `(label, x, u, w)`; `w` is absent for FV cells.
    pub points: Vec<(String, f64, f64, Option<f64>)>,
}

#[derive(Debug, Clone)]
pub struct DecayReport {
    pub kind: ScenarioKind,
    pub rows: Vec<Row>,
    pub fits: Vec<(String, FitOutcome)>,
    pub metrics: Vec<(String, Metric)>,
    pub checks: Vec<CheckResult>,
    pub outcome: Outcome,
    pub snapshots: Option<Snapshots>,
}

impl DecayReport {
    pub fn new(kind: ScenarioKind) -> Self {
        DecayReport {
            kind,
            rows: Vec::new(),
            fits: Vec::new(),
            metrics: Vec::new(),
            checks: Vec::new(),
            outcome: Outcome::Completed,
            snapshots: None,
        }
    }

    pub fn num(&mut self, key: impl Into<String>, v: f64) {
        self.metrics.push((key.into(), Metric::Num(v)));
    }

    pub fn text(&mut self, key: impl Into<String>, v: impl Into<String>) {
        self.metrics.push((key.into(), Metric::Text(v.into())));
    }

    pub fn metric(&self, key: &str) -> Option<f64> {
        self.metrics.iter().find_map(|(k, m)| match m {
            Metric::Num(v) if k == key => Some(*v),
            _ => None,
        })
    }

    pub fn fit(&self, name: &str) -> Option<&FitOutcome> {
        self.fits.iter().find(|(k, _)| k == name).map(|(_, f)| f)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// 0 when every check passes, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        let blew_up = matches!(self.outcome, Outcome::BlowUp { .. });
        if self.all_passed() && !blew_up {
            0
        } else {
            2
        }
    }

    /// Column `c` of the rows as `(t, value)` pairs, skipping empty cells.
    pub fn column(&self, c: usize) -> Vec<(f64, f64)> {
        self.rows
            .iter()
            .filter_map(|r| r.cells()[c].map(|v| (r.t, v)))
            .collect()
    }

    pub fn csv(&self) -> String {
        let mut out = CSV_COLUMNS.join(",");
        out.push('\n');
        for r in &self.rows {
            let line: Vec<String> = r.cells().iter().map(|c| c.map(fmt_g).unwrap_or_default()).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: &str| {
            let _ = writeln!(out, "{k} = {v}");
        };
        line("kind", self.kind.name());
        match self.outcome {
            Outcome::Completed => line("outcome", "completed"),
            Outcome::BlowUp { t, x } => {
                line("outcome", "blow_up");
                line("blow_up.t", &fmt_g(t));
                line("blow_up.x", &fmt_g(x));
            }
        }
        for (k, m) in &self.metrics {
            match m {
                Metric::Num(v) => line(k, &fmt_g(*v)),
                Metric::Text(s) => line(k, s),
            }
        }
        for (name, fit) in &self.fits {
            let key = |s: &str| format!("fit.{name}.{s}");
            match fit {
                FitOutcome::Fitted(f) => {
                    line(&key("status"), "fitted");
                    line(&key("rate"), &fmt_g(f.rate));
                    line(&key("log_constant"), &fmt_g(f.log_constant));
                    line(&key("residual"), &fmt_g(f.residual));
                    line(&key("window_lo"), &fmt_g(f.window.0));
                    line(&key("window_hi"), &fmt_g(f.window.1));
                    line(&key("samples"), &f.samples.to_string());
                }
                FitOutcome::AtFloor { window } => {
                    line(&key("status"), "at_floor");
                    line(&key("window_lo"), &fmt_g(window.0));
                    line(&key("window_hi"), &fmt_g(window.1));
                }
                FitOutcome::Failed { window, reason } => {
                    line(&key("status"), "failed");
                    line(&key("window_lo"), &fmt_g(window.0));
                    line(&key("window_hi"), &fmt_g(window.1));
                    line(&key("reason"), reason);
                }
            }
        }
        for c in &self.checks {
            let verdict = if c.passed { "pass" } else { "fail" };
            line(&format!("check.{}", c.name), &format!("{verdict} {}", fmt_g(c.margin)));
        }
        out
    }

    pub fn snapshots_csv(&self) -> Option<String> {
        let snaps = self.snapshots.as_ref()?;
        let mut out = String::from("source,x,u,w\n");
        for (label, x, u, w) in &snaps.points {
            let _ = writeln!(
                out,
                "{label},{},{},{}",
                fmt_g(*x),
                fmt_g(*u),
                w.map(fmt_g).unwrap_or_default()
            );
        }
        Some(out)
    }
}

/// Writes the CSV, the summary and, if present, the snapshots into `dir`.
pub fn emit_report(report: &DecayReport, dir: &Path, output: &OutputSpec) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let csv = dir.join(&output.csv);
    fs::write(&csv, report.csv())?;
    written.push(csv);
    let summary = dir.join(&output.summary);
    fs::write(&summary, report.summary())?;
    written.push(summary);
    if output.snapshots {
        if let Some(text) = report.snapshots_csv() {
            let path = dir.join("snapshots.csv");
            fs::write(&path, text)?;
            written.push(path);
        }
    }
    Ok(written)
}

/// C `%.12g` formatting.
pub fn fmt_g(x: f64) -> String {
    const DIGITS: i32 = 12;
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..DIGITS).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g_format_matches_c() {
        assert_eq!(fmt_g(0.0), "0");
        assert_eq!(fmt_g(1.0), "1");
        assert_eq!(fmt_g(-2.5), "-2.5");
        assert_eq!(fmt_g(0.1), "0.1");
        assert_eq!(fmt_g(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_g(2f64.ln()), "0.69314718056");
        assert_eq!(fmt_g(1e-5), "1e-05");
        assert_eq!(fmt_g(1.5e-7), "1.5e-07");
        assert_eq!(fmt_g(0.0001), "0.0001");
        assert_eq!(fmt_g(123456789012.0), "123456789012");
        assert_eq!(fmt_g(1234567890123.0), "1.23456789012e+12");
        assert_eq!(fmt_g(f64::INFINITY), "inf");
        assert_eq!(fmt_g(999999999999.5), "1e+12");
    }

    #[test]
    fn empty_report_has_header_only_csv() {
        let r = DecayReport::new(ScenarioKind::ToyBlowup);
        assert_eq!(r.csv(), format!("{}\n", CSV_COLUMNS.join(",")));
        assert_eq!(r.exit_code(), 0);
    }

    #[test]
    fn empty_cells_stay_empty() {
        let mut r = DecayReport::new(ScenarioKind::ConstantState);
        r.rows.push(Row { sup_err_left: Some(0.05), ..Row::at(0.5) });
        assert_eq!(r.csv().lines().nth(1).unwrap(), "0.5,0.05,,,,,,,,");
        assert_eq!(r.column(1), vec![(0.5, 0.05)]);
    }

    #[test]
    fn summary_check_lines() {
        let mut r = DecayReport::new(ScenarioKind::RiemannShock);
        r.num("t_star", 1.0);
        r.checks.push(CheckResult::from_margin("merge_time", 2e-4));
        r.checks.push(CheckResult::from_margin("min_lax_margin", -0.1));
        let s = r.summary();
        assert!(s.contains("t_star = 1\n"));
        assert!(s.contains("check.merge_time = pass 0.0002\n"));
        assert!(s.contains("check.min_lax_margin = fail -0.1\n"));
        assert_eq!(r.exit_code(), 2);
    }
}
