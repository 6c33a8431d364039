use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use shockfit::harness::acceptance::{run_suite, SUITE_NAME};
use shockfit::harness::config::{ScenarioKind, SpectrumSpec};
use shockfit::harness::report::fmt_g;
use shockfit::harness::scenario::oracle_refinement;
use shockfit::harness::{emit_report, run_scenario, ScenarioConfig};
use shockfit::Error;

const EXIT_FAIL: u8 = 2;
const EXIT_ERROR: u8 = 3;

#[derive(Parser)]
#[command(name = "shockfit", version, about = "Shock stability experiments for scalar balance laws")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its time series and summary.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides `output.dir`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a named test suite.
    Verify {
        #[arg(long, default_value = SUITE_NAME)]
        suite: String,
    },
    /// Classify a grid of spectral parameters for the config's shock.
    Spectrum {
        #[arg(long)]
        config: PathBuf,
        /// `re_lo:re_hi:n_re,im_lo:im_hi:n_im`; a single value stands for `v:v:1`.
        #[arg(long, allow_hyphen_values = true)]
        lambda_grid: String,
    },
    /// L1 distance to the finite-volume oracle under grid refinement.
    Compare {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        dx: f64,
        /// Number of grids, each halving the previous spacing.
        #[arg(long, default_value_t = 3)]
        refine: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, out } => run(&config, out.as_deref()),
        Command::Verify { suite } => verify(&suite),
        Command::Spectrum { config, lambda_grid } => spectrum(&config, &lambda_grid),
        Command::Compare { config, dx, refine } => compare(&config, dx, refine),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn run(config: &Path, out: Option<&Path>) -> Result<u8, Error> {
    let cfg = ScenarioConfig::load(config)?;
    let report = run_scenario(&cfg)?;
    let dir = out
        .map(Path::to_path_buf)
        .or_else(|| cfg.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("out").join(cfg.kind.name()));
    let written = emit_report(&report, &dir, &cfg.output)?;
    print!("{}", report.summary());
    for p in written {
        eprintln!("wrote {}", p.display());
    }
    Ok(report.exit_code() as u8)
}

fn verify(suite: &str) -> Result<u8, Error> {
    if suite != SUITE_NAME {
        return Err(Error::Config(format!("unknown suite `{suite}`; available: {SUITE_NAME}")));
    }
    let results = run_suite();
    for r in &results {
        println!("{r}");
    }
    Ok(if results.iter().all(|r| r.passed) { 0 } else { EXIT_FAIL })
}

fn axis(spec: &str) -> Result<Vec<f64>, Error> {
    let bad = || Error::Config(format!("bad lambda axis `{spec}`"));
    let parts: Vec<&str> = spec.split(':').collect();
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    match parts.as_slice() {
        [v] => Ok(vec![num(v)?]),
        [lo, hi, n] => {
            let (lo, hi) = (num(lo)?, num(hi)?);
            let n: usize = n.trim().parse().map_err(|_| bad())?;
            match n {
                0 => Err(bad()),
                1 => Ok(vec![lo]),
                _ => Ok((0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()),
            }
        }
        _ => Err(bad()),
    }
}

fn spectrum(config: &Path, grid: &str) -> Result<u8, Error> {
    let mut cfg = ScenarioConfig::load(config)?;
    let (re, im) = grid
        .split_once(',')
        .ok_or_else(|| Error::Config(format!("lambda grid `{grid}` needs `re,im`")))?;
    let (re, im) = (axis(re)?, axis(im)?);
    let lambdas: Vec<[f64; 2]> = re.iter().flat_map(|&r| im.iter().map(move |&i| [r, i])).collect();
    let base = cfg.spectrum.take();
    cfg.spectrum = Some(SpectrumSpec {
        lambdas,
        phi: base.as_ref().map_or([1.0, 0.0], |s| s.phi),
        forcing: base.map(|s| s.forcing).unwrap_or_default(),
        expect: None,
    });
    cfg.kind = ScenarioKind::SpectrumScan;
    cfg.checks = Default::default();
    let report = run_scenario(&cfg)?;
    print!("{}", report.summary());
    Ok(0)
}

fn compare(config: &Path, dx: f64, refine: usize) -> Result<u8, Error> {
    let cfg = ScenarioConfig::load(config)?;
    let (errs, order) = oracle_refinement(&cfg, dx, refine)?;
    println!("dx,l1");
    for (h, e) in errs {
        println!("{},{}", fmt_g(h), fmt_g(e));
    }
    println!("order = {}", fmt_g(order));
    Ok(0)
}
