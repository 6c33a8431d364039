use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn shockfit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shockfit")).args(args).output().unwrap()
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/configs").join(name)
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn run_writes_outputs_and_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("a1_constant_state.toml");
    let o = shockfit(&["run", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("check.decay_rate = pass"));
    let csv = std::fs::read_to_string(dir.path().join("timeseries.csv")).unwrap();
    assert!(csv.starts_with("t,sup_err_left,"));
    assert!(dir.path().join("summary.txt").exists());
}

#[test]
fn failed_check_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(config("a1_constant_state.toml"))
        .unwrap()
        .replace("decay_rate = { lo = -2.2, hi = -1.8 }", "decay_rate = { lo = -1.5, hi = -1.0 }");
    let cfg = dir.path().join("strict.toml");
    std::fs::write(&cfg, text).unwrap();
    let out = dir.path().join("out");
    let o = shockfit(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("check.decay_rate = fail"));
}

#[test]
fn bad_input_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "kind = \"riemann_shock\"\n").unwrap();
    let o = shockfit(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error: "));

    let o = shockfit(&["run", "--config", dir.path().join("missing.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    let o = shockfit(&["verify", "--suite", "nightly"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn spectrum_grid_classifies_points() {
    let cfg = config("a8_spectrum.toml");
    let o = shockfit(&["spectrum", "--config", cfg.to_str().unwrap(), "--lambda-grid", "-2:1:4,0"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let s = stdout(&o);
    for (i, class) in ["essential", "resolvent", "eigenvalue", "resolvent"].iter().enumerate() {
        assert!(s.contains(&format!("spectrum.{i}.class = {class}\n")), "{s}");
    }
    let o = shockfit(&["spectrum", "--config", cfg.to_str().unwrap(), "--lambda-grid", "1:2"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn compare_prints_refinement_table() {
    let cfg = config("a6_oracle_convergence.toml");
    let o = shockfit(&["compare", "--config", cfg.to_str().unwrap(), "--dx", "0.02", "--refine", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let s = stdout(&o);
    let lines: Vec<&str> = s.lines().collect();
    assert_eq!(lines[0], "dx,l1");
    assert!(lines[1].starts_with("0.02,"));
    assert!(lines[2].starts_with("0.01,"));
    assert!(lines[3].starts_with("order = "));
}
