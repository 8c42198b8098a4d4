use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ncval-qrf"))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn stderr_json(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stderr);
    let line = text.lines().find(|l| l.starts_with('{')).expect("json error line on stderr");
    serde_json::from_str(line).unwrap()
}

#[test]
fn run_writes_passing_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let cfg = configs().join("qubit_b_prime.json");
    let o = run(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(r["scenario_id"], "qubit-b-prime");
    assert!(r["checks"].as_array().unwrap().iter().all(|c| c["pass"] == true));
}

#[test]
fn every_shipped_config_passes() {
    for name in ["qubit_a_prime.json", "qubit_b_prime.json", "grid_a.json"] {
        let o = run(&["run", configs().join(name).to_str().unwrap()]);
        assert!(o.status.success(), "{name}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn csv_summary_has_header_plus_one_row_per_check() {
    let cfg = configs().join("grid_a.json");
    let json = run(&["run", cfg.to_str().unwrap()]);
    let csv = run(&["run", cfg.to_str().unwrap(), "--format", "csv-summary"]);
    assert!(csv.status.success());
    let r: Value = serde_json::from_slice(&json.stdout).unwrap();
    let rows = String::from_utf8(csv.stdout).unwrap().lines().count();
    assert_eq!(rows, r["checks"].as_array().unwrap().len() + 1);
}

#[test]
fn malformed_config_exits_2_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let cfg = write(dir.path(), "bad.json", r#"{"system":"qubit","case":"c","angles":{"theta":"x"}}"#);
    let o = run(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let e = stderr_json(&o);
    assert_eq!(e["error"], "ConfigInvalid");
    assert_eq!(e["field"], "angles.theta");
    assert!(!out.exists());
}

#[test]
fn unknown_field_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.json", r#"{"system":"qubit","case":"c","angles":{"thta":1}}"#);
    let o = run(&["run", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["error"], "ConfigInvalid");
}

#[test]
fn missing_config_is_an_error() {
    let o = run(&["run", "/nonexistent/cfg.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr_json(&o)["config"].as_str().unwrap().contains("nonexistent"));
}

#[test]
fn verify_unknown_suite_exits_2() {
    let o = run(&["verify", "nope"]);
    assert_eq!(o.status.code(), Some(2));
    let e = stderr_json(&o);
    assert_eq!(e["error"], "UnknownSuite");
    assert_eq!(e["suite"], "nope");
}

#[test]
fn verify_qubit_passes_and_reports_json() {
    let o = run(&["verify", "qubit", "--json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let s: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(s["suite"], "qubit");
}

#[test]
fn verify_rejects_bad_dims() {
    let o = run(&["verify", "ncvalue-core", "--dims", "3-5"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn seeded_verify_is_deterministic() {
    let args = ["verify", "ncvalue-core", "--draws", "10", "--dims", "2..5", "--seed", "7", "--json"];
    let (a, b) = (run(&args), run(&args));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn run_output_is_deterministic() {
    let cfg = configs().join("grid_a.json");
    let (a, b) = (run(&["run", cfg.to_str().unwrap()]), run(&["run", cfg.to_str().unwrap()]));
    assert_eq!(a.stdout, b.stdout);
}
