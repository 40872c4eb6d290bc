use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use kgpovm_cli::report::{write_case_csv, write_report, Report};
use kgpovm_cli::RunConfig;
use kgpovm_core::harness::{run_suite, HarnessConfig, Suite};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_kgpovm"))
}

fn quick_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/quick.toml")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn csv_rows(path: &Path) -> usize {
    csv::Reader::from_path(path).unwrap().records().count()
}

#[test]
fn shipped_quick_config_is_the_quick_preset() {
    let cfg = RunConfig::load(&quick_config()).unwrap();
    assert_eq!(cfg.harness, HarnessConfig::quick());
}

#[test]
fn malformed_config_exits_2_and_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(
        &path,
        "[harness.moments]\ncases = 3\nwidht_tolerance = 1e-6\n",
    )
    .unwrap();
    let out = run(&["suite", "moments", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("widht_tolerance") && err.contains("line 3"),
        "{err}"
    );

    std::fs::write(&path, "[harness]\nfailure_multiplier = 0.0\n").unwrap();
    let out = run(&["suite", "all", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("harness.failure_multiplier"));
}

#[test]
fn missing_config_has_its_own_exit_code() {
    let out = run(&["suite", "all", "--config", "/nonexistent/kgpovm.toml"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn unknown_suite_is_a_config_error() {
    let out = run(&["suite", "nonsense"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("castrigiano-m"));
}

#[test]
fn quick_suite_writes_a_report_that_reloads() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = quick_config();
    let out = run(&[
        "suite",
        "causal-evolution",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report = Report::load(&dir.path().join("report.json")).unwrap();
    assert!(report.passed());
    let cases = report.suites[0].cases_run;
    assert_eq!(csv_rows(&dir.path().join("cases.csv")), cases);
    // the same seed reproduces the file byte for byte
    let again = tempfile::tempdir().unwrap();
    let out = run(&[
        "suite",
        "causal-evolution",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        again.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        std::fs::read(dir.path().join("report.json")).unwrap(),
        std::fs::read(again.path().join("report.json")).unwrap()
    );
}

#[test]
fn demo_succeeds_when_leakage_is_found() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = quick_config();
    let out = run(&[
        "demo",
        "nw-violation",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("leakage found"));
}

#[test]
fn report_round_trips_and_counts_rows() {
    let cfg = HarnessConfig::quick();
    let suites = vec![
        run_suite(Suite::Normalization, &cfg).unwrap(),
        run_suite(Suite::AlmostLocalized, &cfg).unwrap(),
    ];
    let total: usize = suites.iter().map(|s| s.cases_run).sum();
    let report = Report::new(&cfg, suites);
    let dir = tempfile::tempdir().unwrap();
    let written = write_report(dir.path(), &report, true, true).unwrap();
    assert_eq!(
        Report::load(written.json.as_ref().unwrap()).unwrap(),
        report
    );
    assert_eq!(csv_rows(written.csv.as_ref().unwrap()), total);
}

#[test]
fn empty_report_is_valid() {
    let report = Report::new(&HarnessConfig::default(), vec![]);
    let dir = tempfile::tempdir().unwrap();
    let written = write_report(dir.path(), &report, true, true).unwrap();
    let back = Report::load(written.json.as_ref().unwrap()).unwrap();
    assert!(back.suites.is_empty() && back.passed());
    let mut buf = Vec::new();
    assert_eq!(write_case_csv(&[], &mut buf).unwrap(), 0);
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert!(text.starts_with("suite,case,label,hash"));
}

#[test]
fn prob_prints_json() {
    let cfg = quick_config();
    let out = run(&["prob", "a", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let p = v["value"].as_f64().unwrap();
    assert!(p > 0.0 && p < 1.0);
}

#[test]
fn export_mantle_has_one_row_per_radius() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mantle.csv");
    let cfg = quick_config();
    let out = run(&[
        "export",
        "mantle",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(
        csv_rows(&path),
        RunConfig::default().prob.mantle_radii.len()
    );
}
