use std::fs;
use std::path::Path;

use dampwave::runner::{self, validate, ExperimentConfig, EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_PASS};
use dampwave::Error;

fn data_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != "manifest.json")
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).unwrap(),
            )
        })
        .collect();
    out.sort();
    out
}

fn small(name: &str) -> ExperimentConfig {
    let mut c = ExperimentConfig::defaults(name).unwrap();
    if name == "partition-check" {
        c.grid.points = Some(128);
        c.params.levels = 3;
    }
    if name == "curvature-report" {
        c.params.samples = 50;
    }
    if name == "solve" {
        c.solve.t_end = 1.0;
        c.solve.snapshot_every = 50;
    }
    c
}

#[test]
fn runs_are_byte_identical() {
    for name in [
        "partition-check",
        "symbol-invariants",
        "curvature-report",
        "solve",
        "convergence-study",
    ] {
        let dir = tempfile::tempdir().unwrap();
        let mut c = small(name);
        c.output_dir = dir.path().to_path_buf();
        runner::run(&c).unwrap();
        let fa = data_files(dir.path());
        runner::run(&c).unwrap();
        let fb = data_files(dir.path());
        assert!(fa.len() >= 3, "{name}");
        assert_eq!(fa, fb, "{name}");
    }
}

#[test]
fn summary_records_measured_values_and_tolerances() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = small("partition-check");
    c.output_dir = dir.path().to_path_buf();
    let out = runner::run(&c).unwrap();
    assert_eq!(out.exit_code(), EXIT_PASS);
    let summary: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["pass"], true);
    for check in summary["checks"].as_array().unwrap() {
        assert!(check["measured"].is_number());
        assert!(check["tolerance"].is_number());
        assert!(check["pass"].is_boolean());
    }
    let manifest: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config_sha256"].as_str().unwrap(), c.hash().unwrap());
    assert_eq!(manifest["seed"], c.seed);
    assert!(manifest["timestamp_unix"].as_u64().unwrap() > 0);
    let csv = fs::read_to_string(dir.path().join("partition.csv")).unwrap();
    assert!(csv.starts_with("j,r,phi\n"));
}

#[test]
fn failing_check_maps_to_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = ExperimentConfig::defaults("symbol-invariants").unwrap();
    c.output_dir = dir.path().to_path_buf();
    c.tolerances.insert("semigroup_composition".into(), 0.0);
    let out = runner::run(&c).unwrap();
    assert_eq!(out.exit_code(), EXIT_CHECK_FAILED);
}

#[test]
fn tolerance_overrides_are_used() {
    let c = ExperimentConfig::from_toml("experiment = \"symbol-invariants\"\n[tolerances]\nsemigroup_det = 1e300\n")
        .unwrap();
    let rep = runner::execute(&c).unwrap();
    let det = rep.find("semigroup_det_rel_error").unwrap();
    assert_eq!(det.tolerance, 1e300);
    assert!(det.pass);
}

#[test]
fn validation_examples() {
    let mut c = ExperimentConfig::defaults("corollary-scan").unwrap();
    c.params.ps = vec![1.1];
    assert!(!validate(&c).accepted());

    let mut c = ExperimentConfig::defaults("littman-scan").unwrap();
    c.params.deltas = vec![0.5];
    let rep = validate(&c);
    assert!(rep.errors().any(|f| f.message.contains("0.35355")));

    assert!(validate(&ExperimentConfig::defaults("besov-scan").unwrap()).accepted());
}

#[test]
fn invalid_config_is_refused_before_running() {
    let mut c = ExperimentConfig::defaults("partition-check").unwrap();
    c.params.levels = 12;
    let err = runner::run(&c).unwrap_err();
    assert_eq!(runner::exit_code(&err), EXIT_CONFIG);
    assert_eq!(runner::exit_code(&Error::UnknownExperiment("x".into())), EXIT_CONFIG);
    assert_eq!(
        runner::exit_code(&Error::NumericalAbort { step: 3 }),
        runner::EXIT_RUNTIME
    );
}

#[test]
fn shell_bounds_one_dimensional() {
    let mut c = ExperimentConfig::defaults("shell-bounds").unwrap();
    c.grid.dim = 1;
    c.params.levels = 5;
    let rep = runner::execute(&c).unwrap();
    assert!(!rep.checks.is_empty());
    assert!(rep.artifacts.iter().any(|a| a.name.starts_with("shells_")));
}
