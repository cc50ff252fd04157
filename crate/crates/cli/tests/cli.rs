use std::fs;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dampwave"))
}

fn write_config(dir: &std::path::Path, body: &str) -> std::path::PathBuf {
    let path = dir.join("run.toml");
    fs::write(&path, body).unwrap();
    path
}

#[test]
fn lists_all_experiments() {
    let out = bin().arg("list-experiments").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 12);
    assert!(text.lines().any(|l| l == "littman-scan"));
}

#[test]
fn defaults_round_trip_through_validate() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin().args(["defaults", "besov-scan"]).output().unwrap();
    assert!(out.status.success());
    let path = write_config(dir.path(), &String::from_utf8(out.stdout).unwrap());
    let v = bin().arg("validate").arg(&path).output().unwrap();
    assert_eq!(v.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&v.stdout).contains("accepted"));
}

#[test]
fn validate_rejects_inadmissible_p() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "experiment = \"corollary-scan\"\n[params]\nps = [1.1]\n");
    let v = bin().arg("validate").arg(&path).output().unwrap();
    assert_eq!(v.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&v.stdout).contains("1.1"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = write_config(dir.path(), "experiment = \"nope\"\n");
    assert_eq!(bin().arg("run").arg(&unknown).status().unwrap().code(), Some(3));

    let missing = dir.path().join("missing.toml");
    assert_eq!(bin().arg("run").arg(&missing).status().unwrap().code(), Some(5));

    let out = dir.path().join("out");
    let pass = write_config(
        dir.path(),
        "experiment = \"partition-check\"\n[grid]\ndim = 2\npoints = 128\nlength = 12.566370614359172\n[params]\nlevels = 3\n",
    );
    let status = bin().arg("run").arg(&pass).arg("--output").arg(&out).status().unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(out.join("summary.json").exists());
    assert!(out.join("manifest.json").exists());

    let fail = write_config(
        dir.path(),
        "experiment = \"symbol-invariants\"\n[tolerances]\nsemigroup_composition = 0.0\n",
    );
    let status = bin().arg("run").arg(&fail).arg("--output").arg(&out).status().unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn worker_env_is_checked() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(
        dir.path(),
        "experiment = \"symbol-invariants\"\n[tolerances]\nsemigroup_det = 1e300\n",
    );
    let bad = bin()
        .env("DAMPWAVE_WORKERS", "zero")
        .arg("run")
        .arg(&path)
        .arg("--output")
        .arg(dir.path().join("o"))
        .status()
        .unwrap();
    assert_eq!(bad.code(), Some(3));
    let ok = bin()
        .env("DAMPWAVE_WORKERS", "2")
        .arg("run")
        .arg(&path)
        .arg("--output")
        .arg(dir.path().join("o"))
        .status()
        .unwrap();
    assert_eq!(ok.code(), Some(0));
}
