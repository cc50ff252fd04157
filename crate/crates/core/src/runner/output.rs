//! Named checks, experiment reports and what gets written to disk.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use super::config::ExperimentConfig;
use crate::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Relation {
    /// `measured ≤ tolerance`
    #[serde(rename = "<=")]
    AtMost,
    /// `measured ≥ tolerance`
    #[serde(rename = ">=")]
    AtLeast,
    /// `measured > tolerance`
    #[serde(rename = ">")]
    Above,
    /// `|measured − target| ≤ tolerance`
    #[serde(rename = "|measured-target|<=")]
    Within,
}

/// One auditable pass/fail decision.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub relation: Relation,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<f64>,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Self::make(name, measured, Relation::AtMost, tolerance, None, measured <= tolerance)
    }

    pub fn at_least(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Self::make(
            name,
            measured,
            Relation::AtLeast,
            tolerance,
            None,
            measured >= tolerance,
        )
    }

    pub fn above(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Self::make(name, measured, Relation::Above, tolerance, None, measured > tolerance)
    }

    pub fn within(name: impl Into<String>, measured: f64, target: f64, tolerance: f64) -> Self {
        let pass = (measured - target).abs() <= tolerance;
        Self::make(name, measured, Relation::Within, tolerance, Some(target), pass)
    }

    fn make(
        name: impl Into<String>,
        measured: f64,
        relation: Relation,
        tolerance: f64,
        target: Option<f64>,
        pass: bool,
    ) -> Self {
        Self {
            name: name.into(),
            measured,
            relation,
            tolerance,
            target,
            // NaN comparisons are already false
            pass,
        }
    }
}

/// Wall-clock measurement; kept out of the deterministic summary.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Timing {
    pub name: String,
    pub seconds: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub limit: Option<f64>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

/// Everything an experiment produced, before anything touches the disk.
#[derive(Clone, Debug, Default)]
pub struct Report {
    pub experiment: String,
    pub checks: Vec<Check>,
    pub values: Map<String, Value>,
    pub artifacts: Vec<Artifact>,
    pub timings: Vec<Timing>,
}

impl Report {
    pub fn new(experiment: &str) -> Self {
        Self {
            experiment: experiment.to_string(),
            ..Self::default()
        }
    }

    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn value<T: Serialize>(&mut self, key: &str, v: T) {
        let v = serde_json::to_value(v).unwrap_or(Value::Null);
        self.values.insert(key.to_string(), v);
    }

    pub fn artifact(&mut self, name: impl Into<String>, bytes: Vec<u8>) {
        self.artifacts.push(Artifact {
            name: name.into(),
            bytes,
        });
    }

    pub fn timing(&mut self, name: &str, seconds: f64, limit: Option<f64>) {
        self.timings.push(Timing {
            name: name.to_string(),
            seconds,
            limit,
            pass: limit.is_none_or(|l| seconds < l),
        });
    }

    pub fn checks_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn timings_pass(&self) -> bool {
        self.timings.iter().all(|t| t.pass)
    }

    pub fn passed(&self) -> bool {
        self.checks_pass() && self.timings_pass()
    }

    pub fn find(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// `summary.json`: checks and measured values, no wall-clock data.
    pub fn summary_json(&self) -> Result<Vec<u8>> {
        #[derive(Serialize)]
        struct Summary<'a> {
            experiment: &'a str,
            pass: bool,
            checks: &'a [Check],
            values: &'a Map<String, Value>,
        }
        let s = Summary {
            experiment: &self.experiment,
            pass: self.checks_pass(),
            checks: &self.checks,
            values: &self.values,
        };
        let mut out = serde_json::to_vec_pretty(&s).map_err(|e| crate::Error::Snapshot(e.to_string()))?;
        out.push(b'\n');
        Ok(out)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FileEntry {
    pub name: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub experiment: String,
    pub config_sha256: String,
    pub seed: u64,
    pub versions: Map<String, Value>,
    pub parallel: bool,
    pub workers: usize,
    pub timestamp_unix: u64,
    pub timings: Vec<Timing>,
    pub timings_pass: bool,
    pub files: Vec<FileEntry>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes artifacts, `summary.json`, `config.toml` and `manifest.json` into
/// `dir`; returns the paths written.
pub fn write_outputs(dir: &Path, config: &ExperimentConfig, report: &Report) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    let mut entries = Vec::new();
    let mut put = |name: &str, bytes: &[u8]| -> Result<()> {
        let path = dir.join(name);
        fs::write(&path, bytes)?;
        entries.push(FileEntry {
            name: name.to_string(),
            bytes: bytes.len(),
            sha256: sha256_hex(bytes),
        });
        files.push(path);
        Ok(())
    };
    for a in &report.artifacts {
        put(&a.name, &a.bytes)?;
    }
    put("summary.json", &report.summary_json()?)?;
    put("config.toml", config.to_toml()?.as_bytes())?;

    let mut versions = Map::new();
    versions.insert("dampwave".into(), env!("CARGO_PKG_VERSION").into());
    versions.insert("snapshot_format".into(), crate::spectral::snapshot::VERSION.into());
    let manifest = Manifest {
        experiment: report.experiment.clone(),
        config_sha256: config.hash()?,
        seed: config.seed,
        versions,
        parallel: cfg!(feature = "parallel"),
        workers: crate::par::num_threads(),
        timestamp_unix: std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        timings: report.timings.clone(),
        timings_pass: report.timings_pass(),
        files: entries,
    };
    let mut bytes = serde_json::to_vec_pretty(&manifest).map_err(|e| crate::Error::Snapshot(e.to_string()))?;
    bytes.push(b'\n');
    let path = dir.join("manifest.json");
    fs::write(&path, bytes)?;
    files.push(path);
    Ok(files)
}
