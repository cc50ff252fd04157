//! Experiment configuration: TOML with per-experiment defaults.
//!
//! A user file only needs the keys it changes; it is merged over
//! [`ExperimentConfig::defaults`] for the named experiment.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::curvature::DELTA_MAX;
use crate::duhamel::{NonlinearityParams, SolverConfig};
use crate::estimator::{log_spaced, ProbeFamilySpec};
use crate::{Error, Result};

/// Names accepted by `run`.
pub const EXPERIMENTS: [&str; 12] = [
    "partition-check",
    "symbol-invariants",
    "shell-bounds",
    "littman-scan",
    "corollary-scan",
    "besov-scan",
    "lemma1-check",
    "interpolation-check",
    "scaling-check",
    "curvature-report",
    "solve",
    "convergence-study",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub dim: usize,
    /// Points per axis; omitted means the experiment's sizing rule.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    /// Box side; omitted means the experiment's sizing rule.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamGrid {
    pub deltas: Vec<f64>,
    pub ps: Vec<f64>,
    pub times: Vec<f64>,
    pub sigma: f64,
    pub q: f64,
    /// Dyadic truncation `J` (shell range for shell-bounds).
    pub levels: usize,
    /// Radii per `δ` in the curvature report.
    pub radii: usize,
    /// Directions per radius in the curvature report.
    pub directions: usize,
    /// Random `(δ, x)` samples for the finite-difference comparison.
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveSpec {
    pub delta: f64,
    pub t_end: f64,
    /// Width of the initial Gaussian `ψ₀`; `ψ_t(0) = 0`.
    pub width: f64,
    pub amplitude: f64,
    /// Keep every k-th state as a snapshot (0 disables).
    pub snapshot_every: usize,
    /// Step divisors `T/k` of the convergence study.
    pub divisors: Vec<usize>,
    pub nonlinearity: NonlinearityParams,
    pub config: SolverConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub grid: GridSpec,
    pub params: ParamGrid,
    pub probes: ProbeFamilySpec,
    pub solve: SolveSpec,
    /// Overrides of named check tolerances.
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
}

pub const DEFAULT_SEED: u64 = 0x0da3_9a7e_5eed_0001;

fn base(experiment: &str) -> ExperimentConfig {
    ExperimentConfig {
        experiment: experiment.to_string(),
        output_dir: PathBuf::from(format!("out/{experiment}")),
        seed: DEFAULT_SEED,
        grid: GridSpec {
            dim: 2,
            points: Some(1024),
            length: Some(64.0),
        },
        params: ParamGrid {
            deltas: vec![0.0, 1e-3, 1e-2, 0.1, 0.3, DELTA_MAX, 1.0],
            ps: vec![1.2],
            times: log_spaced(4.0, 128.0, 8),
            sigma: 1.0,
            q: 2.0,
            levels: 4,
            radii: 16,
            directions: 64,
            samples: 1000,
        },
        probes: ProbeFamilySpec::default(),
        solve: SolveSpec {
            delta: 0.1,
            t_end: 1.0,
            width: 1.0,
            amplitude: 1.0,
            snapshot_every: 0,
            divisors: vec![64, 128, 256, 512, 1024],
            nonlinearity: NonlinearityParams::default(),
            config: SolverConfig::default(),
        },
        tolerances: BTreeMap::new(),
    }
}

impl ExperimentConfig {
    /// Embedded defaults for a named experiment.
    pub fn defaults(experiment: &str) -> Result<Self> {
        let mut c = base(experiment);
        let p = &mut c.params;
        match experiment {
            "partition-check" => {
                c.grid = GridSpec {
                    dim: 2,
                    points: Some(1024),
                    length: Some(4.0 * std::f64::consts::PI),
                };
                p.levels = 7;
            }
            "symbol-invariants" => {
                p.radii = 20;
                p.deltas = log_spaced(1e-3, 1.0, 10);
                p.times = log_spaced(1e-2, 10.0, 10);
            }
            "shell-bounds" => {
                p.deltas = vec![0.0, 2f64.powi(-6)];
                p.levels = 7;
                c.grid.points = None;
                c.grid.length = None;
            }
            "littman-scan" => {
                p.deltas = vec![0.0, 0.1, 0.2, 0.3, DELTA_MAX];
                p.times = log_spaced(10.0, 200.0, 12);
                c.grid.points = None;
                c.grid.length = None;
            }
            "corollary-scan" => {
                c.grid = GridSpec {
                    dim: 2,
                    points: Some(2048),
                    length: Some(384.0),
                };
                p.deltas = vec![0.0, 1e-2, 0.1, 0.3, 1.0];
                p.ps = vec![1.2, 2.0];
                c.probes.gaussian_widths = vec![0.5, 1.0, 2.0];
                c.probes.shells = vec![1, 2, 3];
            }
            "besov-scan" | "lemma1-check" => {
                c.grid = GridSpec {
                    dim: 2,
                    points: Some(1024),
                    length: Some(160.0),
                };
                p.levels = 3;
                p.deltas = vec![0.0, 1e-2, 0.1, 0.3, 1.0];
                p.times = (0..7).map(|k| 2f64.powi(k)).collect();
                if experiment == "lemma1-check" {
                    p.times = vec![1.0];
                }
                // everything must sit below 2^J = 8 up to e^{-32}
                c.probes.gaussian_widths = vec![1.0, 2.0];
                c.probes.carriers = vec![2.0, 4.0];
                c.probes.carrier_width = 2.0;
                c.probes.shells = vec![1];
            }
            "interpolation-check" => {
                p.deltas = vec![0.0, 0.05, 0.1, 0.3];
                p.times = vec![0.5, 1.0, 2.0, 4.0, 8.0];
                p.ps = vec![1.0, 1.2, 1.5, 2.0];
            }
            "scaling-check" => {
                c.grid.points = Some(1280);
                c.grid.length = Some(80.0);
                p.deltas = vec![0.0, 0.1, 0.5];
                p.times = vec![0.5, 2.0, 8.0];
                c.probes.gaussian_widths = vec![1.5, 2.0];
                c.probes.carriers = vec![];
                c.probes.shells = vec![];
            }
            "curvature-report" => {
                c.grid.points = None;
                c.grid.length = None;
                p.deltas = vec![0.0, 0.05, 0.1, 0.2, 0.3, DELTA_MAX - 1e-3];
            }
            "solve" | "convergence-study" => {
                c.grid = GridSpec {
                    dim: 1,
                    points: Some(128),
                    length: Some(16.0),
                };
                if experiment == "solve" {
                    c.solve.t_end = 10.0;
                    c.solve.config.tau = 1e-2;
                }
            }
            other => return Err(Error::UnknownExperiment(other.to_string())),
        }
        Ok(c)
    }

    /// Parses TOML, filling unspecified keys from the experiment's defaults.
    pub fn from_toml(text: &str) -> Result<Self> {
        let user: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        let name = user
            .get("experiment")
            .and_then(|v| v.as_str())
            .ok_or_else(|| Error::Config("missing `experiment` key".into()))?;
        let defaults = Self::defaults(name)?;
        let mut merged = toml::Table::try_from(&defaults).map_err(|e| Error::Config(e.to_string()))?;
        merge(&mut merged, user);
        toml::Value::Table(merged)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// SHA-256 of the canonical serialisation.
    pub fn hash(&self) -> Result<String> {
        let text = self.to_toml()?;
        Ok(hex::encode(Sha256::digest(text.as_bytes())))
    }

    /// Tolerance `name`, overridden by the `[tolerances]` table when present.
    pub fn tolerance(&self, name: &str, default: f64) -> f64 {
        self.tolerances.get(name).copied().unwrap_or(default)
    }
}

/// Recursive table merge: `over` wins, nested tables merge.
fn merge(into: &mut toml::Table, over: toml::Table) {
    for (k, v) in over {
        match (into.get_mut(&k), v) {
            (Some(toml::Value::Table(a)), toml::Value::Table(b)) => merge(a, b),
            (_, v) => {
                into.insert(k, v);
            }
        }
    }
}
