//! Static config checks: sizing rules, admissible exponents, δ ranges.

use std::f64::consts::PI;

use serde::Serialize;

use super::config::ExperimentConfig;
use crate::curvature::DELTA_MAX;
use crate::estimator::{admissible_p_min, littman_grid, littman_phase_variation, LITTMAN_PHASE_GUARD};
use crate::spectral::Grid;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Finding {
    pub severity: Severity,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub experiment: String,
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn accepted(&self) -> bool {
        self.findings.iter().all(|f| f.severity != Severity::Error)
    }

    pub fn errors(&self) -> impl Iterator<Item = &Finding> {
        self.findings.iter().filter(|f| f.severity == Severity::Error)
    }

    fn error(&mut self, message: String) {
        self.findings.push(Finding {
            severity: Severity::Error,
            message,
        });
    }

    fn warn(&mut self, message: String) {
        self.findings.push(Finding {
            severity: Severity::Warning,
            message,
        });
    }
}

/// Experiments whose grid comes from `[grid]` rather than a sizing rule.
fn uses_fixed_grid(name: &str) -> bool {
    !matches!(
        name,
        "shell-bounds" | "littman-scan" | "curvature-report" | "symbol-invariants"
    )
}

fn nyquist(points: usize, length: f64) -> f64 {
    PI * points as f64 / length
}

/// Checks a config without running anything numerical; never fails.
pub fn validate(config: &ExperimentConfig) -> ValidationReport {
    let mut rep = ValidationReport {
        experiment: config.experiment.clone(),
        findings: Vec::new(),
    };
    let name = config.experiment.as_str();
    let p = &config.params;
    let n = config.grid.dim;

    if !(1..=3).contains(&n) {
        rep.error(format!("grid.dim = {n} must be 1, 2 or 3"));
        return rep;
    }
    if let Some(points) = config.grid.points {
        if points < 4 || points % 2 != 0 {
            rep.error(format!("grid.points = {points} must be even and at least 4"));
        } else if !points.is_power_of_two() {
            rep.warn(format!(
                "grid.points = {points} is not a power of two; FFTs will be slower"
            ));
        }
    }
    if let Some(length) = config.grid.length {
        if !(length > 0.0 && length.is_finite()) {
            rep.error(format!("grid.length = {length} must be positive"));
        }
    }
    if name == "corollary-scan" && n < 2 {
        rep.error("corollary-scan needs dimension 2 or 3".into());
    }
    let fixed = match (config.grid.points, config.grid.length) {
        (Some(points), Some(length)) if points >= 4 && length > 0.0 => Some((points, length)),
        _ => None,
    };
    if uses_fixed_grid(name) && fixed.is_none() {
        rep.error(format!("{name} needs grid.points and grid.length"));
    }

    let nonempty = |rep: &mut ValidationReport, key: &str, v: &[f64]| {
        if v.is_empty() {
            rep.error(format!("params.{key} is empty"));
        }
    };
    let needs_deltas = !matches!(name, "partition-check" | "solve" | "convergence-study");
    if needs_deltas {
        nonempty(&mut rep, "deltas", &p.deltas);
        for &d in &p.deltas {
            if !(d >= 0.0 && d.is_finite()) {
                rep.error(format!("δ = {d} must be non-negative"));
            }
        }
    }
    let needs_times = !matches!(
        name,
        "partition-check" | "shell-bounds" | "curvature-report" | "solve" | "convergence-study"
    );
    if needs_times {
        nonempty(&mut rep, "times", &p.times);
        for &t in &p.times {
            if !(t > 0.0 && t.is_finite()) {
                rep.error(format!("time {t} must be positive"));
            }
        }
    }

    match name {
        "corollary-scan" | "besov-scan" | "lemma1-check" => {
            nonempty(&mut rep, "ps", &p.ps);
            let p_min = admissible_p_min(n);
            for &pp in &p.ps {
                if !(pp >= p_min - 1e-12 && pp <= 2.0) {
                    rep.error(format!(
                        "p = {pp} outside the admissible range [{p_min}, 2] for n = {n}"
                    ));
                }
            }
        }
        "interpolation-check" => {
            nonempty(&mut rep, "ps", &p.ps);
            for &pp in &p.ps {
                if !(1.0..=2.0).contains(&pp) {
                    rep.error(format!("p = {pp} outside [1, 2]"));
                }
            }
        }
        _ => {}
    }

    if name == "littman-scan" {
        for &d in &p.deltas {
            if d > DELTA_MAX {
                rep.error(format!("δ = {d} exceeds 1/(2√2) ≈ {DELTA_MAX:.5}"));
            }
        }
        if n < 2 {
            rep.error("littman-scan needs dimension 2 or 3".into());
        }
        let t_max = p.times.iter().cloned().fold(0.0, f64::max);
        let grid = match fixed {
            Some((points, length)) => Grid::new(n, points, length),
            None => littman_grid(n, t_max),
        };
        match grid {
            Ok(g) => {
                if g.nyquist() < 2.0 {
                    rep.error(format!("Nyquist {} does not cover |ξ| < 2", g.nyquist()));
                }
                for &d in p.deltas.iter().filter(|d| **d <= DELTA_MAX) {
                    if let Ok(v) = littman_phase_variation(&g, d, t_max) {
                        if v > LITTMAN_PHASE_GUARD {
                            rep.error(format!(
                                "phase varies by {v:.3} rad per half frequency cell at δ = {d} (limit {LITTMAN_PHASE_GUARD})"
                            ));
                        }
                    }
                }
                if p.times.len() < crate::estimator::MIN_FIT_POINTS {
                    rep.error(format!(
                        "decay fit needs at least {} times",
                        crate::estimator::MIN_FIT_POINTS
                    ));
                }
            }
            Err(e) => rep.error(format!("Littman grid: {e}")),
        }
    }
    if name == "curvature-report" {
        for &d in &p.deltas {
            if d > DELTA_MAX {
                rep.error(format!("δ = {d} exceeds 1/(2√2) ≈ {DELTA_MAX:.5}"));
            }
        }
    }

    // shell resolution on fixed grids
    if let Some((points, length)) = fixed {
        let nyq = nyquist(points, length);
        let mut need = |what: &str, level: usize| {
            let needed = 2f64.powi(level as i32 + 1);
            if nyq < needed {
                rep.error(format!("{what} needs Nyquist ≥ {needed}, grid has {nyq:.4}"));
            }
        };
        match name {
            "partition-check" | "besov-scan" | "lemma1-check" => need("partition level J", p.levels),
            _ => {}
        }
        if matches!(
            name,
            "corollary-scan" | "besov-scan" | "lemma1-check" | "interpolation-check"
        ) {
            if let Some(&j) = config.probes.shells.iter().max() {
                need("shell probe", j);
            }
        }
    }

    if name == "shell-bounds" && p.levels < 2 {
        rep.error("shell-bounds needs at least two shells".into());
    }

    if matches!(name, "solve" | "convergence-study") {
        let s = &config.solve;
        if let Err(e) = s.nonlinearity.validate() {
            rep.error(e.to_string());
        }
        if let Err(e) = s.config.validate() {
            rep.error(e.to_string());
        }
        if !(s.delta >= 0.0) {
            rep.error(format!("δ = {} must be non-negative", s.delta));
        }
        if !(s.t_end > 0.0) || !(s.width > 0.0) {
            rep.error("solve.t_end and solve.width must be positive".into());
        }
        if name == "solve" {
            let steps = s.t_end / s.config.tau;
            if (steps - steps.round()).abs() > 1e-9 * steps.max(1.0) {
                rep.error(format!("t_end = {} is not a multiple of τ = {}", s.t_end, s.config.tau));
            }
        } else if s.divisors.len() < 2 || s.divisors.contains(&0) {
            rep.error("convergence study needs at least two positive divisors".into());
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::runner::config::EXPERIMENTS;

    #[test]
    fn defaults_are_accepted() {
        for name in EXPERIMENTS {
            let r = validate(&ExperimentConfig::defaults(name).unwrap());
            assert!(r.accepted(), "{name}: {:?}", r.findings);
        }
    }

    #[test]
    fn rejects_inadmissible_p() {
        let mut c = ExperimentConfig::defaults("corollary-scan").unwrap();
        c.params.ps = vec![1.1];
        let r = validate(&c);
        assert!(!r.accepted());
        assert!(r.errors().any(|f| f.message.contains("1.1")));
    }

    #[test]
    fn rejects_large_littman_delta() {
        let mut c = ExperimentConfig::defaults("littman-scan").unwrap();
        c.params.deltas = vec![0.5];
        assert!(!validate(&c).accepted());
    }

    #[test]
    fn rejects_unresolved_partition() {
        let mut c = ExperimentConfig::defaults("partition-check").unwrap();
        c.params.levels = 9;
        assert!(!validate(&c).accepted());
    }
}
