//! Experiment orchestration: config in, CSV/JSON artifacts and an exit status out.

pub mod config;
mod experiments;
pub mod output;
pub mod validate;

use std::path::PathBuf;

pub use config::{ExperimentConfig, GridSpec, ParamGrid, SolveSpec, DEFAULT_SEED, EXPERIMENTS};
pub use experiments::{execute, mode_solution};
pub use output::{write_outputs, Check, Relation, Report, Timing};
pub use validate::{validate, Finding, Severity, ValidationReport};

use crate::{Error, Result};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_RUNTIME: i32 = 4;
pub const EXIT_IO: i32 = 5;

/// Process exit code for an error that stopped a run.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io(_) => EXIT_IO,
        Error::Config(_) | Error::UnknownExperiment(_) => EXIT_CONFIG,
        _ => EXIT_RUNTIME,
    }
}

#[derive(Debug)]
pub struct RunOutcome {
    pub report: Report,
    pub files: Vec<PathBuf>,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.report.passed() {
            EXIT_PASS
        } else {
            EXIT_CHECK_FAILED
        }
    }
}

/// Validates, executes and writes everything under `config.output_dir`.
pub fn run(config: &ExperimentConfig) -> Result<RunOutcome> {
    let v = validate(config);
    if !v.accepted() {
        let msgs: Vec<&str> = v.errors().map(|f| f.message.as_str()).collect();
        return Err(Error::Config(msgs.join("; ")));
    }
    let report = execute(config)?;
    let files = write_outputs(&config.output_dir, config, &report)?;
    Ok(RunOutcome { report, files })
}
