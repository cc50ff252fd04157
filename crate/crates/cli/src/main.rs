//! `dampwave` command-line runner.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dampwave::runner::{self, ExperimentConfig, Severity, EXIT_CONFIG, EXIT_IO, EXPERIMENTS};
use dampwave::Error;

/// Worker-count override for the thread pool.
const WORKERS_ENV: &str = "DAMPWAVE_WORKERS";

#[derive(Parser)]
#[command(
    name = "dampwave",
    version,
    about = "Decay-estimate experiments for the strongly damped wave equation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config.
    Run {
        config: PathBuf,
        /// Write into this directory instead of the config's `output_dir`.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Static checks of a config; nothing is computed.
    Validate { config: PathBuf },
    /// Print the embedded defaults (all experiments when none is named).
    Defaults { experiment: Option<String> },
    /// Print the experiment names.
    ListExperiments,
}

fn load(path: &Path) -> Result<ExperimentConfig, (i32, String)> {
    let text = std::fs::read_to_string(path).map_err(|e| (EXIT_IO, format!("{}: {e}", path.display())))?;
    ExperimentConfig::from_toml(&text).map_err(|e| (runner::exit_code(&e), e.to_string()))
}

fn init_workers() -> Result<(), (i32, String)> {
    let Ok(raw) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| (EXIT_CONFIG, format!("{WORKERS_ENV}={raw:?} is not a positive integer")))?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| (EXIT_CONFIG, e.to_string()))?;
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

fn dispatch(cli: Cli) -> Result<i32, (i32, String)> {
    match cli.command {
        Command::ListExperiments => {
            for name in EXPERIMENTS {
                println!("{name}");
            }
            Ok(0)
        }
        Command::Defaults { experiment } => {
            let names: Vec<String> = match experiment {
                Some(e) => vec![e],
                None => EXPERIMENTS.iter().map(|s| s.to_string()).collect(),
            };
            for (i, name) in names.iter().enumerate() {
                let c = ExperimentConfig::defaults(name).map_err(|e| (runner::exit_code(&e), e.to_string()))?;
                let text = c.to_toml().map_err(|e| (runner::exit_code(&e), e.to_string()))?;
                if names.len() > 1 {
                    if i > 0 {
                        println!();
                    }
                    println!("# ---- {name} ----");
                }
                print!("{text}");
            }
            Ok(0)
        }
        Command::Validate { config } => {
            let c = load(&config)?;
            let report = runner::validate(&c);
            for f in &report.findings {
                let tag = match f.severity {
                    Severity::Error => "error",
                    Severity::Warning => "warning",
                };
                println!("{tag}: {}", f.message);
            }
            if report.accepted() {
                println!("{}: config accepted", c.experiment);
                Ok(0)
            } else {
                println!("{}: config rejected", c.experiment);
                Ok(EXIT_CONFIG)
            }
        }
        Command::Run { config, output } => {
            let mut c = load(&config)?;
            if let Some(dir) = output {
                c.output_dir = dir;
            }
            init_workers()?;
            let outcome = runner::run(&c).map_err(|e: Error| (runner::exit_code(&e), e.to_string()))?;
            for check in &outcome.report.checks {
                println!(
                    "{} {} measured={:e} tolerance={:e}",
                    if check.pass { "PASS" } else { "FAIL" },
                    check.name,
                    check.measured,
                    check.tolerance
                );
            }
            for t in &outcome.report.timings {
                println!(
                    "{} runtime {} {:.3}s{}",
                    if t.pass { "PASS" } else { "FAIL" },
                    t.name,
                    t.seconds,
                    t.limit.map(|l| format!(" (limit {l}s)")).unwrap_or_default()
                );
            }
            println!("wrote {} files to {}", outcome.files.len(), c.output_dir.display());
            Ok(outcome.exit_code())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code as u8)
        }
    }
}
