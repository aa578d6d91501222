//! `elasto`: batch driver for solves, far fields, sweeps, the inequality
//! suite and shape distances.
//!
//! Exit status 0 on success, 2 for an invalid configuration, 3 for a
//! numerical failure. Errors are printed to stderr as one JSON line.

mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{ConfigError, RunConfig, SEED_ENV};

#[derive(Debug, Parser)]
#[command(name = "elasto", version, about = "Time-harmonic elastic scattering by rigid obstacles in the plane")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON config file, or any output file of a previous run.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override one config value, e.g. `--set medium.omega=3`.
    #[arg(long = "set", global = true, value_name = "PATH=VALUE")]
    sets: Vec<String>,
    /// Output directory (overrides `output`).
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Worker thread cap.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Solve one scattering problem and report the boundary residual.
    Solve,
    /// Write the far-field pattern.
    Farfield,
    /// Run the shape-stability sweep.
    Sweep,
    /// Run the inequality suite.
    Verify,
    /// Distances between `geometry.curve` and `geometry.other`.
    Distances,
}

pub enum Failure {
    Config(ConfigError),
    Numerical(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e)
    }
}

impl From<elasto_core::Error> for Failure {
    fn from(e: elasto_core::Error) -> Self {
        Failure::Numerical(e.to_string())
    }
}

fn load(cli: &Cli) -> Result<RunConfig, ConfigError> {
    let doc = match &cli.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| ConfigError::new("config", format!("{}: {e}", p.display())))?;
            Some(RunConfig::parse_document(&text)?)
        }
        None => None,
    };
    let mut sets = cli.sets.clone();
    if let Some(out) = &cli.output {
        sets.push(format!("output={}", serde_json::Value::String(out.display().to_string())));
    }
    RunConfig::load(doc, &sets, std::env::var(SEED_ENV).ok())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if t == 0 {
            return report(Failure::Config(ConfigError::new("threads", "must be positive")));
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            return report(Failure::Numerical(e.to_string()));
        }
    }
    let result = load(&cli).map_err(Failure::from).and_then(|cfg| run::run(cli.command, &cfg));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => report(f),
    }
}

fn report(f: Failure) -> ExitCode {
    let (kind, field, message, code) = match f {
        Failure::Config(c) => ("config", c.field, c.message, 2),
        Failure::Numerical(m) => ("numerical", String::new(), m, 3),
    };
    eprintln!("{}", serde_json::json!({ "error": kind, "field": field, "message": message }));
    ExitCode::from(code)
}
