//! `mplex`: simulate, fit, select, identify and predict from the command line.

mod commands;
mod config;
mod formats;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use config::RunConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("format: {0}")]
    Format(String),
    #[error("data: {0}")]
    Data(String),
    #[error("numerical abort: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Numerical(_) => 1,
            _ => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "mplex", version, about = "Layered generative model for multiplex networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// JSON config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. `--set seed=3 --set shape=[3,6,16]`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    mask: Option<PathBuf>,
}

impl Common {
    fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut sets = self.sets.clone();
        if let Some(seed) = self.seed {
            sets.push(format!("seed={seed}"));
        }
        for (key, path) in [("output", &self.output), ("data", &self.data), ("mask", &self.mask)] {
            if let Some(p) = path {
                sets.push(format!("{key}={}", serde_json::Value::String(p.display().to_string())));
            }
        }
        RunConfig::load(self.config.as_deref(), &sets)
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a dataset and its ground truth from a preset (`preset`, `samples`, `seed`).
    Simulate(Common),
    /// Run the sampler (`data`, `shape`, schedule keys, `seed`); writes a trace and a summary.
    Fit(Common),
    /// Fit every feasible shape in `grid` and rank them by WAIC.
    Select(Common),
    /// Identifiability report for the connection matrices or square matrix in `matrix`.
    Identify(Common),
    /// Posterior probabilities of masked edges from a trace (`trace`, `mask`, optional `data`).
    Predict(Common),
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("MPLEX_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("MPLEX_THREADS must be a count, got {raw:?}")))?;
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    match cli.command {
        Command::Simulate(c) => commands::simulate_cmd(&c.resolve()?),
        Command::Fit(c) => commands::fit_cmd(&c.resolve()?),
        Command::Select(c) => commands::select_cmd(&c.resolve()?),
        Command::Identify(c) => commands::identify_cmd(&c.resolve()?),
        Command::Predict(c) => commands::predict_cmd(&c.resolve()?),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
