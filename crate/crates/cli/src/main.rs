//! `gkrs`: build soliton profile sets from JSON configurations, verify them
//! and write curvature, positivity and volume reports.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails, 2 when the
//! configuration or an input file is unusable.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod error;
mod output;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gkrs::config::RunConfig;

use crate::commands::Context;
use crate::error::CliError;

#[derive(Parser, Debug)]
#[command(
    name = "gkrs",
    version,
    about = "Build toric steady soliton metrics and check their curvature and growth"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; defaults to the configured one, then `out`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; defaults to the number of logical cores.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Random seed for sampled checks.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Tolerance override `KEY=VAL`; repeatable.
    #[arg(long = "tol-override", global = true)]
    tol_override: Vec<String>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Build the profile set and check admissibility.
    Build,
    /// Verify a built profile set.
    Verify,
    /// Finite-difference curvature at sampled points.
    Curvature,
    /// Positivity scan of the two-dimensional Cao family.
    Scan,
    /// Volume growth, distance and Killing-field growth.
    Volume,
    /// Run every step and collect the summaries.
    Report,
}

fn context(cli: &Cli) -> Result<Context, CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config is required".into()))?;
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(path.display().to_string(), e.to_string()))?;
    let mut cfg = RunConfig::from_json(&text).map_err(|e| CliError::Config(e.to_string()))?;
    for entry in &cli.tol_override {
        cfg.tolerances
            .apply_override(entry)
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let out = cli
        .out
        .clone()
        .or_else(|| cfg.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&out).map_err(|e| CliError::Io(out.display().to_string(), e.to_string()))?;
    Ok(Context { cfg, out })
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    if let Some(n) = cli.workers {
        if n == 0 {
            return Err(CliError::Config("--workers must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    let ctx = context(cli)?;
    let outcome = match cli.command {
        Command::Build => commands::build(&ctx)?,
        Command::Verify => commands::verify(&ctx)?,
        Command::Curvature => commands::curvature(&ctx)?,
        Command::Scan => commands::scan(&ctx)?,
        Command::Volume => commands::volume(&ctx)?,
        Command::Report => commands::report(&ctx)?,
    };
    println!(
        "{}: {} ({})",
        outcome.step,
        if outcome.pass { "pass" } else { "FAIL" },
        outcome.summary.display()
    );
    Ok(outcome.pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("gkrs: {e}");
            e.exit_code()
        }
    }
}
