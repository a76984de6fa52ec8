//! Batch driver behind the `cstlab` binary.
//!
//! Exit codes: 0 on success, 1 when `verify` finds a failing check, 2 on any error.

pub mod commands;
pub mod config;
pub mod report;
pub mod suites;

pub use commands::{cmd_kernel, cmd_table, cmd_transform, cmd_verify};
pub use config::{RunConfig, Suite, Tolerances};
pub use report::{Check, Report};

use crate::error::{CstError, Result};
use clap::{Parser, Subcommand};
use std::path::PathBuf;

/// Environment variable capping the worker threads.
pub const THREADS_ENV: &str = "CSTLAB_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "cstlab",
    version,
    about = "Coherent-state transform and quantum connection verifier"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the configured suites and write report.json.
    Verify {
        #[arg(short, long)]
        config: PathBuf,
    },
    /// Write one convergence CSV per configured suite.
    Table {
        #[arg(short, long)]
        config: PathBuf,
    },
    /// Apply the transform to a coefficient vector.
    Transform {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long)]
        hbar: f64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Tabulate the heat kernel and the measure density.
    Kernel {
        #[arg(short, long)]
        config: PathBuf,
        #[arg(long)]
        hbar: f64,
        #[arg(short, long)]
        output: PathBuf,
    },
}

/// Sizes the global thread pool from `CSTLAB_THREADS` when set.
pub fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CstError::Config(format!("{THREADS_ENV} must be a positive integer, got {raw:?}")))?;
    // A pool built earlier in the process keeps its size.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Executes a parsed command and returns the process exit code.
pub fn execute(cli: Cli) -> Result<i32> {
    configure_threads()?;
    let stdout = std::io::stdout();
    match cli.command {
        Command::Verify { config } => {
            let cfg = RunConfig::load(&config)?;
            let report = cmd_verify(&cfg, stdout.lock())?;
            Ok(if report.passed { 0 } else { 1 })
        }
        Command::Table { config } => {
            let cfg = RunConfig::load(&config)?;
            cmd_table(&cfg, stdout.lock())?;
            Ok(0)
        }
        Command::Transform {
            config,
            input,
            hbar,
            output,
        } => {
            let cfg = RunConfig::load(&config)?;
            cmd_transform(&cfg, &input, hbar, &output)?;
            Ok(0)
        }
        Command::Kernel { config, hbar, output } => {
            let cfg = RunConfig::load(&config)?;
            cmd_kernel(&cfg, hbar, &output)?;
            Ok(0)
        }
    }
}

/// Parses the process arguments and runs; errors go to stderr with exit code 2.
pub fn main_entry() -> i32 {
    match execute(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("cstlab: {e}");
            2
        }
    }
}
