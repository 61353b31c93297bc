//! Command-line front end: configuration, batch commands and report output.

pub mod commands;
pub mod config;
pub mod output;
pub mod report;

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

pub use commands::{Context, Exit, Outcome};
pub use config::{ConfigError, RunConfig};
pub use report::{CheckRow, RunReport};

/// Exit code for configuration and usage errors.
pub const EXIT_USAGE: u8 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] singlepeak_core::Error),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv output: {0}")]
    Csv(String),
    #[error("report serialization: {0}")]
    Json(#[from] serde_json::Error),
    #[error("cannot configure threads: {0}")]
    Threads(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Threads(_) => EXIT_USAGE,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "singlepeak", version, about = "Single-peak solutions of the critical magnetic Schrodinger equation")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// TOML configuration; built-in defaults when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory, overriding `output` in the configuration.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Worker threads; all cores when omitted.
    #[arg(long, global = true, value_name = "K")]
    pub threads: Option<usize>,
    /// Continue when the potential checks fail.
    #[arg(long, global = true)]
    pub force: bool,
    /// Seed overriding `seed` in the configuration.
    #[arg(long, global = true, value_name = "INT")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Check the integrability and decay assumptions on A and V.
    CheckPotentials,
    /// Tabulate the reduced function on the configured slice.
    Scan,
    /// Boundary decay, small-scale limits and correction bounds.
    Asymptotics,
    /// Find critical points and assemble approximate solutions.
    Solve,
    /// Run the invariant suite.
    Verify,
}

fn context(g: &GlobalArgs) -> Result<Context, CliError> {
    let mut config = match &g.config {
        Some(p) => RunConfig::from_path(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = g.seed {
        config.seed = s;
    }
    Ok(Context::new(config, g.config.as_deref(), g.out.clone(), g.force)?)
}

/// Runs one command and returns the process exit code.
pub fn run(cli: &Cli) -> u8 {
    let start = Instant::now();
    let result = (|| -> Result<(Outcome, PathBuf), CliError> {
        if let Some(k) = cli.global.threads {
            rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build_global()
                .map_err(|e| CliError::Threads(e.to_string()))?;
        }
        let ctx = context(&cli.global)?;
        let outcome = commands::run_command(cli.command, &ctx)?;
        let path = commands::write_report(&ctx, &outcome.report)?;
        Ok((outcome, path))
    })();
    match result {
        Ok((outcome, path)) => {
            print!("{}", outcome.report.table());
            println!("report: {}", path.display());
            eprintln!("elapsed {:.2} s", start.elapsed().as_secs_f64());
            outcome.exit.code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
