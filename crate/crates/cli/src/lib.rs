//! Batch front end: one structured config per invocation, CSV outputs and
//! a run manifest in the output directory.

pub mod commands;
pub mod config;
pub mod output;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use thiserror::Error;

/// Exit code for a checked property that failed.
pub const EXIT_CHECK_FAILED: i32 = 1;
/// Exit code for usage, config and I/O errors.
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn config(msg: impl std::fmt::Display) -> Self {
        Self::Config(msg.to_string())
    }

    pub fn io(path: impl AsRef<Path>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.as_ref().to_path_buf(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        EXIT_USAGE
    }
}

/// Result of a command that ran to completion.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    /// 0 on success, [`EXIT_CHECK_FAILED`] when a checked property failed.
    pub code: i32,
    pub summary: String,
    /// Files written, relative to the output directory.
    pub files: Vec<String>,
}

#[derive(Debug, Parser)]
#[command(name = "subgeo", version, about = "Subgeometric drift, rate and convergence diagnostics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, clap::Args)]
pub struct CommonArgs {
    /// TOML config file.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate r_phi(n).
    Rate(CommonArgs),
    /// Check a drift certificate and optional moment checks.
    Verify(CommonArgs),
    /// Exact TV curve and rate diagnostic on a finite kernel.
    Tv(CommonArgs),
    /// Rate/norm trade-off table for a list of Young pairs.
    Tradeoff(CommonArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Rate(_) => "rate",
            Self::Verify(_) => "verify",
            Self::Tv(_) => "tv",
            Self::Tradeoff(_) => "tradeoff",
        }
    }

    pub fn args(&self) -> &CommonArgs {
        match self {
            Self::Rate(a) | Self::Verify(a) | Self::Tv(a) | Self::Tradeoff(a) => a,
        }
    }
}

/// Runs one command and writes its outputs plus `manifest.json`.
pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let args = cli.command.args();
    let text = std::fs::read_to_string(&args.config).map_err(|e| CliError::io(&args.config, e))?;
    let base = args.config.parent().map(Path::to_path_buf).unwrap_or_default();
    let ctx = output::RunContext::new(&args.out, base)?;
    let (outcome, seed) = match &cli.command {
        Command::Rate(_) => (commands::cmd_rate(&config::parse(&text)?, &ctx)?, None),
        Command::Verify(_) => {
            let cfg: config::VerifyConfig = config::parse(&text)?;
            let seed = args.seed.or(cfg.seed).unwrap_or(config::DEFAULT_SEED);
            (commands::cmd_verify(&cfg, seed, &ctx)?, Some(seed))
        }
        Command::Tv(_) => (commands::cmd_tv(&config::parse(&text)?, &ctx)?, None),
        Command::Tradeoff(_) => (commands::cmd_tradeoff(&config::parse(&text)?, &ctx)?, None),
    };
    let manifest = output::Manifest {
        command: cli.command.name().into(),
        config_path: args.config.display().to_string(),
        config: text,
        seed,
        version: env!("CARGO_PKG_VERSION").into(),
        outputs: outcome.files.clone(),
        exit_code: outcome.code,
    };
    ctx.write("manifest.json", manifest.to_json().as_bytes())?;
    Ok(outcome)
}

/// Parses `argv`, runs, prints, and returns the process exit code.
pub fn main_with_args<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    match run(&cli) {
        Ok(o) => {
            println!("{}", o.summary);
            o.code
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
