//! File formats and subcommands of the `spinpath` command-line tool.
//!
//! The binary is a thin wrapper around [`run`]: it parses [`Cli`], applies
//! flag overrides to the [`RunConfig`], dispatches to one of the `cmd_*`
//! functions in [`commands`] and prints the returned text.

pub mod angle;
pub mod commands;
pub mod config;
pub mod csv;
pub mod error;
pub mod report;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use angle::Angle;
pub use commands::{CommandOutput, Format};
pub use config::RunConfig;
pub use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "spinpath", version, about = "Spin-path entanglement Bell test simulator")]
pub struct Cli {
    /// Key-value configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Master seed (overrides the config).
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,
    /// Output directory (overrides the config).
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Index of the negated CHSH term.
    #[arg(long, global = true, value_parser = clap::value_parser!(u8).range(0..=3))]
    pub sign_convention: Option<u8>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write one scan CSV per spin rotation and a manifest.
    Simulate,
    /// Fit scan CSV files to sinusoids.
    Fit {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Evaluate S' from a fit report.
    Chsh { report: PathBuf },
    /// Sweep the contrast through the classical threshold.
    Threshold,
    /// Enumerate deterministic noncontextual strategies.
    Lhv,
    /// Full pipeline at the reference apparatus.
    Reproduce,
}

impl Cli {
    /// Config file (or defaults) with command-line overrides applied.
    pub fn resolve_config(&self) -> CliResult<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(out) = &self.out {
            cfg.out = out.clone();
        }
        if let Some(c) = self.sign_convention {
            cfg.sign_convention = c;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn run(cli: &Cli) -> CliResult<CommandOutput> {
    let cfg = cli.resolve_config()?;
    let json = cli.format.unwrap_or(Format::Json);
    match &cli.command {
        Command::Simulate => commands::cmd_simulate(&cfg, json),
        Command::Fit { files } => commands::cmd_fit(files, json),
        Command::Chsh { report } => commands::cmd_chsh(&cfg, report, json),
        Command::Threshold => commands::cmd_threshold(&cfg, cli.format.unwrap_or(Format::Csv)),
        Command::Lhv => commands::cmd_lhv(&cfg, json),
        Command::Reproduce => commands::cmd_reproduce(&cfg, json),
    }
}
