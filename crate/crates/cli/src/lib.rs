//! Configuration, commands and output formats of the `basinctl` tool.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::PathBuf;

pub use commands::{execute, Command};
pub use config::{Experiment, ExperimentConfig, Format};
pub use error::CliError;
pub use output::Report;

/// Command-line options shared by every subcommand.
#[derive(Debug, Clone, Default)]
pub struct Options {
    pub config: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub seed: Option<u64>,
}

/// Loads the configuration, runs `command` and writes its report.
pub fn run(command: Command, opts: &Options) -> Result<(), CliError> {
    let (report, output) = match &opts.config {
        Some(path) => {
            let mut cfg = ExperimentConfig::from_path(path)?;
            if let Some(seed) = opts.seed {
                cfg.override_seed(seed);
            }
            let exp = cfg.resolve()?;
            (execute(command, &exp)?, cfg.output)
        }
        None if command == Command::Boolean => {
            (commands::boolean_report(), config::OutputBlock::default())
        }
        None => return Err(CliError::Config("--config is required".into())),
    };
    let format = opts.format.unwrap_or(output.format);
    let path = opts.out.as_deref().or(output.path.as_deref());
    report.write(format, path)
}
