//! Configuration, CSV/SVG output and subcommand drivers for the `compass`
//! binary.

use std::path::PathBuf;

use thiserror::Error;

pub mod commands;
pub mod config;
pub mod csv;
pub mod plot;

pub use config::{load_config, parse_config, Config, ConfigDocument, NegativityRun};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },

    #[error("invalid config value `{key}`: {reason}")]
    Invalid { key: String, reason: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] compass_core::CompassError),

    #[error("nothing to plot: {0}")]
    EmptyPlot(String),

    #[error("malformed CSV at line {line}: {reason}")]
    Csv { line: usize, reason: String },
}

pub type Result<T> = std::result::Result<T, CliError>;
