//! Command-line driver: config parsing, scenario dispatch, analytic
//! calculators and CSV output.

pub mod app;
pub mod config;
pub mod output;
pub mod selftest;

use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

pub use app::run;
pub use config::{config_hash, parse_config, parse_units, ParseError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(#[from] ParseError),

    #[error("validation error: {0}")]
    Validation(#[from] gravclock::Error),

    #[error("no such file: {}", .0.display())]
    MissingFile(PathBuf),

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
}

impl CliError {
    pub fn io(path: &Path, source: io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// 1 for bad input, 2 for I/O failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } => 2,
            _ => 1,
        }
    }
}

/// Reads a text input, distinguishing a missing file from other I/O failures.
pub fn read_input(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => CliError::MissingFile(path.to_path_buf()),
        _ => CliError::io(path, e),
    })
}
