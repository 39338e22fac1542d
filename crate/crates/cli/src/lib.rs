//! Commands behind the `vessel` binary.

pub mod commands;
pub mod config;

use std::fmt;

/// Failure classes with their process exit codes.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Exit 1: at least one verification check failed.
    Verification(Vec<String>),
    /// Exit 2: bad flags, config or input files.
    Usage(String),
    /// Exit 3: a numerical step failed.
    Numeric { check: String, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Numeric { .. } => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Verification(names) => write!(f, "verification failed: {}", names.join(", ")),
            CliError::Usage(m) => f.write_str(m),
            CliError::Numeric { check, message } => write!(f, "numeric failure in {check}: {message}"),
        }
    }
}

impl std::error::Error for CliError {}
