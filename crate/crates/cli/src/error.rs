use std::fmt;

use sle_core::Error;

/// Failure of a subcommand, carrying its exit code.
#[derive(Debug)]
pub enum CliError {
    /// Unreadable or malformed configuration (exit 1).
    Config(String),
    /// Out-of-range parameter (exit 2).
    Validation(String),
    /// A checked numeric property failed (exit 3).
    Breach(String),
    Core(Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Validation(_) => 2,
            CliError::Breach(_) => 3,
            CliError::Core(e) if e.is_numeric() => 3,
            CliError::Core(Error::Io(_) | Error::Json(_) | Error::Csv(_) | Error::Parse(_)) => 1,
            CliError::Core(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) | CliError::Validation(m) | CliError::Breach(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}
