use std::io;

use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 1;
    pub const GATE: i32 = 2;
    pub const UNSATISFIABLE: i32 = 3;
    pub const NUMERIC: i32 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] wks_core::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{path}: {source}")]
    Csv { path: String, source: csv::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use wks_core::Error as E;
        match self {
            CliError::Core(E::Gate { .. }) => exit::GATE,
            CliError::Core(E::Unsatisfiable { .. }) => exit::UNSATISFIABLE,
            CliError::Core(E::Numeric(_) | E::Divergence(_) | E::Resolution(_)) => exit::NUMERIC,
            _ => exit::USAGE,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

macro_rules! usage {
    ($($arg:tt)*) => {
        $crate::error::CliError::Usage(format!($($arg)*))
    };
}
pub(crate) use usage;
