use std::process::ExitCode;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration conflict: {0}")]
    Conflict(String),

    #[error("missing input: {0}")]
    MissingInput(String),

    #[error("I/O error: {0}")]
    Io(String),

    #[error("numerical failure: {0}")]
    Numerical(bcs_core::error::Error),

    #[error("malformed configuration: {0}")]
    Malformed(String),

    #[error("{failed} of {total} verification checks failed")]
    VerificationFailed { failed: usize, total: usize },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Conflict(_) => 2,
            CliError::MissingInput(_) => 3,
            CliError::Io(_) => 4,
            CliError::Numerical(_) | CliError::VerificationFailed { .. } => 5,
            CliError::Malformed(_) => 6,
        }
    }
}

impl From<CliError> for ExitCode {
    fn from(e: CliError) -> Self {
        ExitCode::from(e.exit_code())
    }
}

impl From<bcs_core::error::Error> for CliError {
    fn from(e: bcs_core::error::Error) -> Self {
        use bcs_core::error::Error as E;
        match e {
            E::Io(msg) => CliError::Io(msg),
            E::InvalidPotential(msg) => CliError::Malformed(msg),
            other => CliError::Numerical(other),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
