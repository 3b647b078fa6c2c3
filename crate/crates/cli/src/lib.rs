//! Command-line front end for `bruhat-core`: decompose a matrix file, verify
//! a factors document against a matrix, and run the minors oracles.

pub mod commands;
pub mod document;
pub mod matrix_file;

pub use commands::{run, Cli, Command, Outcome, Status};
pub use document::{Diagonal, FactorsDocument, Method};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot read {0}: {1}")]
    Io(String, std::io::Error),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0:?}")]
    Core(#[from] bruhat_core::Error),
    #[error("verification failed: {0}")]
    Invalid(String),
}

impl CliError {
    pub fn status(&self) -> Status {
        use bruhat_core::Error as E;
        match self {
            CliError::Io(..) | CliError::Parse(_) | CliError::Json(_) => Status::ParseError,
            CliError::Invalid(_) => Status::VerifyFailed,
            CliError::Core(E::ZeroPivotMinor(_)) => Status::ZeroPivot,
            CliError::Core(E::DimensionMismatch(_) | E::IndexOutOfRange(_) | E::InvalidSize(_)) => {
                Status::ParseError
            }
            CliError::Core(_) => Status::VerifyFailed,
        }
    }
}
