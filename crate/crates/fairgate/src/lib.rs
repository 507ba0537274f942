//! File formats, data ingestion, and run manifests around `fairgate-core`.
//!
//! The binary target (`fairgate`) exposes the solver, the lambda sweep, the
//! dynamics simulator, stationary diagnostics, and the kernel generators as
//! subcommands; this library holds everything those commands share.

pub mod cli;
pub mod ingest;
pub mod io;
pub mod manifest;

use thiserror::Error;

/// Top-level failure, split by exit-code contract: validation failures exit
/// with 1, I/O failures with 2.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Io(_) => 2,
        }
    }

    pub fn validation(message: impl Into<String>) -> CliError {
        CliError::Validation(message.into())
    }

    pub fn io(message: impl Into<String>) -> CliError {
        CliError::Io(message.into())
    }
}

impl From<fairgate_core::population::PopulationError> for CliError {
    fn from(e: fairgate_core::population::PopulationError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<fairgate_core::dynamics::DynamicsError> for CliError {
    fn from(e: fairgate_core::dynamics::DynamicsError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<fairgate_core::penalty::PenaltyError> for CliError {
    fn from(e: fairgate_core::penalty::PenaltyError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<fairgate_core::genlab::GenError> for CliError {
    fn from(e: fairgate_core::genlab::GenError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<ingest::IngestError> for CliError {
    fn from(e: ingest::IngestError) -> Self {
        match &e {
            ingest::IngestError::Io(_) => CliError::Io(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}
