//! Configuration files, CSV tables and verification reports.

mod compare;
mod config;
mod ingest;
mod sweep;
mod verify;

use std::path::PathBuf;

pub use compare::{run_comparison, write_comparison, COMPARE_COLUMNS};
pub use config::{
    parse_config, BeamSection, FilmSection, OracleSection, OutputSection, RelationMode, RunConfig,
    SweepSection,
};
pub use ingest::{
    ingest_experiment, ingest_experiment_str, read_sweep_wavelengths, residual_rows,
    write_residuals, ExperimentRecord, ResidualRow,
};
pub use sweep::{format_number, run_sweep, write_sweep, SWEEP_COLUMNS};
pub use verify::{
    grid_cases, run_verification, CheckResult, GridKind, VerificationReport, VerifyOptions,
    COARSE_Q, FULL_Q, VERIFY_ANGLES_DEG,
};

/// Exit status for a successful run.
pub const EXIT_OK: i32 = 0;
/// Exit status for invalid input.
pub const EXIT_VALIDATION: i32 = 1;
/// Exit status when a verification check fails.
pub const EXIT_VERIFICATION: i32 = 2;
/// Exit status for file-system and I/O failures.
pub const EXIT_IO: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    /// Invalid configuration; the message starts with the field path.
    #[error("config: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed or invalid data records, one message per offending line.
    #[error("{}: {}", path, messages.join("; "))]
    Records { path: String, messages: Vec<String> },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Model(#[from] crate::Error),
}

impl IoError {
    pub fn exit_code(&self) -> i32 {
        match self {
            IoError::Config(_) | IoError::Records { .. } => EXIT_VALIDATION,
            IoError::File { .. } => EXIT_IO,
            IoError::Csv(e) if e.is_io_error() => EXIT_IO,
            IoError::Csv(_) => EXIT_VALIDATION,
            IoError::Model(crate::Error::Verification(_)) => EXIT_VERIFICATION,
            IoError::Model(_) => EXIT_VALIDATION,
        }
    }

    pub fn file(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        IoError::File {
            path: path.into(),
            source,
        }
    }
}

pub type IoResult<T> = std::result::Result<T, IoError>;

/// Read a whole file, attaching the path to any failure.
pub fn read_text(path: &std::path::Path) -> IoResult<String> {
    std::fs::read_to_string(path).map_err(|e| IoError::file(path, e))
}
