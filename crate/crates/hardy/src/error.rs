use std::io;

/// Failures of the command-line layer. Library errors keep their tag so
/// scripts can match on the violated constraint.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{tag}: {source}", tag = source.tag())]
    Core {
        #[from]
        source: hardy_core::Error,
    },
    #[error("usage: {0}")]
    Usage(String),
    #[error("malformed profile JSON: {0}")]
    ProfileJson(String),
    #[error("io: {0}")]
    Io(#[from] io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type CliResult<T> = Result<T, CliError>;

/// Process exit status for each outcome.
pub mod exit {
    pub const OK: i32 = 0;
    pub const VERIFICATION_FAILED: i32 = 1;
    pub const USAGE: i32 = 2;
}

impl CliError {
    /// Every error is a usage or validation failure; verification failures
    /// are ordinary results with their own status.
    pub fn exit_code(&self) -> i32 {
        exit::USAGE
    }
}
