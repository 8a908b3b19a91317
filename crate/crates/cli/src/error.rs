use atomradio::error::ErrorClass;
use thiserror::Error;

pub type CliResult<T> = Result<T, CliError>;

/// Process exit codes. Usage errors exit with clap's code 2.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    /// Selftest ran and at least one check failed.
    pub const CHECK_FAILED: i32 = 1;
    pub const CONFIG: i32 = 3;
    /// A physical or signal precondition was violated (overmodulation,
    /// aliasing, degenerate steady state, ...).
    pub const PRECONDITION: i32 = 4;
    /// A solver failed or its result failed a post-check.
    pub const NUMERICAL: i32 = 5;
    pub const IO: i32 = 6;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] atomradio::Error),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{0} selftest check(s) failed")]
    ChecksFailed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => exit::CONFIG,
            CliError::Core(e) => match e.class() {
                ErrorClass::Precondition => exit::PRECONDITION,
                ErrorClass::Numerical => exit::NUMERICAL,
                ErrorClass::Io => exit::IO,
            },
            CliError::Io { .. } => exit::IO,
            CliError::ChecksFailed(_) => exit::CHECK_FAILED,
        }
    }
}
