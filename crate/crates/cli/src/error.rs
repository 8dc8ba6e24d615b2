use thiserror::Error;
use vortexlab::VortexError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),

    #[error("numerical failure: {0}")]
    Numerical(VortexError),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("verification failed: {0}")]
    VerifyFailed(String),
}

impl From<VortexError> for CliError {
    fn from(e: VortexError) -> Self {
        match e {
            // Out-of-range parameters are configuration mistakes.
            VortexError::Domain(msg) => CliError::Usage(msg),
            other => CliError::Numerical(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numerical(_) | CliError::Io(_) => 3,
            CliError::VerifyFailed(_) => 1,
        }
    }
}
