use dixtrace_core::Error;
use thiserror::Error as ThisError;

#[derive(Debug, ThisError)]
pub enum CliError {
    #[error("validation error: {0}")]
    Validation(String),

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("computation failed: {0}")]
    Compute(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Resource(_) => 3,
            CliError::Compute(_) | CliError::Io(_) => 1,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Resource { .. } => CliError::Resource(e.to_string()),
            Error::Decomposition(_) => CliError::Compute(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}
