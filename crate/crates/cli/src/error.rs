use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("assertion failed: {0}")]
    Assertion(String),
    #[error(transparent)]
    Core(#[from] lightning_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            // Core parameter checks are configuration problems too.
            CliError::Core(lightning_core::Error::InvalidParameter(_) | lightning_core::Error::Parse { .. }) => 2,
            _ => 1,
        }
    }
}
