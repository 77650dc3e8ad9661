use thiserror::Error;

/// Failures of a CLI run, each mapped to an exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{context}: {source}")]
    Compute {
        context: String,
        #[source]
        source: obw_core::Error,
    },
    #[error("{0}")]
    Io(String),
    /// Verification ran but found failures; the report was already written.
    #[error("verification failed")]
    VerifyFailed,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Compute { .. } | CliError::Io(_) | CliError::VerifyFailed => 1,
        }
    }

    pub fn compute(context: impl Into<String>) -> impl FnOnce(obw_core::Error) -> CliError {
        let context = context.into();
        move |source| CliError::Compute { context, source }
    }
}
