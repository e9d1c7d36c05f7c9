use thiserror::Error;

/// Failure of a harness command, mapped onto the process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad config, suite, annotations or results; exit code 2.
    #[error("{0}")]
    Validation(String),
    /// Backend unreachable or failing mid-run; exit code 3.
    #[error("{0}")]
    Backend(String),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Backend(_) => 3,
            CliError::Io { .. } => 1,
        }
    }

    pub fn io(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> CliError {
        let context = context.into();
        move |source| CliError::Io { context, source }
    }
}

pub fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}
