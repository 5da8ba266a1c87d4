use std::path::PathBuf;

use convexcyclic_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid `{field}`: {message}")]
    Config { field: String, message: String },
    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: CoreError,
    },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("writing JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("writing CSV: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    /// 0 success, 1 IO, 2 config, 3 numerical, 4 oracle miss.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Core { source, .. } => match source {
                CoreError::OracleMiss { .. } => 4,
                CoreError::NumericalOverflow { .. }
                | CoreError::EigensolverFailure { .. }
                | CoreError::WitnessVerification { .. }
                | CoreError::NoExponentFound { .. } => 3,
                _ => 2,
            },
            CliError::Io { .. } | CliError::Json(_) | CliError::Csv(_) => 1,
        }
    }
}

/// Attaches a context string to core errors.
pub(crate) trait Context<T> {
    fn context(self, context: &str) -> Result<T, CliError>;
}

impl<T> Context<T> for Result<T, CoreError> {
    fn context(self, context: &str) -> Result<T, CliError> {
        self.map_err(|source| CliError::Core {
            context: context.to_owned(),
            source,
        })
    }
}
