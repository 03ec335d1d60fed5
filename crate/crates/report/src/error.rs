use std::path::PathBuf;

use thiserror::Error;
use timelab_core::LabError;

pub type Result<T> = std::result::Result<T, ReportError>;

#[derive(Debug, Error)]
pub enum ReportError {
    /// The scenario file is malformed or a parameter is out of range.
    #[error("config error in `{field}`: {reason}")]
    Config { field: String, reason: String },

    /// A numerical module rejected the run.
    #[error("scenario `{scenario}` failed: {source}")]
    Lab {
        scenario: String,
        #[source]
        source: LabError,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl ReportError {
    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        ReportError::Config { field: field.into(), reason: reason.into() }
    }

    pub fn is_config(&self) -> bool {
        matches!(self, ReportError::Config { .. })
    }

    /// Process exit code: 2 for configuration problems, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.is_config() {
            2
        } else {
            1
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        ReportError::Io { path: path.into(), source }
    }

    /// Converts a serde_json parse failure, naming the offending field when
    /// the message carries one.
    pub(crate) fn from_json(err: &serde_json::Error) -> Self {
        let message = err.to_string();
        let field = if message.starts_with("unknown variant") || message.contains("missing field `kind`") {
            "kind".to_string()
        } else {
            message
                .split('`')
                .nth(1)
                .filter(|s| !s.is_empty())
                .unwrap_or("document")
                .to_string()
        };
        ReportError::Config { field, reason: message }
    }
}

/// Attaches the scenario id to a module error.
pub(crate) trait Context<T> {
    fn ctx(self, scenario: &str) -> Result<T>;
}

impl<T> Context<T> for std::result::Result<T, LabError> {
    fn ctx(self, scenario: &str) -> Result<T> {
        self.map_err(|source| ReportError::Lab { scenario: scenario.to_string(), source })
    }
}
