use std::path::PathBuf;

use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("config: {0}")]
    Config(String),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Model(#[from] spinpath::Error),
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

/// Machine-readable form written to stderr on failure.
#[derive(Debug, Serialize)]
pub struct ErrorReport {
    pub error: ErrorBody,
}

#[derive(Debug, Serialize)]
pub struct ErrorBody {
    pub kind: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        CliError::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Io { .. } => "io",
            CliError::Parse { .. } => "parse",
            CliError::Config(_) => "config",
            CliError::Usage(_) => "usage",
            CliError::Json { .. } => "json",
            CliError::Model(e) => match e {
                spinpath::Error::Domain(_) => "domain",
                spinpath::Error::Precondition(_) => "precondition",
                spinpath::Error::InsufficientData { .. } => "insufficient_data",
                spinpath::Error::SingularFit => "singular_fit",
                spinpath::Error::DivisionByZero => "division_by_zero",
            },
        }
    }

    pub fn report(&self) -> ErrorReport {
        let (path, line) = match self {
            CliError::Io { path, .. } | CliError::Json { path, .. } => (Some(path.display().to_string()), None),
            CliError::Parse { path, line, .. } => (Some(path.display().to_string()), Some(*line)),
            _ => (None, None),
        };
        ErrorReport {
            error: ErrorBody {
                kind: self.kind(),
                message: self.to_string(),
                path,
                line,
            },
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
