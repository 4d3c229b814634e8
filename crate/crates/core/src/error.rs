use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = BlmpError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum BlmpError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{}line {line}: {message}", path_prefix(.path))]
    Parse {
        path: Option<PathBuf>,
        line: usize,
        message: String,
    },

    #[error("instance too large for exhaustive enumeration: dim={dim} (maximum {max})")]
    InstanceTooLarge { dim: usize, max: usize },

    #[error("replay script exhausted or inconsistent at {at}: {message}")]
    Replay { at: String, message: String },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn path_prefix(path: &Option<PathBuf>) -> String {
    match path {
        Some(p) => format!("{}: ", p.display()),
        None => String::new(),
    }
}

impl BlmpError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        BlmpError::InvalidInput(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        BlmpError::Parse {
            path: None,
            line,
            message: msg.into(),
        }
    }

    pub(crate) fn with_path(self, path: &std::path::Path) -> Self {
        match self {
            BlmpError::Parse { line, message, .. } => BlmpError::Parse {
                path: Some(path.to_path_buf()),
                line,
                message,
            },
            other => other,
        }
    }

    /// True for errors caused by malformed or inconsistent data rather than
    /// by the caller's usage.
    pub fn is_data_error(&self) -> bool {
        !matches!(self, BlmpError::Invariant(_))
    }
}
