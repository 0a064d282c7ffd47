use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("size limit exceeded: {what} needs {requested}, limit is {limit}")]
    SizeLimit {
        what: &'static str,
        requested: String,
        limit: String,
    },

    #[error("checkpoint {path} was written for a different configuration (hash {found}, expected {expected})")]
    ConfigMismatch {
        path: String,
        found: String,
        expected: String,
    },

    #[error("malformed checkpoint {path}: {reason}")]
    Checkpoint { path: String, reason: String },

    #[error("search interrupted after {completed} tuples")]
    Interrupted { completed: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Process exit code for this failure: 1 for bad input or configuration,
    /// 2 for refused work and internal failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_) | Error::ConfigMismatch { .. } | Error::Checkpoint { .. } => 1,
            _ => 2,
        }
    }
}
