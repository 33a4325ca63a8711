use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("attribute vector violates the {class} constraint: popcount {popcount}")]
    AttributeViolation { class: &'static str, popcount: usize },

    #[error("unknown tactic name {0:?}")]
    UnknownTactic(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("input has no {0:?} column")]
    MissingColumn(&'static str),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("artifact version mismatch: expected {expected:?}, found {found:?}")]
    VersionMismatch { expected: String, found: String },

    #[error("feature space mismatch: model built for {expected}, got {found}")]
    FeatureSpaceMismatch { expected: String, found: String },

    #[error("transport error: {0}")]
    Transport(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("decode failed at step {step}: {source}")]
    Decode {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
