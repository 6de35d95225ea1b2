use std::path::PathBuf;

/// Errors produced across the crate.
///
/// The CLI maps every variant onto one of two exit codes: input/schema
/// problems exit with 2 and backend problems exit with 3.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("unknown label '{0}'")]
    UnknownLabel(String),

    #[error("invalid label distribution ({e}, {n}, {c}): {reason}")]
    InvalidDistribution {
        e: f64,
        n: f64,
        c: f64,
        reason: &'static str,
    },

    #[error("invalid score triple: components must be finite and non-negative")]
    InvalidScores,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{0}: sequence must not be empty")]
    EmptySequence(&'static str),

    #[error("length mismatch: {gold} gold labels vs {pred} predictions")]
    LengthMismatch { gold: usize, pred: usize },

    #[error("duplicate document id '{0}'")]
    DuplicateId(String),

    #[error("cannot build an index over an empty corpus")]
    EmptyCorpus,

    #[error("classification failed on atom {index}: {source}")]
    AtomFailed {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("instance '{id}': {source}")]
    InstanceFailed {
        id: String,
        #[source]
        source: Box<Error>,
    },

    #[error("backend unavailable: {0}")]
    BackendUnavailable(String),

    #[error("backend error: {0}")]
    Backend(String),

    #[error("nothing left to extract from the generation")]
    EmptyExtraction,

    #[error("cannot compute statistics for an empty split")]
    EmptySplit,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}:{line}: {message}")]
    Record {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("unsupported index file version '{0}'")]
    IndexVersion(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True when the root cause is a model backend rather than the caller's input.
    pub fn is_backend(&self) -> bool {
        match self {
            Error::BackendUnavailable(_) | Error::Backend(_) => true,
            Error::AtomFailed { source, .. } | Error::InstanceFailed { source, .. } => {
                source.is_backend()
            }
            _ => false,
        }
    }

    pub(crate) fn in_instance(self, id: &str) -> Error {
        Error::InstanceFailed {
            id: id.to_string(),
            source: Box::new(self),
        }
    }
}
