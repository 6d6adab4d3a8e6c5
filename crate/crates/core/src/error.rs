use thiserror::Error;

/// Errors surfaced by the library.
///
/// Per-record ingestion problems and sub-threshold statistics are *not*
/// errors; they are reported alongside results so a noisy corpus never
/// aborts a run. Errors here are contract violations or I/O failures.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{0}")]
    EmptyInput(String),

    #[error(
        "expected exactly two labels, found {found:?}; the classification task is binary"
    )]
    NotBinary { found: Vec<String> },

    #[error("duplicate document id {0:?}")]
    DuplicateId(String),

    #[error("author {0:?} is not covered by the cross-validation plan")]
    UnknownAuthor(String),

    #[error("feature index {index} is outside the model vocabulary (size {vocab_size})")]
    FeatureOutOfRange { index: usize, vocab_size: usize },

    #[error("unknown document id {0:?}")]
    UnknownDocument(String),

    #[error("model file is malformed: {0}")]
    ModelFormat(String),

    #[error("configuration is invalid:\n{}", .0.join("\n"))]
    Config(Vec<String>),

    #[error("stage {stage} failed: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn empty(msg: impl Into<String>) -> Self {
        Error::EmptyInput(msg.into())
    }
}
