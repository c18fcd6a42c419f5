use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    BadInput { path: PathBuf, message: String },

    #[error("lexicon line {line}: {message}")]
    LexiconParse { line: usize, message: String },

    #[error("unknown lexicon category `{0}`")]
    UnknownCategory(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("user {user_id}: account created after reference time")]
    AccountInFuture { user_id: String },

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("input length {got} does not match model input width {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("training diverged at epoch {epoch}: loss is {loss}; lower the learning rate")]
    Diverged { epoch: usize, loss: f64 },

    #[error("incomplete beta continued fraction did not converge in {0} iterations")]
    NoConvergence(usize),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn bad_input(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::BadInput {
            path: path.into(),
            message: message.into(),
        }
    }
}
