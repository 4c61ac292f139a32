use thiserror::Error;

/// Errors raised anywhere in the pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A `<doc>` block was opened but never closed.
    #[error("unterminated <doc> block starting at byte offset {offset}")]
    UnterminatedDoc { offset: usize },

    #[error("invalid country label {0:?}: expected lowercase ASCII letters")]
    InvalidLabel(String),

    #[error("subcorpus {tld} is empty")]
    EmptySubcorpus { tld: String },

    #[error("ARFF error at line {line}: {message}")]
    Arff { line: usize, message: String },

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("attribute selection at threshold {threshold} removed every attribute; try a lower threshold")]
    EmptySelection { threshold: f64 },

    #[error("dimension mismatch: model expects {expected} attributes, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("wrong model type: expected {expected}, found {found}")]
    WrongModel {
        expected: &'static str,
        found: &'static str,
    },

    #[error("model format error: {0}")]
    ModelFormat(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn arff(line: usize, message: impl Into<String>) -> Self {
        Error::Arff {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn dataset(message: impl Into<String>) -> Self {
        Error::InvalidDataset(message.into())
    }

    pub(crate) fn config(message: impl Into<String>) -> Self {
        Error::InvalidConfig(message.into())
    }
}
