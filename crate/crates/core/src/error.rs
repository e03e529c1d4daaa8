use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },

    #[error("unterminated comment starting at {line}:{col}")]
    UnterminatedComment { line: usize, col: usize },

    #[error("{}: {source}", path.display())]
    InFile {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },

    #[error("node has no parent")]
    NoParent,

    #[error("token {0} has no previous token")]
    NoPreviousToken(usize),

    #[error("feature vectors differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),

    #[error("corpus is empty")]
    EmptyCorpus,

    #[error("corpus too small: need at least {needed} documents, got {got}")]
    CorpusTooSmall { needed: usize, got: usize },

    #[error("model has no exemplars")]
    EmptyModel,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("corrupt model file: {0}")]
    CorruptModel(String),

    #[error("model format version {found} is not supported (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },

    #[error("model vocabulary mismatch: model was trained with {model}, provider is {provider}")]
    VocabularyMismatch { model: String, provider: String },

    #[error("grammar variants disagree on {document}: {detail}")]
    LanguageMismatch { document: String, detail: String },

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub fn in_file(self, path: impl Into<PathBuf>) -> Error {
        Error::InFile {
            path: path.into(),
            source: Box::new(self),
        }
    }

    /// True for errors caused by the input data rather than by usage.
    pub fn is_data_error(&self) -> bool {
        match self {
            Error::InFile { source, .. } => source.is_data_error(),
            Error::InvalidParameter(_) | Error::CorpusTooSmall { .. } | Error::EmptyCorpus => false,
            _ => true,
        }
    }
}
