use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid span [{start}, {end})")]
    InvalidSpan { start: usize, end: usize },

    #[error("invalid event: {0}")]
    InvalidEvent(String),

    #[error("invalid ontology: {0}")]
    Ontology(String),

    #[error("unknown event type `{0}`")]
    UnknownEventType(String),

    #[error("unknown label `{0}`")]
    UnknownLabel(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("tokenizer failed on sentence {sentence}: {message}")]
    Tokenizer { sentence: usize, message: String },

    #[error("anchor span [{start}, {end}) does not fall on token boundaries")]
    UnalignedAnchor { start: usize, end: usize },

    #[error("score matrix has {got} rows but {expected} tokens")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("zero-norm embedding for {side} token {index} (`{token}`)")]
    ZeroNorm {
        side: &'static str,
        index: usize,
        token: String,
    },

    #[error("embedding dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid graph: {0}")]
    Graph(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("containment cycle through `{0}`")]
    GazetteerCycle(String),

    #[error("invalid query: {0}")]
    InvalidQuery(String),

    #[error("document mismatch: {0}")]
    DocumentMismatch(String),

    #[error("unknown selection key `{0}`")]
    UnknownSelection(String),

    #[error("provider `{provider}` failed: {message}")]
    Provider { provider: String, message: String },

    #[error("unsupported language `{0}`")]
    UnsupportedLanguage(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<String>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    pub(crate) fn provider(provider: &str, message: impl Into<String>) -> Self {
        Error::Provider {
            provider: provider.to_string(),
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
