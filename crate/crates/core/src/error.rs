use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input: wrong lengths, empty sets, undersized populations.
    #[error("structural error: {0}")]
    Structural(String),

    /// A caller broke a documented precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("evaluation error in {problem}: non-finite {kind} value at index {index}")]
    NonFinite {
        problem: String,
        kind: &'static str,
        index: usize,
    },

    #[error("unknown problem `{name}`; registered: {}", registered.join(", "))]
    UnknownProblem {
        name: String,
        registered: Vec<String>,
    },

    #[error("unsupported: {0}")]
    Capability(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("generation {generation}: {source}")]
    Generation {
        generation: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Serde(String),
}

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serde(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Serde(e.to_string())
    }
}
