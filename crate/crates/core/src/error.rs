use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A compressor backend failed on an input it should have accepted.
    #[error("backend error ({backend}): {message}")]
    Backend { backend: String, message: String },

    #[error("invalid argument: {0}")]
    Argument(String),

    /// Both objects compress to zero bits, so no normalization is possible.
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("unknown term(s): {}", .0.join(", "))]
    UnknownTerm(Vec<String>),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Transport-level failure talking to a count endpoint.
    #[error("network error: {0}")]
    Network(String),

    #[error("rate limited by endpoint after {attempts} attempt(s)")]
    RateLimited { attempts: u32 },

    /// The endpoint answered but the count could not be extracted.
    #[error("provider format error: {0}")]
    ProviderFormat(String),
}

impl Error {
    pub(crate) fn backend(backend: &str, message: impl Into<String>) -> Self {
        Error::Backend {
            backend: backend.to_string(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: &str, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.to_string(),
            line,
            message: message.into(),
        }
    }

    /// Whether retrying the same request later may succeed.
    pub fn is_retryable(&self) -> bool {
        matches!(self, Error::Network(_) | Error::RateLimited { .. })
    }

    /// Input problems (bad files, arguments, unknown terms) versus computation failures.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Argument(_) | Error::UnknownTerm(_) | Error::Parse { .. } | Error::Io { .. }
        )
    }
}
