use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A function argument lies outside the supported domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical routine failed to reach its accuracy target.
    #[error("convergence error: {0}")]
    Convergence(String),

    /// A sampler state violates a model invariant (e.g. zero rate for a positive count).
    #[error("invalid state: {0}")]
    InvalidState(String),

    /// Malformed input data, with the 1-based line number when known.
    #[error("data format error{}: {msg}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    DataFormat { line: Option<usize>, msg: String },

    /// Dimensions of two inputs do not agree.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn format(line: Option<usize>, msg: impl Into<String>) -> Self {
        Error::DataFormat {
            line,
            msg: msg.into(),
        }
    }
}
