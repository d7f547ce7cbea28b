use compnmf_core::Error;
use std::fmt;
use std::path::Path;

/// Failure of a command, mapped onto the process exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Format(String),
    Numerical(String),
    Io(String),
    /// Replay produced outputs that differ from the manifest.
    Mismatch(String),
    Other(String),
}

impl CliError {
    pub fn io(path: impl AsRef<Path>, e: std::io::Error) -> Self {
        CliError::Io(format!("{}: {e}", path.as_ref().display()))
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Format(_) => 3,
            CliError::Numerical(_) => 4,
            CliError::Io(_) | CliError::Mismatch(_) | CliError::Other(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Format(m) => write!(f, "data format error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Mismatch(m) => write!(f, "replay mismatch: {m}"),
            CliError::Other(m) => write!(f, "{m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::Domain(_) => CliError::Usage(msg),
            Error::DataFormat { .. } | Error::Dimension(_) => CliError::Format(msg),
            Error::Convergence(_) | Error::InvalidState(_) => CliError::Numerical(msg),
            Error::Io(_) => CliError::Io(msg),
        }
    }
}
