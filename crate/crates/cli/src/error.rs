use std::fmt;
use std::process::ExitCode;

/// Failure of a command, carrying its exit code class.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, unreadable or malformed model file.
    Usage(String),
    /// The requested model point lies outside the region.
    Infeasible { code: &'static str, message: String },
    /// An enumeration or search limit would be exceeded.
    Guard(String),
    /// Output could not be written.
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Usage(_) => ExitCode::from(2),
            CliError::Infeasible { .. } => ExitCode::from(3),
            CliError::Guard(_) => ExitCode::from(4),
            CliError::Io(_) => ExitCode::from(1),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "error: {msg}"),
            CliError::Infeasible { code, message } => write!(f, "infeasible [{code}]: {message}"),
            CliError::Guard(msg) => write!(f, "resource guard: {msg}"),
            CliError::Io(msg) => write!(f, "i/o error: {msg}"),
        }
    }
}

impl From<secrecy_core::Error> for CliError {
    fn from(e: secrecy_core::Error) -> Self {
        use secrecy_core::Error as E;
        match e {
            E::Infeasible(why) => CliError::Infeasible { code: why.code(), message: why.to_string() },
            E::InfeasibleAtResolution(_) => CliError::Infeasible { code: "infeasible_at_resolution", message: e.to_string() },
            E::GuardExceeded(_) => CliError::Guard(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
