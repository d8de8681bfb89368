use std::fmt;

use horses_core::Error as CoreError;

/// Failure of a command, carrying its process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Unreadable or malformed input, bad flag values. Exit 2.
    Parse(String),
    /// Inputs whose shapes disagree. Exit 3.
    Dimension(String),
    /// Unknown simulation model. Exit 5.
    BadModel(u32),
    /// Anything else. Exit 1.
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Dimension(_) => 3,
            CliError::BadModel(_) => 5,
            CliError::Other(_) => 1,
        }
    }

    pub fn parse(msg: impl Into<String>) -> Self {
        CliError::Parse(msg.into())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Parse(m) => write!(f, "input error: {m}"),
            CliError::Dimension(m) => write!(f, "dimension mismatch: {m}"),
            CliError::BadModel(id) => write!(f, "unknown simulation model {id} (expected 1 to 6)"),
            CliError::Other(m) => write!(f, "{m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let msg = e.to_string();
        match e {
            CoreError::DimensionMismatch { .. } | CoreError::WrongDimension(_) => {
                CliError::Dimension(msg)
            }
            CoreError::BadModelId(id) => CliError::BadModel(id),
            CoreError::ConstantColumn(_)
            | CoreError::NonFiniteInput
            | CoreError::TooSmall { .. }
            | CoreError::InvalidPenalty(_)
            | CoreError::InvalidArgument(_)
            | CoreError::InfeasibleT
            | CoreError::AlphaOne
            | CoreError::BadK { .. }
            | CoreError::EmptyGrid => CliError::Parse(msg),
            _ => CliError::Other(msg),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Other(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Parse(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Other(e.to_string())
    }
}
