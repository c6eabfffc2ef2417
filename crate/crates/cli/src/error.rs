use thiserror::Error;

/// Harness failures, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Physics(String),
    #[error("{0}")]
    Cap(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Physics(_) => 2,
            CliError::Cap(_) => 3,
        }
    }
}

impl From<thermalize::Error> for CliError {
    fn from(e: thermalize::Error) -> Self {
        use thermalize::Error as E;
        match e {
            E::EmptyShell
            | E::DegenerateFit(_)
            | E::DegenerateGap(_)
            | E::ZeroCount
            | E::NonPositiveEnergy(_)
            | E::NonPositiveDenominator(_) => CliError::Physics(e.to_string()),
            E::CapExceeded { .. } => CliError::Cap(e.to_string()),
            E::DimensionMismatch { .. }
            | E::InvalidParameter(_)
            | E::Incommensurate { .. }
            | E::IndexOutOfRange { .. }
            | E::NotPositive { .. } => CliError::Config(e.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
