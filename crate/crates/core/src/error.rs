use thiserror::Error;

/// Errors produced by the model, counting, sampling and analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {what} has length {got}, expected {expected}")]
    DimensionMismatch {
        what: &'static str,
        got: usize,
        expected: usize,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("frequency {frequency} is not an integer multiple of quantum unit {unit}")]
    Incommensurate { frequency: f64, unit: f64 },
    #[error("level index {index} out of range for {len} levels")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("available bath energy {0} is not positive")]
    NonPositiveEnergy(f64),
    #[error("no system level admits any bath state in the shell")]
    EmptyShell,
    #[error("shell holds {count} basis states, above the cap of {cap}")]
    CapExceeded { count: String, cap: u64 },
    #[error("fit is degenerate: {0}")]
    DegenerateFit(String),
    #[error("non-positive denominator {0} in quasi-temperature")]
    NonPositiveDenominator(f64),
    #[error("gap product beta*delta = {0} too small for the small-coherence expansion")]
    DegenerateGap(f64),
    #[error("coherence |F|^2 = {f2} exceeds p+ p- = {bound}; state is not positive")]
    NotPositive { f2: f64, bound: f64 },
    #[error("microstate count is zero")]
    ZeroCount,
}

pub type Result<T> = std::result::Result<T, Error>;
