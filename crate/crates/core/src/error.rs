use thiserror::Error;

/// Errors raised by the simulator and its experiment runner.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("state lies outside the code space (code-space weight {weight})")]
    OutsideCodeSpace { weight: f64 },

    #[error("resonant off-diagonal element <{row}|H'|{col}> with zero energy gap")]
    Resonance { row: usize, col: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit status for the experiment runner: 2 for bad input, 3 for violated invariants.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidInput(_) | Error::Io(_) | Error::Csv(_) => 2,
            Error::DimensionMismatch { .. } | Error::OutsideCodeSpace { .. } | Error::Resonance { .. } | Error::Invariant(_) => 3,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
