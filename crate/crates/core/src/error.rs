use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("generator matrix is not square: row {row} has {len} entries, expected {expected}")]
    NotSquare { row: usize, len: usize, expected: usize },

    #[error("generator entry q[{row}][{col}] = {value} is negative off the diagonal")]
    NegativeOffDiagonal { row: usize, col: usize, value: f64 },

    #[error("generator row {row} sums to {sum:e}, expected 0")]
    RowSumViolation { row: usize, sum: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    DimensionMismatch { what: &'static str, expected: usize, got: usize },

    #[error("free boundary must be positive, got {0}")]
    NonpositiveBoundary(f64),

    #[error("asset price must be positive, got {0}")]
    NonpositiveAsset(f64),

    #[error("grid has {0} intervals, at least 4 are required")]
    GridTooSmall(usize),

    #[error("point {x} lies outside the interpolation bracket [{lo}, {hi}]")]
    OutOfBracket { x: f64, lo: f64, hi: f64 },

    #[error("zero pivot at row {0} of tridiagonal solve")]
    SingularPivot(usize),

    #[error(
        "no convergence at step {step} after {iterations} iterations \
         (boundary change {boundary_change:e}, value change {value_change:e})"
    )]
    NoConvergence { step: usize, iterations: usize, boundary_change: f64, value_change: f64 },

    #[error("time difference at level {level} needs {needed} stored levels, have {have}")]
    InsufficientHistory { level: usize, needed: usize, have: usize },

    #[error("regime index {index} out of range for {count} regimes")]
    RegimeOutOfRange { index: usize, count: usize },

    #[error("fine grid has {fine} intervals, expected twice the coarse {coarse}")]
    GridMismatch { coarse: usize, fine: usize },

    #[error("convergence rate needs positive errors, got {coarse:e} and {fine:e}")]
    NonpositiveError { coarse: f64, fine: f64 },

    #[error("amplification analysis needs mu > 0, got {0}")]
    NonpositiveMu(f64),

    #[error("unknown reference table `{0}`")]
    UnknownTable(String),

    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),

    #[error("step {step}: {source}")]
    AtStep {
        step: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }

    /// Attaches a time-step index unless the error already carries one.
    pub(crate) fn at_step(self, step: usize) -> Self {
        match self {
            e @ (Error::NoConvergence { .. } | Error::AtStep { .. }) => e,
            e => Error::AtStep { step, source: Box::new(e) },
        }
    }
}
