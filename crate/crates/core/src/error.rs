use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("row {row} is entirely zero after thresholding")]
    DegenerateRow { row: usize },

    #[error("inconsistent bounds at step {step}, index {index}: lower exceeds upper")]
    InconsistentBounds { step: usize, index: usize },

    #[error("point is not in the feasible set U: {0}")]
    NotInFeasibleSet(String),

    #[error("unsupported input: {0}")]
    UnsupportedInput(String),

    #[error("row {row} admits no operator satisfying the side constraint")]
    InfeasibleRow { row: usize },

    #[error("the feasible set is empty: {0}")]
    Infeasible(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
