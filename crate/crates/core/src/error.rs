use thiserror::Error;

/// Errors produced by the detection pipeline and its building blocks.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite value at row {row}, column {col}")]
    NonFiniteValue { row: usize, col: usize },
    #[error("too few observations: got {n}, need at least {min}")]
    TooFewObservations { n: usize, min: usize },
    #[error("ragged matrix: row {row} has {got} columns, expected {expected}")]
    RaggedMatrix { row: usize, got: usize, expected: usize },
    #[error("dataset has zero columns")]
    EmptyDimension,
    #[error("non-finite input {0}")]
    NonFiniteInput(f64),
    #[error("p-value {0} outside (0, 1)")]
    PValueOutOfRange(f64),
    #[error("negative input {0}")]
    NegativeInput(f64),
    #[error("alpha {0} outside (0, 1)")]
    AlphaOutOfRange(f64),
    #[error("n = {n} too small, need at least {min}")]
    NTooSmall { n: usize, min: usize },
    #[error("degenerate scale: trace estimate {0} is not positive")]
    DegenerateScale(f64),
    #[error("empty localization grid [{lo}, {hi}]")]
    EmptyGrid { lo: usize, hi: usize },
    #[error("tau = {tau} outside [{lo}, {hi}]")]
    TauOutOfRange { tau: usize, lo: usize, hi: usize },
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("matrix is not positive semidefinite (eigenvalue {0})")]
    NotPsd(f64),
    #[error("gram matrix is {got}x{got} but dataset has {expected} rows")]
    GramMismatch { got: usize, expected: usize },
    #[error("bad parameter: {0}")]
    BadParam(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable upper-case identifier, used in diagnostics.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NonFiniteValue { .. } => "NON_FINITE_VALUE",
            Error::TooFewObservations { .. } => "TOO_FEW_OBSERVATIONS",
            Error::RaggedMatrix { .. } => "RAGGED_MATRIX",
            Error::EmptyDimension => "EMPTY_DIMENSION",
            Error::NonFiniteInput(_) => "NON_FINITE_INPUT",
            Error::PValueOutOfRange(_) => "P_OUT_OF_RANGE",
            Error::NegativeInput(_) => "NEGATIVE_INPUT",
            Error::AlphaOutOfRange(_) => "ALPHA_OUT_OF_RANGE",
            Error::NTooSmall { .. } => "N_TOO_SMALL",
            Error::DegenerateScale(_) => "DEGENERATE_SCALE",
            Error::EmptyGrid { .. } => "EMPTY_GRID",
            Error::TauOutOfRange { .. } => "TAU_OUT_OF_RANGE",
            Error::NotSymmetric => "NOT_SYMMETRIC",
            Error::NotPsd(_) => "NOT_PSD",
            Error::GramMismatch { .. } => "GRAM_MISMATCH",
            Error::BadParam(_) => "BAD_PARAM",
        }
    }
}
