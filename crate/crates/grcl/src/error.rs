use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("eigenvalue {value} at index {index} is negative")]
    NegativeEigenvalue { index: usize, value: f64 },

    #[error("non-finite value in {what}")]
    NonFinite { what: &'static str },

    #[error("one-hot spectrum has total mass {sum}, expected 1")]
    OneHotMassMismatch { sum: f64 },

    #[error("memory size k = {k} is invalid for dimension d = {d}")]
    InvalidK { k: usize, d: usize },

    #[error("no threshold gives a complement with effective rank >= {required}")]
    InfeasibleEffectiveRank { required: f64 },

    #[error("spectrum is not tagged as a one-hot probability vector")]
    NotAProbabilitySpectrum,

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("regularizer is not positive semidefinite")]
    NotPsd,

    #[error("k = {k} exceeds the allowed maximum {max}")]
    KTooLarge { k: usize, max: usize },

    #[error("design row {row} is not a standard basis vector")]
    NotOneHotDesign { row: usize },

    #[error("problem instance does not use the one-hot design")]
    NotOneHot,

    #[error("problem instance does not use the Gaussian design")]
    NotGaussian,

    #[error("regularizer is not diagonal")]
    NotDiagonal,

    #[error("index set of size {size} exceeds b1 * n = {limit}")]
    IndexSetTooLarge { size: usize, limit: f64 },

    #[error("probability {0} is outside [0, 1]")]
    InvalidProbability(f64),

    #[error("enumeration needs {states} states, budget is {max}")]
    BudgetExceeded { states: u128, max: u64 },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("algorithm is not supported here: {0}")]
    Unsupported(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

pub(crate) fn check_dim(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        })
    }
}
