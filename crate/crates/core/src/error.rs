use alloc::boxed::Box;

use thiserror::Error;

use crate::data::FitResult;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("column {0} is constant and cannot be scaled to unit sum of squares")]
    ConstantColumn(usize),
    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("input contains non-finite values")]
    NonFiniteInput,
    #[error("need at least 2 rows and 1 column, got {rows}x{cols}")]
    TooSmall { rows: usize, cols: usize },
    #[error("invalid penalty: {0}")]
    InvalidPenalty(&'static str),
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
    #[error("solver did not converge within {} sweeps", .0.iterations)]
    MaxSweepsExceeded(Box<FitResult>),
    #[error("oracle did not converge within {} iterations", .0.iterations)]
    MaxItersExceeded(Box<FitResult>),
    #[error("constraint bound t must be nonnegative")]
    InfeasibleT,
    #[error("grouping bound is undefined for alpha = 1")]
    AlphaOne,
    #[error("instance too large for the reference oracle ({n}x{p})")]
    InstanceTooLarge { n: usize, p: usize },
    #[error("grid solver needs exactly 2 predictors, got {0}")]
    WrongDimension(usize),
    #[error("linear system is singular")]
    SingularSystem,
    #[error("number of folds {k} must lie in [2, {n}]")]
    BadK { k: usize, n: usize },
    #[error("tuning grid is empty")]
    EmptyGrid,
    #[error("degrees of freedom {df} must be below n = {n}")]
    DfTooLarge { df: usize, n: usize },
    #[error("residual sum of squares must be positive")]
    NonpositiveRss,
    #[error("model id {0} is not in 1..=6")]
    BadModelId(u32),
}

impl Error {
    /// The best fit carried by a non-convergence error, if any.
    pub fn partial_fit(&self) -> Option<&FitResult> {
        match self {
            Error::MaxSweepsExceeded(fit) | Error::MaxItersExceeded(fit) => Some(fit),
            _ => None,
        }
    }
}
