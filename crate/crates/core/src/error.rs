use thiserror::Error;

/// Errors produced by scheme construction, splitting analysis and time stepping.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("order {0} is outside the supported range 1..=5")]
    OrderOutOfRange(usize),

    #[error("delta {0} is outside (0, 1]")]
    DeltaOutOfRange(f64),

    #[error("invalid coefficients: {0}")]
    InvalidCoefficients(String),

    #[error("roots of c(z) are not closed under conjugation")]
    RootsNotConjugateClosed,

    #[error("root {re}{im:+}i of c(z) lies outside the closed unit disk")]
    RootOutsideUnitDisk { re: f64, im: f64 },

    #[error("error constant undefined: {0}(1) vanishes")]
    DegenerateErrorConstant(&'static str),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("implicit operator is not symmetric (max |A - A^T| = {max_deviation:e})")]
    Asymmetric { max_deviation: f64 },

    #[error("implicit operator is not negative definite (largest eigenvalue {largest_eigenvalue:e})")]
    NotNegativeDefinite { largest_eigenvalue: f64 },

    #[error("eigenvalue solver failed to converge")]
    EigenSolverFailed,

    #[error("implicit operator a_s I - k c_s A is singular")]
    SingularImplicitOperator,

    #[error("state became non-finite at step index {index}")]
    NonFiniteState { index: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
