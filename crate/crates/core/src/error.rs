//! Error type shared by every module of the toolkit.

use thiserror::Error;

/// Failure modes of the numerical routines.
///
/// `NumericalFailure` and `NumericalDegeneracy` mean the input was formally
/// valid but the computation could not certify its result; everything else is
/// a contract violation by the input.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: max |A - A*| entry = {deviation:e}")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not positive semidefinite: min eigenvalue = {min_eig:e}")]
    NotPositive { min_eig: f64 },

    #[error("dimension mismatch: {context} (lhs {lhs}, rhs {rhs})")]
    DimensionMismatch {
        context: &'static str,
        lhs: usize,
        rhs: usize,
    },

    #[error("scalar function undefined on the spectrum: {0}")]
    DomainError(String),

    #[error("operand size {size} exceeds cap {cap}")]
    SizeCapExceeded { size: usize, cap: usize },

    #[error("matrix is not invertible within the support cutoff: {0}")]
    NotInvertible(String),

    #[error("support inclusion violated: {0}")]
    SupportViolation(String),

    #[error("algebraic closure not reached after {rounds} rounds (dimension still growing at {dim})")]
    ClosureNotReached { rounds: usize, dim: usize },

    #[error("numerical degeneracy: {0}")]
    NumericalDegeneracy(String),

    #[error("computed span is not closed under the required operations: {0}")]
    NotAnAlgebra(String),

    #[error("channel is not reversible for the given family: {0}")]
    NotReversible(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;
