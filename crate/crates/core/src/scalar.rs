//! Real scalar abstraction for the linear-algebra layer.
//!
//! The matrix container and the spectral routines are generic over `Real` so the
//! foundation works at any float width; the toolkit layers above pin `f64`
//! through the crate-root aliases because their decision tolerances are
//! calibrated for double precision.

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};
use std::fmt::{Debug, Display};
use std::iter::Sum;

/// Real scalar usable as the base field of the complex matrix type.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + Sum + Debug + Display + Send + Sync + 'static
{
    /// Absolute comparison tolerance for exact identities (Hermitian symmetry,
    /// trace checks, reconstruction residuals).
    fn atol() -> Self;

    /// Default eigenvalue grouping tolerance, relative to the spectral radius.
    fn group_tol_rel() -> Self;

    /// Support cutoff relative to the largest eigenvalue: smaller eigenvalues
    /// of a PSD matrix count as kernel. Generalized inverses use the same rule.
    fn support_cutoff_rel() -> Self;

    /// Shorthand for lossy conversion from f64 literals.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal converts to Real scalar")
    }
}

impl Real for f64 {
    fn atol() -> f64 {
        1e-10
    }
    fn group_tol_rel() -> f64 {
        1e-8
    }
    fn support_cutoff_rel() -> f64 {
        1e-10
    }
}

impl Real for f32 {
    fn atol() -> f32 {
        1e-5
    }
    fn group_tol_rel() -> f32 {
        1e-4
    }
    fn support_cutoff_rel() -> f32 {
        1e-5
    }
}

/// Complex scalar over a `Real` base field.
pub type C<R> = Complex<R>;
