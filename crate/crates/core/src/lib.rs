//! chanrev: decides, constructs, and cross-validates reversibility of
//! finite-dimensional quantum channels with respect to a family of states.
//!
//! The pipeline: represent a channel (Kraus / Choi / superoperator), build its
//! Petz dual and recovery map at a reference state, then evaluate the
//! equivalent reversibility criteria (recovery identity, divergence
//! equalities, modular cocycles, fixed-point algebra membership,
//! hypothesis-testing error profiles, monotone-metric contraction) and report
//! tri-state verdicts with residuals.
//!
//! The linear-algebra foundation in [`linalg`] is generic over the real scalar
//! type; the toolkit layers run on the `f64` aliases [`CMatrix`] / [`C64`]
//! because every decision tolerance here is calibrated for double precision.

pub mod algebra;
pub mod channels;
pub mod counterexamples;
pub mod divergences;
pub mod error;
pub mod fisher;
pub mod linalg;
pub mod reversibility;
pub mod sample;
pub mod scalar;
pub mod testing;

pub use error::{Error, Result};

/// Complex double-precision scalar.
pub type C64 = num_complex::Complex<f64>;

/// Dense complex matrix over f64, the working type of the toolkit layers.
pub type CMatrix = linalg::ComplexMatrix<f64>;

/// Complex literal helper.
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Central tolerance ledger for the f64 toolkit layers. Every threshold the
/// decision procedures use is named here; per-call overrides exist where the
/// operation signatures allow them.
pub mod tol {
    /// Absolute tolerance for exact identities (Hermitian symmetry, unit
    /// trace, reconstruction residuals).
    pub const ATOL: f64 = 1e-10;

    /// Eigenvalue grouping tolerance relative to the spectral radius.
    pub const GROUP_TOL_REL: f64 = 1e-8;

    /// Support cutoff relative to the largest eigenvalue; generalized
    /// inverses drop eigenvalues at or below it.
    pub const SUPPORT_CUTOFF_REL: f64 = 1e-10;

    /// Span-membership threshold relative to the norm of the tested element.
    pub const MEMBERSHIP_TOL: f64 = 1e-8;

    /// Residuals at or below `HOLD_TOL * scale` count as "holds".
    pub const HOLD_TOL: f64 = 1e-8;

    /// Residuals at or above `FAIL_TOL * scale` count as "fails"; the band
    /// between the two is "inconclusive".
    pub const FAIL_TOL: f64 = 1e-4;

    /// Distance from 1 at which the Hoeffding exponent's sup domain is capped.
    pub const HOEFFDING_U_CAP: f64 = 1e-6;

    /// Default row-count cap for tensor powers.
    pub const TENSOR_SIZE_CAP: usize = 4096;
}
