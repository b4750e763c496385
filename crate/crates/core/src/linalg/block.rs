//! Positivity of 2x2 operator block matrices without assembling them.

use super::{hermitian_spectral, ComplexMatrix};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Decides whether [[a, b], [b*, c]] is PSD via the Schur-complement
/// characterization: c PSD, range(b*) inside range(c), and a - b c^- b* PSD,
/// with c^- the generalized inverse on the support of c.
///
/// Tolerances: PSD checks allow min eigenvalue >= -atol * scale; the range
/// condition allows a leak of sqrt(atol) * scale / 10, which keeps the verdict
/// consistent with a direct minimum-eigenvalue test of the assembled matrix
/// away from the atol boundary.
pub fn block_positive<R: Real>(
    a: &ComplexMatrix<R>,
    b: &ComplexMatrix<R>,
    c: &ComplexMatrix<R>,
) -> Result<bool> {
    if a.rows() != a.cols() || c.rows() != c.cols() {
        return Err(Error::DimensionMismatch {
            context: "diagonal blocks must be square",
            lhs: a.rows(),
            rhs: c.rows(),
        });
    }
    if b.rows() != a.rows() || b.cols() != c.rows() {
        return Err(Error::DimensionMismatch {
            context: "off-diagonal block shape",
            lhs: b.rows(),
            rhs: b.cols(),
        });
    }
    let scale = [a.max_abs(), b.max_abs(), c.max_abs(), R::one()]
        .into_iter()
        .fold(R::zero(), |x, y| if y > x { y } else { x });

    let c_dec = hermitian_spectral(c, None)?;
    if c_dec.min_eigenvalue() < -R::atol() * scale {
        return Ok(false);
    }

    // range(b*) inside range(c)  <=>  b (1 - supp c) = 0
    let supp = c_dec.power_on_support(R::zero());
    let id = ComplexMatrix::identity(c.rows());
    let leak = (b * &(&id - &supp)).max_abs();
    if leak > (R::atol() * scale).sqrt() * R::of(0.1) {
        return Ok(false);
    }

    let c_pinv = c_dec.power_on_support(-R::one());
    let schur = &a.hermitize() - &(&(b * &c_pinv) * &b.adjoint());
    let s_dec = hermitian_spectral(&schur, None)?;
    Ok(s_dec.min_eigenvalue() >= -R::atol() * scale)
}

/// Assembles [[a, b], [b*, c]] into one matrix; the oracle partner of
/// `block_positive` and occasionally useful on its own.
pub fn assemble_block<R: Real>(
    a: &ComplexMatrix<R>,
    b: &ComplexMatrix<R>,
    c: &ComplexMatrix<R>,
) -> ComplexMatrix<R> {
    let d1 = a.rows();
    let d2 = c.rows();
    let bstar = b.adjoint();
    ComplexMatrix::from_fn(d1 + d2, d1 + d2, |i, j| match (i < d1, j < d1) {
        (true, true) => a[(i, j)],
        (true, false) => b[(i, j - d1)],
        (false, true) => bstar[(i - d1, j)],
        (false, false) => c[(i - d1, j - d1)],
    })
}
