//! Grouped spectral decompositions and the matrix functions built on them.

use super::{hermitian_eigen, ComplexMatrix, HermitianEigen};
use crate::error::{Error, Result};
use crate::scalar::{Real, C};
use num_complex::Complex;

/// Spectral decomposition of a Hermitian matrix with nearby eigenvalues merged
/// into a single projection. Distinct eigenvalues are strictly descending and
/// separated by more than `group_tol`.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition<R> {
    pub eigenvalues: Vec<R>,
    pub projections: Vec<ComplexMatrix<R>>,
    pub multiplicities: Vec<usize>,
    pub group_tol: R,
    raw: HermitianEigen<R>,
}

impl<R: Real> SpectralDecomposition<R> {
    pub fn dim(&self) -> usize {
        self.raw.values.len()
    }

    /// Ungrouped eigenvalues, descending.
    pub fn raw_values(&self) -> &[R] {
        &self.raw.values
    }

    pub fn raw_eigen(&self) -> &HermitianEigen<R> {
        &self.raw
    }

    /// Largest |eigenvalue|.
    pub fn spectral_radius(&self) -> R {
        self.raw
            .values
            .iter()
            .map(|v| v.abs())
            .fold(R::zero(), |a, b| if b > a { b } else { a })
    }

    pub fn min_eigenvalue(&self) -> R {
        *self
            .raw
            .values
            .last()
            .expect("spectral decomposition of a nonempty matrix")
    }

    pub fn max_eigenvalue(&self) -> R {
        self.raw.values[0]
    }

    /// Support cutoff for PSD calculus: eigenvalues at or below it count as kernel.
    pub fn support_cutoff(&self) -> R {
        R::support_cutoff_rel() * self.spectral_radius()
    }

    /// Applies `f` to the grouped eigenvalues: sum f(lambda_i) P_i.
    /// Errors if `f` produces a non-finite value anywhere on the spectrum.
    pub fn map(&self, f: impl Fn(R) -> C<R>) -> Result<ComplexMatrix<R>> {
        let n = self.dim();
        let mut out = ComplexMatrix::zeros(n, n);
        for (lam, p) in self.eigenvalues.iter().zip(self.projections.iter()) {
            let fv = f(*lam);
            if !fv.re.is_finite() || !fv.im.is_finite() {
                return Err(Error::DomainError(format!(
                    "function not finite at eigenvalue {:?}",
                    lam.to_f64()
                )));
            }
            out = &out + &p.scale(fv);
        }
        Ok(out)
    }

    /// Power with the support convention: kernel eigenvalues contribute 0, and
    /// `s = 0` yields the support projection. Negative powers invert on the
    /// support only.
    pub fn power_on_support(&self, s: R) -> ComplexMatrix<R> {
        let cutoff = self.support_cutoff();
        let n = self.dim();
        let mut out = ComplexMatrix::zeros(n, n);
        for (lam, p) in self.eigenvalues.iter().zip(self.projections.iter()) {
            if *lam <= cutoff {
                continue;
            }
            out = &out + &p.scale_re(lam.powf(s));
        }
        out
    }

    /// Logarithm on the support; kernel contributes 0.
    pub fn log_on_support(&self) -> ComplexMatrix<R> {
        let cutoff = self.support_cutoff();
        let n = self.dim();
        let mut out = ComplexMatrix::zeros(n, n);
        for (lam, p) in self.eigenvalues.iter().zip(self.projections.iter()) {
            if *lam <= cutoff {
                continue;
            }
            out = &out + &p.scale_re(lam.ln());
        }
        out
    }

    /// Unitary-on-support imaginary power `sum lambda^{it} P` over the support;
    /// kernel contributes 0, consistent with the `x^0 = supp x` convention.
    pub fn imaginary_power(&self, t: R) -> ComplexMatrix<R> {
        let cutoff = self.support_cutoff();
        let n = self.dim();
        let mut out = ComplexMatrix::zeros(n, n);
        for (lam, p) in self.eigenvalues.iter().zip(self.projections.iter()) {
            if *lam <= cutoff {
                continue;
            }
            out = &out + &p.scale(Complex::from_polar(R::one(), t * lam.ln()));
        }
        out
    }

    /// Projection onto the span of eigenvectors with eigenvalue above the
    /// support cutoff. Requires min eigenvalue >= -atol (PSD input).
    pub fn support(&self) -> Result<SupportProjection<R>> {
        let scale = if self.spectral_radius() > R::one() {
            self.spectral_radius()
        } else {
            R::one()
        };
        if self.min_eigenvalue() < -R::atol() * scale {
            return Err(Error::NotPositive {
                min_eig: self.min_eigenvalue().to_f64().unwrap_or(f64::NAN),
            });
        }
        let cutoff = self.support_cutoff();
        let n = self.dim();
        let mut proj = ComplexMatrix::zeros(n, n);
        let mut rank = 0;
        for ((lam, p), m) in self
            .eigenvalues
            .iter()
            .zip(self.projections.iter())
            .zip(self.multiplicities.iter())
        {
            if *lam > cutoff {
                proj = &proj + p;
                rank += m;
            }
        }
        Ok(SupportProjection { projection: proj, rank })
    }
}

/// Support projection of a PSD matrix with its rank.
#[derive(Clone, Debug)]
pub struct SupportProjection<R> {
    pub projection: ComplexMatrix<R>,
    pub rank: usize,
}

/// Grouped spectral decomposition; `group_tol` defaults to
/// `group_tol_rel * spectral_radius`. Eigenvalues whose pairwise chain of gaps
/// stays within `group_tol` merge into one projection (transitive closure),
/// with the weighted mean as the representative value.
pub fn hermitian_spectral<R: Real>(
    m: &ComplexMatrix<R>,
    group_tol: Option<R>,
) -> Result<SpectralDecomposition<R>> {
    let eig = hermitian_eigen(m, R::atol())?;
    let radius = eig
        .values
        .iter()
        .map(|v| v.abs())
        .fold(R::zero(), |a, b| if b > a { b } else { a });
    let tol = match group_tol {
        Some(t) => {
            assert!(t >= R::zero(), "group_tol must be nonnegative");
            t
        }
        None => R::group_tol_rel() * radius,
    };

    let n = eig.values.len();
    let mut eigenvalues = Vec::new();
    let mut projections = Vec::new();
    let mut multiplicities = Vec::new();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        // values are sorted, so transitive-closure grouping = consecutive chaining
        while end < n && (eig.values[end - 1] - eig.values[end]).abs() <= tol {
            end += 1;
        }
        let count = end - start;
        let mean = eig.values[start..end]
            .iter()
            .fold(R::zero(), |a, b| a + *b)
            / R::of(count as f64);
        let mut proj = ComplexMatrix::zeros(n, n);
        for k in start..end {
            for i in 0..n {
                let vi = eig.vectors[(i, k)];
                for j in 0..n {
                    proj[(i, j)] += vi * eig.vectors[(j, k)].conj();
                }
            }
        }
        eigenvalues.push(mean);
        projections.push(proj);
        multiplicities.push(count);
        start = end;
    }

    Ok(SpectralDecomposition {
        eigenvalues,
        projections,
        multiplicities,
        group_tol: tol,
        raw: eig,
    })
}

/// Support projection of a PSD matrix (see `SpectralDecomposition::support`).
pub fn support_projection<R: Real>(m: &ComplexMatrix<R>) -> Result<SupportProjection<R>> {
    hermitian_spectral(m, None)?.support()
}

/// `sum f(lambda_i) P_i` over the grouped spectrum of a Hermitian matrix.
pub fn matrix_function<R: Real>(
    m: &ComplexMatrix<R>,
    group_tol: Option<R>,
    f: impl Fn(R) -> C<R>,
) -> Result<ComplexMatrix<R>> {
    hermitian_spectral(m, group_tol)?.map(f)
}

/// Real-valued convenience wrapper over `matrix_function`.
pub fn matrix_function_real<R: Real>(
    m: &ComplexMatrix<R>,
    group_tol: Option<R>,
    f: impl Fn(R) -> R,
) -> Result<ComplexMatrix<R>> {
    matrix_function(m, group_tol, |x| Complex::new(f(x), R::zero()))
}

/// PSD power with the support convention (`s = 0` gives the support projection).
pub fn power_psd<R: Real>(m: &ComplexMatrix<R>, s: R) -> Result<ComplexMatrix<R>> {
    let dec = hermitian_spectral(m, None)?;
    let scale = if dec.spectral_radius() > R::one() {
        dec.spectral_radius()
    } else {
        R::one()
    };
    if dec.min_eigenvalue() < -R::atol() * scale {
        return Err(Error::NotPositive {
            min_eig: dec.min_eigenvalue().to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(dec.power_on_support(s))
}

/// Logarithm restricted to the support of a PSD matrix.
pub fn log_on_support<R: Real>(m: &ComplexMatrix<R>) -> Result<ComplexMatrix<R>> {
    let dec = hermitian_spectral(m, None)?;
    Ok(dec.log_on_support())
}

/// `m^{it}` on the support of a PSD matrix.
pub fn imaginary_power<R: Real>(m: &ComplexMatrix<R>, t: R) -> Result<ComplexMatrix<R>> {
    let dec = hermitian_spectral(m, None)?;
    Ok(dec.imaginary_power(t))
}

/// Trace norm of a Hermitian matrix: sum of |eigenvalues|.
pub fn trace_norm_hermitian<R: Real>(m: &ComplexMatrix<R>) -> Result<R> {
    let eig = hermitian_eigen(m, R::atol())?;
    Ok(eig.values.iter().map(|v| v.abs()).fold(R::zero(), |a, b| a + b))
}

/// Operator norm: largest singular value, via the Gram matrix (Hermitian fast
/// path uses |eigenvalues| directly).
pub fn operator_norm<R: Real>(m: &ComplexMatrix<R>) -> Result<R> {
    if m.is_square() && m.is_hermitian(R::atol()) {
        let eig = hermitian_eigen(m, R::atol())?;
        return Ok(eig
            .values
            .iter()
            .map(|v| v.abs())
            .fold(R::zero(), |a, b| if b > a { b } else { a }));
    }
    let gram = &m.adjoint() * m;
    let eig = hermitian_eigen(&gram, R::atol() * (R::one() + gram.max_abs()))?;
    let top = eig.values.first().copied().unwrap_or(R::zero());
    Ok(if top > R::zero() { top.sqrt() } else { R::zero() })
}

/// Orthonormal basis of the kernel of a (possibly rectangular) matrix.
///
/// Uses the Jordan-Wielandt embedding [[0, M], [M*, 0]], whose eigenvalues are
/// the signed singular values at full precision (the Gram-matrix route would
/// square them below the f64 noise floor). Eigenvectors with |eigenvalue| at
/// or below `tol` have their lower components in the kernel of M; those
/// components are orthonormalized to a basis.
pub fn kernel_basis<R: Real>(m: &ComplexMatrix<R>, tol: R) -> Result<Vec<ComplexMatrix<R>>> {
    let (rows, cols) = (m.rows(), m.cols());
    let n = rows + cols;
    let mut h = ComplexMatrix::zeros(n, n);
    for i in 0..rows {
        for j in 0..cols {
            h[(i, rows + j)] = m[(i, j)];
            h[(rows + j, i)] = m[(i, j)].conj();
        }
    }
    let eig = hermitian_eigen(&h, R::atol() * (R::one() + h.max_abs()))?;
    let mut candidates = Vec::new();
    for k in 0..eig.values.len() {
        if eig.values[k].abs() <= tol {
            candidates.push(ComplexMatrix::from_fn(cols, 1, |i, _| {
                eig.vectors[(rows + i, k)]
            }));
        }
    }
    // lower components of the near-null space span ker M; orthonormalize them
    let mut out: Vec<ComplexMatrix<R>> = Vec::new();
    for cand in candidates {
        let mut v = cand;
        for _ in 0..2 {
            for b in &out {
                let c = b.hs_inner(&v);
                v = &v - &b.scale(c);
            }
        }
        let nv = v.frobenius_norm();
        if nv > R::of(1e-6) {
            out.push(v.scale_re(R::one() / nv));
        }
    }
    Ok(out)
}
