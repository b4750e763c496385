//! Cyclic Jacobi eigensolver for complex Hermitian matrices.
//!
//! Each pivot applies a phase rotation that makes the off-diagonal entry real
//! followed by a real Givens rotation that annihilates it. Quadratic
//! convergence, machine-precision eigenvector orthogonality, fully
//! deterministic sweep order.

use super::ComplexMatrix;
use crate::error::{Error, Result};
use crate::scalar::{Real, C};
use num_complex::Complex;

/// Eigendecomposition of a Hermitian matrix; `values` descending, column `k`
/// of `vectors` is the eigenvector for `values[k]`.
#[derive(Clone, Debug)]
pub struct HermitianEigen<R> {
    pub values: Vec<R>,
    pub vectors: ComplexMatrix<R>,
}

impl<R: Real> HermitianEigen<R> {
    /// Reassembles `V diag(f(values)) V*`.
    pub fn reassemble(&self, f: impl Fn(R) -> C<R>) -> ComplexMatrix<R> {
        let n = self.values.len();
        let mut out = ComplexMatrix::zeros(n, n);
        for k in 0..n {
            let fv = f(self.values[k]);
            if fv.norm_sqr() == R::zero() {
                continue;
            }
            for i in 0..n {
                let vi = self.vectors[(i, k)];
                for j in 0..n {
                    out[(i, j)] += fv * vi * self.vectors[(j, k)].conj();
                }
            }
        }
        out
    }
}

const MAX_SWEEPS: usize = 60;

/// Full eigendecomposition of a Hermitian matrix within `atol` symmetry.
pub fn hermitian_eigen<R: Real>(m: &ComplexMatrix<R>, atol: R) -> Result<HermitianEigen<R>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            context: "eigendecomposition needs a square matrix",
            lhs: m.rows(),
            rhs: m.cols(),
        });
    }
    if !m.is_hermitian(atol) {
        return Err(Error::NotHermitian {
            deviation: m
                .hermitian_deviation()
                .to_f64()
                .unwrap_or(f64::INFINITY),
        });
    }
    let n = m.rows();
    if n == 0 {
        return Ok(HermitianEigen {
            values: vec![],
            vectors: ComplexMatrix::zeros(0, 0),
        });
    }
    // working copy with symmetry enforced exactly
    let mut a = m.hermitize();
    let mut v = ComplexMatrix::<R>::identity(n);
    if n == 1 {
        return Ok(HermitianEigen {
            values: vec![a[(0, 0)].re],
            vectors: v,
        });
    }

    let base = a.frobenius_norm();
    let conv = R::epsilon() * base * R::of(n as f64);
    let mut converged = base == R::zero();

    for _sweep in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let mut off_sq = R::zero();
        for p in 0..n - 1 {
            for q in p + 1..n {
                off_sq += a[(p, q)].norm_sqr();
            }
        }
        if (off_sq + off_sq).sqrt() <= conv {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let beta = a[(p, q)];
                let abs_b = beta.norm();
                if abs_b <= R::min_positive_value() {
                    continue;
                }
                let u = beta.unscale(abs_b); // phase of the pivot entry
                let alpha = a[(p, p)].re;
                let gamma = a[(q, q)].re;
                let tau = (gamma - alpha) / (abs_b + abs_b);
                let t = if tau.abs() > R::one() / R::epsilon() {
                    (tau + tau).recip()
                } else {
                    let sgn = if tau >= R::zero() { R::one() } else { -R::one() };
                    sgn / (tau.abs() + (R::one() + tau * tau).sqrt())
                };
                let c = R::one() / (R::one() + t * t).sqrt();
                let s = t * c;
                rotate(&mut a, &mut v, p, q, c, s, u);
            }
        }
    }
    if !converged {
        // final check: the sweeps above may have converged on the last pass
        let mut off_sq = R::zero();
        for p in 0..n - 1 {
            for q in p + 1..n {
                off_sq += a[(p, q)].norm_sqr();
            }
        }
        if (off_sq + off_sq).sqrt() > conv {
            return Err(Error::NumericalFailure(format!(
                "Jacobi sweeps did not converge in {MAX_SWEEPS} iterations (n = {n})"
            )));
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[(j, j)]
            .re
            .partial_cmp(&a[(i, i)].re)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values: Vec<R> = order.iter().map(|&k| a[(k, k)].re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(HermitianEigen { values, vectors })
}

/// Applies the unitary J = [[c, s], [-s u*, c u*]] on the (p,q) plane:
/// A <- J* A J, V <- V J.
fn rotate<R: Real>(
    a: &mut ComplexMatrix<R>,
    v: &mut ComplexMatrix<R>,
    p: usize,
    q: usize,
    c: R,
    s: R,
    u: C<R>,
) {
    let n = a.rows();
    let cc = Complex::new(c, R::zero());
    let ss = Complex::new(s, R::zero());
    let ub = u.conj();
    // column update: N = A J
    for r in 0..n {
        let arp = a[(r, p)];
        let arq = a[(r, q)];
        a[(r, p)] = cc * arp - ss * ub * arq;
        a[(r, q)] = ss * arp + cc * ub * arq;
    }
    // row update: A' = J* N
    for r in 0..n {
        let apr = a[(p, r)];
        let aqr = a[(q, r)];
        a[(p, r)] = cc * apr - ss * u * aqr;
        a[(q, r)] = ss * apr + cc * u * aqr;
    }
    // exact zero on the annihilated pair, real diagonal
    a[(p, q)] = Complex::new(R::zero(), R::zero());
    a[(q, p)] = Complex::new(R::zero(), R::zero());
    a[(p, p)] = Complex::new(a[(p, p)].re, R::zero());
    a[(q, q)] = Complex::new(a[(q, q)].re, R::zero());
    for r in 0..n {
        let vrp = v[(r, p)];
        let vrq = v[(r, q)];
        v[(r, p)] = cc * vrp - ss * ub * vrq;
        v[(r, q)] = ss * vrp + cc * ub * vrq;
    }
}
