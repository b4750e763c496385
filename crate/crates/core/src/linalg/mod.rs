//! Dense complex matrices and the spectral calculus the toolkit is built on.
//!
//! Everything here is generic over the real base field; dimensions in this
//! problem domain are small (operators on d <= ~64, superoperators on d^2), so
//! the container is a plain row-major `Vec` and the eigensolver is cyclic
//! Jacobi, which is deterministic and keeps eigenvector orthogonality at
//! machine precision.

mod block;
mod eigen;
mod spectral;

pub use block::{assemble_block, block_positive};
pub use eigen::{hermitian_eigen, HermitianEigen};
pub use spectral::{
    hermitian_spectral, imaginary_power, kernel_basis, log_on_support, matrix_function,
    matrix_function_real, operator_norm, power_psd, support_projection, trace_norm_hermitian,
    SpectralDecomposition, SupportProjection,
};

use crate::error::{Error, Result};
use crate::scalar::{Real, C};
use num_complex::Complex;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

/// Dense complex matrix, row-major storage.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix<R> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<R>>,
}

impl<R: Real> ComplexMatrix<R> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex::new(R::zero(), R::zero()); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::new(R::one(), R::zero());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C<R>) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Builds from a row-major slice of entries.
    pub fn from_rows(rows: usize, cols: usize, entries: &[C<R>]) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                context: "entry count vs rows*cols",
                lhs: entries.len(),
                rhs: rows * cols,
            });
        }
        Ok(Self {
            rows,
            cols,
            data: entries.to_vec(),
        })
    }

    pub fn diag(entries: &[C<R>]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = entries[i];
        }
        m
    }

    pub fn diag_real(entries: &[R]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::new(entries[i], R::zero());
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C<R>] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)].conj())
    }

    pub fn trace(&self) -> C<R> {
        debug_assert!(self.is_square());
        let mut t = Complex::new(R::zero(), R::zero());
        for i in 0..self.rows.min(self.cols) {
            t += self[(i, i)];
        }
        t
    }

    /// Hilbert-Schmidt inner product `Tr(self* other)`, conjugate-linear in `self`.
    pub fn hs_inner(&self, other: &Self) -> C<R> {
        debug_assert_eq!(self.rows, other.rows);
        debug_assert_eq!(self.cols, other.cols);
        let mut acc = Complex::new(R::zero(), R::zero());
        for (a, b) in self.data.iter().zip(other.data.iter()) {
            acc += a.conj() * b;
        }
        acc
    }

    pub fn frobenius_norm(&self) -> R {
        self.data
            .iter()
            .map(|z| z.norm_sqr())
            .fold(R::zero(), |a, b| a + b)
            .sqrt()
    }

    pub fn max_abs(&self) -> R {
        self.data
            .iter()
            .map(|z| z.norm())
            .fold(R::zero(), |a, b| if b > a { b } else { a })
    }

    pub fn scale(&self, s: C<R>) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_re(&self, s: R) -> Self {
        self.scale(Complex::new(s, R::zero()))
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul inner dimensions");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.norm_sqr() == R::zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &self.matmul(other) - &other.matmul(self)
    }

    /// Max entry deviation from Hermitian symmetry.
    pub fn hermitian_deviation(&self) -> R {
        if !self.is_square() {
            return R::infinity();
        }
        let mut dev = R::zero();
        for i in 0..self.rows {
            for j in 0..=i {
                let d = (self[(i, j)] - self[(j, i)].conj()).norm();
                if d > dev {
                    dev = d;
                }
            }
        }
        dev
    }

    /// Hermitian within `atol`, scaled by the matrix magnitude above unit size.
    pub fn is_hermitian(&self, atol: R) -> bool {
        let scale = if self.max_abs() > R::one() {
            self.max_abs()
        } else {
            R::one()
        };
        self.is_square() && self.hermitian_deviation() <= atol * scale
    }

    /// Hermitian part `(A + A*)/2`.
    pub fn hermitize(&self) -> Self {
        (self + &self.adjoint()).scale_re(R::of(0.5))
    }

    /// Kronecker product, index convention `(i,k),(j,l) -> self[i,j] * other[k,l]`.
    pub fn kron(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                if a.norm_sqr() == R::zero() {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out[(i * other.rows + k, j * other.cols + l)] = a * other[(k, l)];
                    }
                }
            }
        }
        out
    }

    /// n-fold Kronecker power, guarded by a row-count cap.
    pub fn tensor_power(&self, n: usize, cap: usize) -> Result<Self> {
        assert!(n >= 1, "tensor power needs n >= 1");
        let mut size = self.rows;
        for _ in 1..n {
            size = size.saturating_mul(self.rows);
        }
        if size > cap {
            return Err(Error::SizeCapExceeded { size, cap });
        }
        let mut out = self.clone();
        for _ in 1..n {
            out = out.kron(self);
        }
        Ok(out)
    }

    /// Row-major vectorization as a column, satisfying vec(AXB) = (A (x) B^T) vec(X).
    pub fn vec_row_major(&self) -> Self {
        Self {
            rows: self.rows * self.cols,
            cols: 1,
            data: self.data.clone(),
        }
    }

    /// Inverse of `vec_row_major`.
    pub fn unvec_row_major(v: &Self, rows: usize, cols: usize) -> Self {
        assert_eq!(v.rows, rows * cols);
        assert_eq!(v.cols, 1);
        Self {
            rows,
            cols,
            data: v.data.clone(),
        }
    }

    /// Column `j` as a d x 1 matrix.
    pub fn column(&self, j: usize) -> Self {
        Self::from_fn(self.rows, 1, |i, _| self[(i, j)])
    }

    pub fn set_column(&mut self, j: usize, col: &Self) {
        assert_eq!(col.rows, self.rows);
        for i in 0..self.rows {
            self[(i, j)] = col[(i, 0)];
        }
    }

    /// Horizontal concatenation of column blocks.
    pub fn from_columns(cols: &[Self]) -> Self {
        assert!(!cols.is_empty());
        let rows = cols[0].rows;
        let mut out = Self::zeros(rows, cols.iter().map(|c| c.cols).sum());
        let mut off = 0;
        for c in cols {
            assert_eq!(c.rows, rows);
            for j in 0..c.cols {
                for i in 0..rows {
                    out[(i, off + j)] = c[(i, j)];
                }
            }
            off += c.cols;
        }
        out
    }
}

impl<R: Real> Index<(usize, usize)> for ComplexMatrix<R> {
    type Output = C<R>;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C<R> {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<R: Real> IndexMut<(usize, usize)> for ComplexMatrix<R> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C<R> {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl<R: Real> Add for &ComplexMatrix<R> {
    type Output = ComplexMatrix<R>;
    fn add(self, rhs: Self) -> ComplexMatrix<R> {
        assert_eq!(self.rows, rhs.rows);
        assert_eq!(self.cols, rhs.cols);
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(rhs.data.iter())
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl<R: Real> Sub for &ComplexMatrix<R> {
    type Output = ComplexMatrix<R>;
    fn sub(self, rhs: Self) -> ComplexMatrix<R> {
        assert_eq!(self.rows, rhs.rows);
        assert_eq!(self.cols, rhs.cols);
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(rhs.data.iter())
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl<R: Real> Neg for &ComplexMatrix<R> {
    type Output = ComplexMatrix<R>;
    fn neg(self) -> ComplexMatrix<R> {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| -a).collect(),
        }
    }
}

impl<R: Real> Mul for &ComplexMatrix<R> {
    type Output = ComplexMatrix<R>;
    fn mul(self, rhs: Self) -> ComplexMatrix<R> {
        self.matmul(rhs)
    }
}

impl<R: std::fmt::Debug> std::fmt::Debug for ComplexMatrix<R> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = &self.data[i * self.cols + j];
                write!(f, "{:?}+{:?}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Gram-Schmidt orthonormalization in the Hilbert-Schmidt inner product with a
/// relative drop tolerance; double pass for numerical orthogonality.
pub fn orthonormalize_hs<R: Real>(mats: &[ComplexMatrix<R>], drop_tol: R) -> Vec<ComplexMatrix<R>> {
    let mut basis: Vec<ComplexMatrix<R>> = Vec::new();
    for m in mats {
        let scale = m.frobenius_norm();
        if scale <= drop_tol {
            continue;
        }
        let mut v = m.clone();
        for _ in 0..2 {
            for b in &basis {
                let c = b.hs_inner(&v);
                v = &v - &b.scale(c);
            }
        }
        let n = v.frobenius_norm();
        if n > drop_tol * if scale > R::one() { scale } else { R::one() } {
            basis.push(v.scale_re(R::one() / n));
        }
    }
    basis
}

/// Orthonormalizes Hermitian matrices over the reals in the trace inner
/// product `Tr(AB)`; spans of state differences live here.
pub fn orthonormalize_hermitian_real<R: Real>(
    mats: &[ComplexMatrix<R>],
    drop_tol: R,
) -> Vec<ComplexMatrix<R>> {
    let mut basis: Vec<ComplexMatrix<R>> = Vec::new();
    for m in mats {
        let mut v = m.hermitize();
        let scale = v.frobenius_norm();
        if scale <= drop_tol {
            continue;
        }
        for _ in 0..2 {
            for b in &basis {
                let c = b.hs_inner(&v).re;
                v = &v - &b.scale_re(c);
            }
        }
        let n = v.frobenius_norm();
        if n > drop_tol * if scale > R::one() { scale } else { R::one() } {
            basis.push(v.scale_re(R::one() / n));
        }
    }
    basis
}
