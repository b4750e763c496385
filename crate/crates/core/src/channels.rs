//! Completely positive maps, density operators, the Petz dual pair, and the
//! positivity/Schwarz certificates the reversibility checks rest on.
//!
//! Representation conventions: row-major vectorization, so the superoperator
//! of X -> A X B is A (x) B^T and a Kraus family {K} has superoperator
//! sum K (x) conj(K). The Choi matrix is sum_ij E_ij (x) T(E_ij) (unnormalized,
//! input factor first); T is CP iff it is PSD.

use crate::error::{Error, Result};
use crate::linalg::{hermitian_spectral, SpectralDecomposition};
use crate::sample::Sampler;
use crate::{c64, tol, CMatrix};
use serde::Serialize;
use std::sync::OnceLock;

/// Density operator with its spectral decomposition computed once.
#[derive(Clone, Debug)]
pub struct DensityOperator {
    mat: CMatrix,
    spectral: SpectralDecomposition<f64>,
}

impl DensityOperator {
    /// Validates Hermitian symmetry, positivity, and unit trace (within 1e-8;
    /// spectral noise from chained constructions is allowed, exact inputs are
    /// not renormalized).
    pub fn new(mat: CMatrix) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::DimensionMismatch {
                context: "density operator must be square",
                lhs: mat.rows(),
                rhs: mat.cols(),
            });
        }
        let spectral = hermitian_spectral(&mat, None)?;
        let scale = spectral.spectral_radius().max(1.0);
        if spectral.min_eigenvalue() < -tol::ATOL * scale {
            return Err(Error::NotPositive {
                min_eig: spectral.min_eigenvalue(),
            });
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > 1e-8 || tr.im.abs() > 1e-8 {
            return Err(Error::DomainError(format!(
                "density operator trace {} + {}i is not 1",
                tr.re, tr.im
            )));
        }
        Ok(Self { mat, spectral })
    }

    /// Hermitizes, clips the validation to positivity, and rescales to unit
    /// trace; for sampled or constructed inputs.
    pub fn normalized(mat: CMatrix) -> Result<Self> {
        let h = mat.hermitize();
        let tr = h.trace().re;
        if tr <= 0.0 {
            return Err(Error::NotPositive { min_eig: tr });
        }
        Self::new(h.scale_re(1.0 / tr))
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn spectral(&self) -> &SpectralDecomposition<f64> {
        &self.spectral
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.spectral.min_eigenvalue()
    }

    /// Invertible means no eigenvalue at or below the support cutoff.
    pub fn is_invertible(&self) -> bool {
        self.spectral.min_eigenvalue() > self.spectral.support_cutoff()
    }

    pub fn support_projection(&self) -> CMatrix {
        self.spectral.power_on_support(0.0)
    }

    pub fn rank(&self) -> usize {
        let cutoff = self.spectral.support_cutoff();
        self.spectral
            .eigenvalues
            .iter()
            .zip(self.spectral.multiplicities.iter())
            .filter(|(l, _)| **l > cutoff)
            .map(|(_, m)| m)
            .sum()
    }

    /// Power with the support convention (negative powers invert on support).
    pub fn pow(&self, s: f64) -> CMatrix {
        self.spectral.power_on_support(s)
    }

    pub fn sqrt(&self) -> CMatrix {
        self.pow(0.5)
    }

    pub fn inv_sqrt(&self) -> CMatrix {
        self.pow(-0.5)
    }

    pub fn log(&self) -> CMatrix {
        self.spectral.log_on_support()
    }

    /// rho^{it} on the support (kernel contributes zero).
    pub fn unitary_power(&self, t: f64) -> CMatrix {
        self.spectral.imaginary_power(t)
    }

    /// Checks supp(self) <= supp(other) via the trace leak into the
    /// complementary projection.
    pub fn support_leq(&self, other: &DensityOperator) -> bool {
        let q = other.support_projection();
        let leak = self.mat.trace().re - (&q * &(&self.mat * &q)).trace().re;
        leak.abs() <= 1e-9 * self.dim() as f64
    }
}

/// Linear map between matrix algebras held as a superoperator, with the Kraus
/// family kept alongside when one is known.
#[derive(Clone, Debug)]
pub struct Channel {
    in_dim: usize,
    out_dim: usize,
    super_mat: CMatrix,
    kraus: Option<Vec<CMatrix>>,
    choi_cache: OnceLock<CMatrix>,
}

impl Channel {
    pub fn from_kraus(kraus: Vec<CMatrix>) -> Result<Self> {
        if kraus.is_empty() {
            return Err(Error::DimensionMismatch {
                context: "empty Kraus family",
                lhs: 0,
                rhs: 0,
            });
        }
        let out_dim = kraus[0].rows();
        let in_dim = kraus[0].cols();
        for k in &kraus {
            if k.rows() != out_dim || k.cols() != in_dim {
                return Err(Error::DimensionMismatch {
                    context: "inconsistent Kraus operator shapes",
                    lhs: k.rows(),
                    rhs: out_dim,
                });
            }
        }
        let mut s = CMatrix::zeros(out_dim * out_dim, in_dim * in_dim);
        for k in &kraus {
            s = &s + &k.kron(&k.conj());
        }
        Ok(Self {
            in_dim,
            out_dim,
            super_mat: s,
            kraus: Some(kraus),
            choi_cache: OnceLock::new(),
        })
    }

    pub fn from_super(super_mat: CMatrix, in_dim: usize, out_dim: usize) -> Result<Self> {
        if super_mat.rows() != out_dim * out_dim || super_mat.cols() != in_dim * in_dim {
            return Err(Error::DimensionMismatch {
                context: "superoperator shape vs dimensions",
                lhs: super_mat.rows(),
                rhs: out_dim * out_dim,
            });
        }
        Ok(Self {
            in_dim,
            out_dim,
            super_mat,
            kraus: None,
            choi_cache: OnceLock::new(),
        })
    }

    pub fn from_choi(choi: CMatrix, in_dim: usize, out_dim: usize) -> Result<Self> {
        if choi.rows() != in_dim * out_dim || !choi.is_square() {
            return Err(Error::DimensionMismatch {
                context: "Choi matrix shape vs dimensions",
                lhs: choi.rows(),
                rhs: in_dim * out_dim,
            });
        }
        let mut s = CMatrix::zeros(out_dim * out_dim, in_dim * in_dim);
        for i in 0..in_dim {
            for j in 0..in_dim {
                for k in 0..out_dim {
                    for l in 0..out_dim {
                        s[(k * out_dim + l, i * in_dim + j)] =
                            choi[(i * out_dim + k, j * out_dim + l)];
                    }
                }
            }
        }
        let ch = Self {
            in_dim,
            out_dim,
            super_mat: s,
            kraus: None,
            choi_cache: OnceLock::new(),
        };
        let _ = ch.choi_cache.set(choi);
        Ok(ch)
    }

    /// Builds the superoperator column by column from a matrix-unit action.
    pub fn from_apply(
        in_dim: usize,
        out_dim: usize,
        mut f: impl FnMut(&CMatrix) -> CMatrix,
    ) -> Self {
        let mut s = CMatrix::zeros(out_dim * out_dim, in_dim * in_dim);
        for i in 0..in_dim {
            for j in 0..in_dim {
                let mut e = CMatrix::zeros(in_dim, in_dim);
                e[(i, j)] = c64(1.0, 0.0);
                let out = f(&e);
                debug_assert_eq!(out.rows(), out_dim);
                for k in 0..out_dim {
                    for l in 0..out_dim {
                        s[(k * out_dim + l, i * in_dim + j)] = out[(k, l)];
                    }
                }
            }
        }
        Self {
            in_dim,
            out_dim,
            super_mat: s,
            kraus: None,
            choi_cache: OnceLock::new(),
        }
    }

    pub fn identity(d: usize) -> Self {
        Self::from_kraus(vec![CMatrix::identity(d)]).expect("identity Kraus")
    }

    pub fn unitary(u: &CMatrix) -> Result<Self> {
        Self::from_kraus(vec![u.clone()])
    }

    /// X -> A X A* (single-Kraus conjugation; CP for any A).
    pub fn sandwich(a: &CMatrix) -> Self {
        Self::from_kraus(vec![a.clone()]).expect("sandwich Kraus")
    }

    /// X -> Tr(X) omega for a fixed output state.
    pub fn fixed_output(omega: &DensityOperator, in_dim: usize) -> Self {
        let d_out = omega.dim();
        let eig = omega.spectral().raw_eigen();
        let mut kraus = Vec::new();
        for k in 0..d_out {
            let lam = eig.values[k];
            if lam <= 0.0 {
                continue;
            }
            for j in 0..in_dim {
                kraus.push(CMatrix::from_fn(d_out, in_dim, |r, c| {
                    if c == j {
                        eig.vectors[(r, k)] * lam.sqrt()
                    } else {
                        c64(0.0, 0.0)
                    }
                }));
            }
        }
        Self::from_kraus(kraus).expect("fixed output Kraus")
    }

    /// Convex mixture; Kraus families merge as sqrt-weighted unions when all
    /// components carry one.
    pub fn mixture(parts: &[(f64, &Channel)]) -> Result<Self> {
        assert!(!parts.is_empty());
        let (in_dim, out_dim) = (parts[0].1.in_dim, parts[0].1.out_dim);
        let mut s = CMatrix::zeros(out_dim * out_dim, in_dim * in_dim);
        let mut kraus = Some(Vec::new());
        for (w, ch) in parts {
            if ch.in_dim != in_dim || ch.out_dim != out_dim {
                return Err(Error::DimensionMismatch {
                    context: "mixture component dims",
                    lhs: ch.in_dim,
                    rhs: in_dim,
                });
            }
            s = &s + &ch.super_mat.scale_re(*w);
            match (&mut kraus, &ch.kraus) {
                (Some(acc), Some(ks)) => {
                    acc.extend(ks.iter().map(|k| k.scale_re(w.sqrt())));
                }
                _ => kraus = None,
            }
        }
        Ok(Self {
            in_dim,
            out_dim,
            super_mat: s,
            kraus,
            choi_cache: OnceLock::new(),
        })
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn super_matrix(&self) -> &CMatrix {
        &self.super_mat
    }

    pub fn kraus(&self) -> Option<&[CMatrix]> {
        self.kraus.as_deref()
    }

    pub fn apply(&self, x: &CMatrix) -> CMatrix {
        assert_eq!(x.rows(), self.in_dim, "channel input dimension");
        if let Some(ks) = &self.kraus {
            let mut out = CMatrix::zeros(self.out_dim, self.out_dim);
            for k in ks {
                out = &out + &(&(k * x) * &k.adjoint());
            }
            return out;
        }
        let v = &self.super_mat * &x.vec_row_major();
        CMatrix::unvec_row_major(&v, self.out_dim, self.out_dim)
    }

    pub fn apply_to_state(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        DensityOperator::new(self.apply(rho.matrix()).hermitize())
    }

    /// Hilbert-Schmidt adjoint: <a, T(b)> = <T*(a), b>.
    pub fn adjoint(&self) -> Self {
        Self {
            in_dim: self.out_dim,
            out_dim: self.in_dim,
            super_mat: self.super_mat.adjoint(),
            kraus: self
                .kraus
                .as_ref()
                .map(|ks| ks.iter().map(|k| k.adjoint()).collect()),
            choi_cache: OnceLock::new(),
        }
    }

    /// self after `inner` (function composition self . inner).
    pub fn compose(&self, inner: &Channel) -> Result<Self> {
        if inner.out_dim != self.in_dim {
            return Err(Error::DimensionMismatch {
                context: "composition inner/outer dims",
                lhs: inner.out_dim,
                rhs: self.in_dim,
            });
        }
        let kraus = match (&self.kraus, &inner.kraus) {
            (Some(a), Some(b)) if a.len() * b.len() <= 256 => Some(
                a.iter()
                    .flat_map(|ka| b.iter().map(move |kb| ka * kb))
                    .collect(),
            ),
            _ => None,
        };
        Ok(Self {
            in_dim: inner.in_dim,
            out_dim: self.out_dim,
            super_mat: &self.super_mat * &inner.super_mat,
            kraus,
            choi_cache: OnceLock::new(),
        })
    }

    /// Tensor product channel (A (x) B)(X (x) Y) = A(X) (x) B(Y).
    pub fn kron(a: &Channel, b: &Channel) -> Self {
        match (&a.kraus, &b.kraus) {
            (Some(ka), Some(kb)) if ka.len() * kb.len() <= 256 => {
                let ks = ka
                    .iter()
                    .flat_map(|x| kb.iter().map(move |y| x.kron(y)))
                    .collect();
                Self::from_kraus(ks).expect("kron Kraus")
            }
            _ => {
                let (ain, bin) = (a.in_dim, b.in_dim);
                Self::from_apply(ain * bin, a.out_dim * b.out_dim, |e| {
                    // split E over the tensor factors and push each through
                    let mut out = CMatrix::zeros(a.out_dim * b.out_dim, a.out_dim * b.out_dim);
                    for i in 0..ain {
                        for j in 0..ain {
                            let mut eb = CMatrix::zeros(bin, bin);
                            let mut nonzero = false;
                            for k in 0..bin {
                                for l in 0..bin {
                                    let v = e[(i * bin + k, j * bin + l)];
                                    if v.norm_sqr() > 0.0 {
                                        nonzero = true;
                                    }
                                    eb[(k, l)] = v;
                                }
                            }
                            if !nonzero {
                                continue;
                            }
                            let mut ea = CMatrix::zeros(ain, ain);
                            ea[(i, j)] = c64(1.0, 0.0);
                            out = &out + &a.apply(&ea).kron(&b.apply(&eb));
                        }
                    }
                    out
                })
            }
        }
    }

    /// Choi matrix sum_ij E_ij (x) T(E_ij), cached.
    pub fn choi(&self) -> &CMatrix {
        self.choi_cache.get_or_init(|| {
            let (din, dout) = (self.in_dim, self.out_dim);
            let mut c = CMatrix::zeros(din * dout, din * dout);
            for i in 0..din {
                for j in 0..din {
                    for k in 0..dout {
                        for l in 0..dout {
                            c[(i * dout + k, j * dout + l)] =
                                self.super_mat[(k * dout + l, i * din + j)];
                        }
                    }
                }
            }
            c
        })
    }

    /// Residual of trace preservation: || T*(1) - 1 ||_F.
    pub fn tp_residual(&self) -> f64 {
        let back = &self.super_mat.adjoint() * &CMatrix::identity(self.out_dim).vec_row_major();
        (&CMatrix::unvec_row_major(&back, self.in_dim, self.in_dim)
            - &CMatrix::identity(self.in_dim))
            .frobenius_norm()
    }

    /// Residual of unitality: || T(1) - 1 ||_F.
    pub fn unital_residual(&self) -> f64 {
        (&self.apply(&CMatrix::identity(self.in_dim)) - &CMatrix::identity(self.out_dim))
            .frobenius_norm()
    }

    pub fn is_trace_preserving(&self) -> bool {
        self.tp_residual() <= 1e-8 * self.in_dim as f64
    }

    pub fn is_unital(&self) -> bool {
        self.unital_residual() <= 1e-8 * self.out_dim as f64
    }

    /// Minimum eigenvalue of the Choi matrix; >= -atol*scale certifies CP.
    pub fn choi_min_eigenvalue(&self) -> Result<f64> {
        Ok(hermitian_spectral(&self.choi().hermitize(), None)?.min_eigenvalue())
    }

    pub fn is_completely_positive(&self) -> Result<bool> {
        let c = self.choi();
        let scale = c.max_abs().max(1.0);
        if c.hermitian_deviation() > tol::ATOL * scale {
            return Ok(false);
        }
        Ok(self.choi_min_eigenvalue()? >= -tol::ATOL * scale)
    }

    /// Kraus family from the Choi eigendecomposition; requires CP within atol.
    pub fn kraus_decomposition(&self) -> Result<Vec<CMatrix>> {
        let c = self.choi();
        let scale = c.max_abs().max(1.0);
        let dec = hermitian_spectral(&c.hermitize(), None)?;
        if dec.min_eigenvalue() < -tol::ATOL * scale {
            return Err(Error::NotPositive {
                min_eig: dec.min_eigenvalue(),
            });
        }
        let eig = dec.raw_eigen();
        let mut out = Vec::new();
        for k in 0..eig.values.len() {
            let lam = eig.values[k];
            if lam <= dec.support_cutoff() {
                continue;
            }
            // Choi vector (i,k) layout -> Kraus K[k][i]
            out.push(CMatrix::from_fn(self.out_dim, self.in_dim, |r, c_| {
                eig.vectors[(c_ * self.out_dim + r, k)] * lam.sqrt()
            }));
        }
        Ok(out)
    }

    /// Petz dual at rho: b -> T(rho)^{-1/2} T(rho^{1/2} b rho^{1/2}) T(rho)^{-1/2}.
    /// Unital Schwarz map whenever T is a 2-positive channel; inverses are on
    /// supports, so compressed inputs work unchanged.
    pub fn petz_dual(&self, rho: &DensityOperator) -> Result<Channel> {
        let t_rho = self.apply_to_state(rho)?;
        let left = Channel::sandwich(&t_rho.inv_sqrt());
        let right = Channel::sandwich(&rho.sqrt());
        left.compose(self)?.compose(&right)
    }

    /// Petz recovery channel at rho: the adjoint of the dual,
    /// y -> rho^{1/2} T*(T(rho)^{-1/2} y T(rho)^{-1/2}) rho^{1/2}.
    /// Trace preserving on the support of T(rho); completely positive when T is.
    pub fn petz_recovery(&self, rho: &DensityOperator) -> Result<Channel> {
        let t_rho = self.apply_to_state(rho)?;
        let outer = Channel::sandwich(&rho.sqrt());
        let inner = Channel::sandwich(&t_rho.inv_sqrt());
        outer.compose(&self.adjoint())?.compose(&inner)
    }

    /// Compresses the channel to (supp rho) -> (supp T(rho)).
    pub fn restrict_to_support(&self, rho: &DensityOperator) -> Result<SupportCompression> {
        let t_rho = self.apply_to_state(rho)?;
        let v = support_isometry(rho.spectral());
        let w = support_isometry(t_rho.spectral());
        let compressed = Channel::from_apply(v.cols(), w.cols(), |x| {
            let big = &(&v * x) * &v.adjoint();
            let out = self.apply(&big);
            &(&w.adjoint() * &out) * &w
        });
        let rho_c = DensityOperator::new((&(&v.adjoint() * rho.matrix()) * &v).hermitize())?;
        Ok(SupportCompression {
            channel: compressed,
            rho: rho_c,
            v,
            w,
        })
    }
}

/// Columns = eigenvectors above the support cutoff.
fn support_isometry(dec: &SpectralDecomposition<f64>) -> CMatrix {
    let cutoff = dec.support_cutoff();
    let eig = dec.raw_eigen();
    let cols: Vec<CMatrix> = (0..eig.values.len())
        .filter(|&k| eig.values[k] > cutoff)
        .map(|k| eig.vectors.column(k))
        .collect();
    CMatrix::from_columns(&cols)
}

/// A channel compressed to the supports of rho and T(rho), with the isometries
/// needed to move states and recovery maps between the ambient and compressed
/// pictures.
#[derive(Clone, Debug)]
pub struct SupportCompression {
    pub channel: Channel,
    pub rho: DensityOperator,
    /// ambient-in x r isometry onto supp rho
    pub v: CMatrix,
    /// ambient-out x r' isometry onto supp T(rho)
    pub w: CMatrix,
}

impl SupportCompression {
    /// Compresses a state supported inside supp rho.
    pub fn compress_state(&self, sigma: &DensityOperator) -> Result<DensityOperator> {
        let p = &self.v * &self.v.adjoint();
        let leak = sigma.matrix().trace().re - (&p * &(sigma.matrix() * &p)).trace().re;
        if leak.abs() > 1e-9 * sigma.dim() as f64 {
            return Err(Error::SupportViolation(format!(
                "state leaks {leak:e} outside supp rho"
            )));
        }
        DensityOperator::new((&(&self.v.adjoint() * sigma.matrix()) * &self.v).hermitize())
    }

    pub fn embed_state(&self, sigma: &DensityOperator) -> Result<DensityOperator> {
        DensityOperator::new((&(&self.v * sigma.matrix()) * &self.v.adjoint()).hermitize())
    }

    /// Extends a compressed recovery channel to the ambient output space:
    /// S(b) = V S~(W* b W) V* + Tr(b (1 - W W*)) rho_ambient.
    pub fn extend_recovery(
        &self,
        compressed: &Channel,
        rho_ambient: &DensityOperator,
    ) -> Result<Channel> {
        if compressed.in_dim() != self.w.cols() || compressed.out_dim() != self.v.cols() {
            return Err(Error::DimensionMismatch {
                context: "compressed recovery dims vs isometries",
                lhs: compressed.in_dim(),
                rhs: self.w.cols(),
            });
        }
        let d_out_ambient = self.w.rows();
        let d_in_ambient = self.v.rows();
        let q = &self.w * &self.w.adjoint();
        let ch = Channel::from_apply(d_out_ambient, d_in_ambient, |b| {
            let small = &(&self.w.adjoint() * b) * &self.w;
            let main = &(&self.v * &compressed.apply(&small)) * &self.v.adjoint();
            let missing = b.trace() - (&q * &(b * &q)).trace();
            &main + &rho_ambient.matrix().scale(missing)
        });
        Ok(ch)
    }
}

/// Positivity and Schwarz certificate for a channel. Sampled fields certify
/// failure only; `true` means no violation was found at the given sample size.
#[derive(Clone, Debug, Serialize)]
pub struct PositivityReport {
    pub completely_positive: bool,
    pub two_positive: bool,
    /// No sampled violation of the Schwarz inequality for the adjoint map
    /// (the unital direction when the channel is trace preserving).
    pub schwarz_sampled: bool,
    pub trace_preserving: bool,
    pub adjoint_unital: bool,
    /// Adjoint faithful: T(rho) invertible at a random invertible rho.
    pub faithful_adjoint: bool,
    pub choi_min_eigenvalue: f64,
    pub two_positive_min_eigenvalue: f64,
    pub worst_schwarz_violation: f64,
    pub samples: usize,
    pub seed: u64,
}

/// Worst Schwarz defect of `map` at `a`: the most negative eigenvalue of
/// map(a* a) - map(a)* map(a), clamped to 0 when the inequality holds.
pub fn schwarz_violation(map: &Channel, a: &CMatrix) -> Result<f64> {
    let lhs = map.apply(&(&a.adjoint() * a));
    let m = map.apply(a);
    let rhs = &m.adjoint() * &m;
    let diff = (&lhs - &rhs).hermitize();
    let min = hermitian_spectral(&diff, None)?.min_eigenvalue();
    Ok((-min).max(0.0))
}

impl Channel {
    /// Builds the positivity certificate: exact CP/2-positivity via Choi
    /// spectra, sampled Schwarz for the adjoint, flags, and Lemma-style
    /// faithfulness of the adjoint via invertibility at one random state.
    pub fn positivity_report(&self, samples: usize, seed: u64) -> Result<PositivityReport> {
        let choi_scale = self.choi().max_abs().max(1.0);
        let choi_min = self.choi_min_eigenvalue()?;
        let two = Channel::kron(&Channel::identity(2), self);
        let two_scale = two.choi().max_abs().max(1.0);
        let two_min = two.choi_min_eigenvalue()?;

        let adj = self.adjoint();
        let mut s = Sampler::new(seed);
        let mut worst: f64 = 0.0;
        for _ in 0..samples {
            let g = s.ginibre(self.out_dim, self.out_dim);
            let a = g.scale_re(1.0 / g.frobenius_norm().max(1e-300));
            worst = worst.max(schwarz_violation(&adj, &a)?);
        }

        let rho = DensityOperator::new(s.invertible_state(self.in_dim, 0.02))?;
        let t_rho = self.apply(rho.matrix()).hermitize();
        let dec = hermitian_spectral(&t_rho, None)?;
        let faithful = dec.min_eigenvalue() > dec.support_cutoff();

        Ok(PositivityReport {
            completely_positive: choi_min >= -tol::ATOL * choi_scale,
            two_positive: two_min >= -tol::ATOL * two_scale,
            schwarz_sampled: worst <= 1e-9,
            trace_preserving: self.is_trace_preserving(),
            adjoint_unital: self.adjoint().unital_residual() <= 1e-8 * self.in_dim as f64,
            faithful_adjoint: faithful,
            choi_min_eigenvalue: choi_min,
            two_positive_min_eigenvalue: two_min,
            worst_schwarz_violation: worst,
            samples,
            seed,
        })
    }

    /// Sampled check of T(a* c^{-1} a) >= T(a)* T(c)^{-1} T(a) for positive
    /// invertible c; inverses on the output side use the support convention.
    pub fn generalized_schwarz_check(
        &self,
        c: &CMatrix,
        samples: usize,
        seed: u64,
    ) -> Result<GeneralizedSchwarzReport> {
        let c_dec = hermitian_spectral(c, None)?;
        if c_dec.min_eigenvalue() <= c_dec.support_cutoff() {
            return Err(Error::NotInvertible(
                "generalized Schwarz reference c must be positive invertible".into(),
            ));
        }
        let c_inv = c_dec.power_on_support(-1.0);
        let tc_dec = hermitian_spectral(&self.apply(c).hermitize(), None)?;
        let tc_inv = tc_dec.power_on_support(-1.0);
        let mut s = Sampler::new(seed);
        let mut worst: f64 = 0.0;
        let mut worst_index = 0usize;
        for k in 0..samples {
            let g = s.ginibre(self.in_dim, self.in_dim);
            let a = g.scale_re(1.0 / g.frobenius_norm().max(1e-300));
            let lhs = self.apply(&(&(&a.adjoint() * &c_inv) * &a));
            let ta = self.apply(&a);
            let rhs = &(&ta.adjoint() * &tc_inv) * &ta;
            let min = hermitian_spectral(&(&lhs - &rhs).hermitize(), None)?.min_eigenvalue();
            if -min > worst {
                worst = -min;
                worst_index = k;
            }
        }
        Ok(GeneralizedSchwarzReport {
            holds: worst <= 1e-9,
            worst_violation: worst,
            worst_sample_index: worst_index,
            samples,
            seed,
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GeneralizedSchwarzReport {
    pub holds: bool,
    pub worst_violation: f64,
    pub worst_sample_index: usize,
    pub samples: usize,
    pub seed: u64,
}
