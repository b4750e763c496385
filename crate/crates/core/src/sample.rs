//! Seeded random fixtures: Ginibre states, Haar-ish unitaries, Kraus channels.
//!
//! Everything is driven by an explicit ChaCha stream so every sampled
//! certificate and test instance is reproducible from its seed.

use crate::{c64, C64, CMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

pub struct Sampler {
    rng: ChaCha12Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha12Rng::seed_from_u64(seed),
        }
    }

    pub fn gaussian(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Standard complex Gaussian entry (unit variance per real component).
    pub fn c_gaussian(&mut self) -> C64 {
        c64(self.gaussian(), self.gaussian())
    }

    pub fn ginibre(&mut self, rows: usize, cols: usize) -> CMatrix {
        CMatrix::from_fn(rows, cols, |_, _| self.c_gaussian())
    }

    pub fn hermitian(&mut self, d: usize) -> CMatrix {
        self.ginibre(d, d).hermitize()
    }

    pub fn traceless_hermitian(&mut self, d: usize) -> CMatrix {
        let h = self.hermitian(d);
        let shift = h.trace().re / d as f64;
        &h - &CMatrix::identity(d).scale_re(shift)
    }

    /// Ginibre-induced random density matrix (full rank almost surely).
    pub fn state(&mut self, d: usize) -> CMatrix {
        let g = self.ginibre(d, d);
        let w = &g * &g.adjoint();
        w.scale_re(1.0 / w.trace().re)
    }

    /// Random state mixed toward the maximally mixed one so that
    /// min eigenvalue >= floor (requires floor <= 1/d).
    pub fn invertible_state(&mut self, d: usize, floor: f64) -> CMatrix {
        assert!(floor * d as f64 <= 1.0, "eigenvalue floor too large");
        let alpha = floor * d as f64;
        let rho = self.state(d);
        &rho.scale_re(1.0 - alpha) + &CMatrix::identity(d).scale_re(alpha / d as f64)
    }

    /// Rank-deficient PSD state supported on a random subspace.
    pub fn rank_deficient_state(&mut self, d: usize, rank: usize) -> CMatrix {
        assert!(rank >= 1 && rank < d);
        let v = self.isometry(d, rank);
        let inner = self.state(rank);
        &(&v * &inner) * &v.adjoint()
    }

    /// Haar-distributed-enough unitary: Gram-Schmidt of a Ginibre matrix.
    pub fn unitary(&mut self, d: usize) -> CMatrix {
        self.isometry(d, d)
    }

    /// Isometry with orthonormal columns, rows >= cols.
    pub fn isometry(&mut self, rows: usize, cols: usize) -> CMatrix {
        assert!(rows >= cols);
        let g = self.ginibre(rows, cols);
        mgs_columns(&g)
    }

    /// Rank-r orthogonal projection with Haar-random range.
    pub fn projection(&mut self, d: usize, rank: usize) -> CMatrix {
        assert!(rank <= d);
        if rank == 0 {
            return CMatrix::zeros(d, d);
        }
        let v = self.isometry(d, rank);
        &v * &v.adjoint()
    }

    /// Kraus family of a random channel: slices of a Stinespring isometry
    /// V : in -> out (x) env, so sum K* K = 1 exactly up to orthonormalization.
    pub fn kraus_channel(&mut self, d_in: usize, d_out: usize, n_kraus: usize) -> Vec<CMatrix> {
        assert!(d_out * n_kraus >= d_in, "Stinespring isometry needs out*env >= in");
        let v = self.isometry(d_out * n_kraus, d_in);
        (0..n_kraus)
            .map(|k| CMatrix::from_fn(d_out, d_in, |i, j| v[(k * d_out + i, j)]))
            .collect()
    }
}

/// Modified Gram-Schmidt with a re-orthogonalization pass; input columns are
/// almost surely independent here, so no pivoting is needed.
fn mgs_columns(m: &CMatrix) -> CMatrix {
    let mut out = m.clone();
    for j in 0..out.cols() {
        for _pass in 0..2 {
            for k in 0..j {
                let ck = out.column(k);
                let cj = out.column(j);
                let coef = ck.hs_inner(&cj);
                let newc = &cj - &ck.scale(coef);
                out.set_column(j, &newc);
            }
        }
        let cj = out.column(j);
        let n = cj.frobenius_norm();
        assert!(n > 1e-12, "Gram-Schmidt hit a dependent column");
        out.set_column(j, &cj.scale_re(1.0 / n));
    }
    out
}
