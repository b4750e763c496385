//! Finite-dimensional *-algebras of matrices: generation, commutants, trace
//! conditional expectations, and the decomposition of a *-algebra into full
//! matrix blocks with multiplicity.
//!
//! An algebra is held as a Hilbert-Schmidt orthonormal basis of its span.
//! Membership and closure checks are numerical with explicit tolerances.

use crate::channels::Channel;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_spectral, orthonormalize_hs};
use crate::sample::Sampler;
use crate::{c64, tol, CMatrix};

/// Span of matrices with an HS-orthonormal basis.
#[derive(Clone, Debug)]
pub struct AlgebraBasis {
    dim: usize,
    basis: Vec<CMatrix>,
}

const DROP_TOL: f64 = 1e-9;

impl AlgebraBasis {
    /// Orthonormalizes the span of `mats`. Does not verify closure; use
    /// `generated_algebra` to close a set of generators.
    pub fn from_span(mats: &[CMatrix], dim: usize) -> Result<Self> {
        for m in mats {
            if m.rows() != dim || m.cols() != dim {
                return Err(Error::DimensionMismatch {
                    context: "algebra element shape",
                    lhs: m.rows(),
                    rhs: dim,
                });
            }
        }
        let basis = orthonormalize_hs(mats, DROP_TOL);
        if basis.is_empty() {
            return Err(Error::DomainError("algebra span is zero".into()));
        }
        Ok(Self { dim, basis })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn basis(&self) -> &[CMatrix] {
        &self.basis
    }

    /// Orthogonal projection of x onto the span.
    pub fn project(&self, x: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim, self.dim);
        for b in &self.basis {
            out = &out + &b.scale(b.hs_inner(x));
        }
        out
    }

    /// Distance from x to the span, relative to ||x||.
    pub fn membership_residual(&self, x: &CMatrix) -> f64 {
        let n = x.frobenius_norm();
        if n == 0.0 {
            return 0.0;
        }
        (x - &self.project(x)).frobenius_norm() / n
    }

    pub fn contains(&self, x: &CMatrix, rel_tol: f64) -> bool {
        self.membership_residual(x) <= rel_tol
    }

    pub fn contains_identity(&self) -> bool {
        self.contains(&CMatrix::identity(self.dim), tol::MEMBERSHIP_TOL)
    }

    /// Closure under adjoints and products, within an absolute tolerance.
    /// Basis elements are unit norm, so products stay O(1) and near-zero
    /// products (orthogonal block pieces) do not blow up a relative check.
    pub fn is_star_algebra(&self, abs_tol: f64) -> bool {
        let dist = |x: &CMatrix| (x - &self.project(x)).frobenius_norm();
        for a in &self.basis {
            if dist(&a.adjoint()) > abs_tol {
                return false;
            }
            for b in &self.basis {
                if dist(&(a * b)) > abs_tol {
                    return false;
                }
            }
        }
        true
    }

    /// Trace-orthogonal conditional expectation onto the span: the channel
    /// x -> sum_i b_i <b_i, x>. Self-adjoint; for a unital *-subalgebra this
    /// is the trace-preserving conditional expectation.
    pub fn trace_conditional_expectation(&self) -> Channel {
        let d2 = self.dim * self.dim;
        let mut s = CMatrix::zeros(d2, d2);
        for b in &self.basis {
            let v = b.vec_row_major();
            s = &s + &(&v * &v.adjoint());
        }
        Channel::from_super(s, self.dim, self.dim).expect("expectation super shape")
    }
}

/// Smallest *-algebra containing the generators and the identity, built by
/// closing under adjoints and products.
pub fn generated_algebra(generators: &[CMatrix], dim: usize) -> Result<AlgebraBasis> {
    let mut seed: Vec<CMatrix> = vec![CMatrix::identity(dim)];
    for g in generators {
        if g.rows() != dim || g.cols() != dim {
            return Err(Error::DimensionMismatch {
                context: "generator shape",
                lhs: g.rows(),
                rhs: dim,
            });
        }
        seed.push(g.clone());
        seed.push(g.adjoint());
    }
    let mut alg = AlgebraBasis::from_span(&seed, dim)?;
    let max_rounds = dim * dim + 2;
    for _ in 0..max_rounds {
        let mut extended = alg.basis.clone();
        let before = alg.len();
        for a in &alg.basis {
            for b in &alg.basis {
                extended.push(a * b);
            }
        }
        let next = AlgebraBasis::from_span(&extended, dim)?;
        if next.len() == before {
            return Ok(next);
        }
        alg = next;
    }
    Err(Error::ClosureNotReached {
        rounds: max_rounds,
        dim,
    })
}

/// Commutant of the span of `mats`: all x with [x, m] = 0. Found as the
/// kernel of the PSD form sum_i L_i* L_i with L_i = M_i (x) 1 - 1 (x) M_i^T;
/// its kernel eigenvalues sit at rounding level while nonzero commutators
/// contribute O(1), so the squared form loses no usable precision here.
pub fn commutant(mats: &[CMatrix], dim: usize) -> Result<AlgebraBasis> {
    let d2 = dim * dim;
    let id = CMatrix::identity(dim);
    let mut gram = CMatrix::zeros(d2, d2);
    let mut scale = 0.0f64;
    for m in mats {
        let l = &m.kron(&id) - &id.kron(&m.transpose());
        gram = &gram + &(&l.adjoint() * &l);
        scale = scale.max(m.max_abs());
    }
    let dec = hermitian_spectral(&gram.hermitize(), None)?;
    let cut = 1e-18_f64.max(1e-12 * dec.spectral_radius());
    let eig = dec.raw_eigen();
    let mut kernel = Vec::new();
    for k in 0..eig.values.len() {
        if eig.values[k].abs() <= cut {
            kernel.push(CMatrix::unvec_row_major(&eig.vectors.column(k), dim, dim));
        }
    }
    if kernel.is_empty() {
        return Err(Error::NumericalFailure(
            "commutant search returned an empty span (identity always commutes)".into(),
        ));
    }
    AlgebraBasis::from_span(&kernel, dim)
}

/// Center of an algebra: elements of the span commuting with every basis
/// element. Solved in the coefficient space of the span, so mixing between
/// central and non-central directions in any ambient basis is irrelevant.
pub fn center(alg: &AlgebraBasis) -> Result<AlgebraBasis> {
    let m = alg.len();
    let mut gram = CMatrix::zeros(m, m);
    for b in alg.basis() {
        // L maps coefficients c to vec([sum_i c_i a_i, b]) for this b
        let mut l = CMatrix::zeros(alg.dim() * alg.dim(), m);
        for (i, a) in alg.basis().iter().enumerate() {
            l.set_column(i, &a.commutator(b).vec_row_major());
        }
        gram = &gram + &(&l.adjoint() * &l);
    }
    let dec = hermitian_spectral(&gram.hermitize(), None)?;
    let cut = 1e-18_f64.max(1e-12 * dec.spectral_radius());
    let eig = dec.raw_eigen();
    let mut candidates = Vec::new();
    for k in 0..eig.values.len() {
        if eig.values[k].abs() <= cut {
            let mut z = CMatrix::zeros(alg.dim(), alg.dim());
            for (i, a) in alg.basis().iter().enumerate() {
                z = &z + &a.scale(eig.vectors[(i, k)]);
            }
            candidates.push(z);
        }
    }
    AlgebraBasis::from_span(&candidates, alg.dim())
}

/// Invariance of the span under x -> rho^{it} x rho^{-it} over a time grid.
#[derive(Clone, Debug)]
pub struct ModularInvariance {
    pub max_residual: f64,
    pub holds: bool,
}

pub fn modular_invariance_check(
    rho: &crate::channels::DensityOperator,
    alg: &AlgebraBasis,
    t_grid: &[f64],
) -> ModularInvariance {
    let mut worst = 0.0f64;
    for &t in t_grid {
        let u = rho.unitary_power(t);
        let u_adj = u.adjoint();
        for b in alg.basis() {
            let moved = &(&u * b) * &u_adj;
            worst = worst.max(alg.membership_residual(&moved));
        }
    }
    ModularInvariance {
        max_residual: worst,
        holds: worst <= tol::MEMBERSHIP_TOL,
    }
}

/// A *-algebra expressed as a direct sum of full matrix blocks with
/// multiplicity: conjugating by `unitary` sends every element to
/// diag(A_1 (x) 1_{m_1}, ..., A_r (x) 1_{m_r}, 0_{kernel_dim}).
#[derive(Clone, Debug)]
pub struct BlockStructure {
    /// (n_k, m_k) per block: factor size and multiplicity.
    pub blocks: Vec<(usize, usize)>,
    /// Columns ordered block by block; within a block index (i, j) with i the
    /// factor row and j the multiplicity slot maps to column i*m + j.
    pub unitary: CMatrix,
    /// Dimension of the corner annihilated by the algebra (unit < identity).
    pub kernel_dim: usize,
    /// Worst deviation of a basis element from the block-tensor pattern.
    pub residual: f64,
}

impl BlockStructure {
    /// Conjugates x into the block frame.
    pub fn to_block_frame(&self, x: &CMatrix) -> CMatrix {
        &(&self.unitary.adjoint() * x) * &self.unitary
    }

    /// Deviation of x (in the ambient frame) from the block-tensor pattern.
    pub fn pattern_residual(&self, x: &CMatrix) -> f64 {
        let m = self.to_block_frame(x);
        let mut pattern = CMatrix::zeros(m.rows(), m.cols());
        let mut off = 0usize;
        for &(n, mult) in &self.blocks {
            // average the multiplicity slices to extract the factor
            let mut a = CMatrix::zeros(n, n);
            for i in 0..n {
                for ip in 0..n {
                    let mut acc = c64(0.0, 0.0);
                    for j in 0..mult {
                        acc += m[(off + i * mult + j, off + ip * mult + j)];
                    }
                    a[(i, ip)] = acc.scale(1.0 / mult as f64);
                }
            }
            for i in 0..n {
                for ip in 0..n {
                    for j in 0..mult {
                        pattern[(off + i * mult + j, off + ip * mult + j)] = a[(i, ip)];
                    }
                }
            }
            off += n * mult;
        }
        (&m - &pattern).frobenius_norm()
    }
}

/// Decomposes a unital-or-not *-algebra into matrix blocks with multiplicity,
/// producing the conjugating unitary. Deterministic: generic elements are
/// drawn from a fixed-seed stream with bounded retries.
pub fn structure_decomposition(alg: &AlgebraBasis) -> Result<BlockStructure> {
    if !alg.is_star_algebra(1e-7) {
        return Err(Error::NotAnAlgebra(
            "span is not closed under products and adjoints".into(),
        ));
    }
    let d = alg.dim();

    // unit of the algebra = support of sum_i b_i b_i*
    let mut gram = CMatrix::zeros(d, d);
    for b in alg.basis() {
        gram = &gram + &(b * &b.adjoint());
    }
    let gram_dec = hermitian_spectral(&gram.hermitize(), None)?;
    let cutoff = gram_dec.support_cutoff();
    let eig = gram_dec.raw_eigen();
    let mut range_cols = Vec::new();
    let mut kernel_cols = Vec::new();
    for k in 0..d {
        if eig.values[k] > cutoff {
            range_cols.push(eig.vectors.column(k));
        } else {
            kernel_cols.push(eig.vectors.column(k));
        }
    }
    let kernel_dim = kernel_cols.len();
    let v_e = CMatrix::from_columns(&range_cols);
    let de = v_e.cols();

    // compress onto the unit's range; the compressed algebra is unital
    let compressed: Vec<CMatrix> = alg
        .basis()
        .iter()
        .map(|b| &(&v_e.adjoint() * b) * &v_e)
        .collect();
    let calg = AlgebraBasis::from_span(&compressed, de)?;

    let zcenter = center(&calg)?;
    let central_projections = minimal_central_projections(&zcenter, de)?;

    // per-factor frames
    let mut blocks = Vec::new();
    let mut columns: Vec<CMatrix> = Vec::new();
    for p in &central_projections {
        let p_dec = hermitian_spectral(p, None)?;
        let p_eig = p_dec.raw_eigen();
        let cols: Vec<CMatrix> = (0..de)
            .filter(|&k| p_eig.values[k] > 0.5)
            .map(|k| p_eig.vectors.column(k))
            .collect();
        let vk = CMatrix::from_columns(&cols);
        let rk = vk.cols();
        let factor: Vec<CMatrix> = calg
            .basis()
            .iter()
            .map(|b| &(&vk.adjoint() * b) * &vk)
            .collect();
        let falg = AlgebraBasis::from_span(&factor, rk)?;
        let n2 = falg.len();
        let n = (n2 as f64).sqrt().round() as usize;
        if n * n != n2 || rk % n != 0 {
            return Err(Error::NotAnAlgebra(format!(
                "central block of size {rk} spans dimension {n2}, not a full factor"
            )));
        }
        let mult = rk / n;
        let uk = factor_frame(&falg, n, mult)?;
        // ambient columns for this block
        for c in 0..rk {
            columns.push(&v_e * &(&vk * &uk.column(c)));
        }
        blocks.push((n, mult));
    }
    // deterministic block order: by (n, m) descending then by first column
    // ordering is already fixed by the central projection order

    for kc in kernel_cols {
        columns.push(kc);
    }
    let unitary = CMatrix::from_columns(&columns);

    let mut structure = BlockStructure {
        blocks,
        unitary,
        kernel_dim,
        residual: 0.0,
    };
    let mut worst = 0.0f64;
    for b in alg.basis() {
        worst = worst.max(structure.pattern_residual(b));
    }
    structure.residual = worst;
    if worst > 1e-7 {
        return Err(Error::NumericalDegeneracy(format!(
            "block pattern residual {worst:e} after decomposition"
        )));
    }
    Ok(structure)
}

/// Minimal projections of a commutative *-algebra with unit, via the grouped
/// spectrum of a generic Hermitian element. Retries with fresh coefficients
/// when eigenvalues collide.
fn minimal_central_projections(zc: &AlgebraBasis, dim: usize) -> Result<Vec<CMatrix>> {
    // Hermitian real basis of the center
    let mut herm = Vec::new();
    for c in zc.basis() {
        herm.push(c.hermitize());
        herm.push(c.scale(c64(0.0, 1.0)).hermitize());
    }
    let herm = crate::linalg::orthonormalize_hermitian_real(&herm, 1e-9);
    let m = herm.len();
    if m != zc.len() {
        return Err(Error::NumericalDegeneracy(format!(
            "center has {} complex dimensions but {} Hermitian ones",
            zc.len(),
            m
        )));
    }
    let mut sampler = Sampler::new(0x5eed_a16e_b7a5_0001);
    for _attempt in 0..8 {
        let mut z = CMatrix::zeros(dim, dim);
        for h in &herm {
            z = &z + &h.scale_re(sampler.gaussian());
        }
        let dec = hermitian_spectral(&z.hermitize(), Some(1e-8 * z.max_abs().max(1.0)))?;
        if dec.eigenvalues.len() != m {
            continue;
        }
        // eigenprojections of a generic element are the minimal projections
        let mut projs = dec.projections.clone();
        // deterministic order: descending eigenvalue is already fixed; re-sort
        // by (rank, then trace of index weighting) for stability across runs
        projs.sort_by(|a, b| {
            let ra = a.trace().re;
            let rb = b.trace().re;
            ra.partial_cmp(&rb)
                .unwrap()
                .then_with(|| first_support_index(a).cmp(&first_support_index(b)))
        });
        // verify resolution of identity and membership
        let mut sum = CMatrix::zeros(dim, dim);
        for p in &projs {
            sum = &sum + p;
        }
        if (&sum - &CMatrix::identity(dim)).frobenius_norm() > 1e-8 * dim as f64 {
            continue;
        }
        let ok = projs.iter().all(|p| zc.contains(p, 1e-6));
        if ok {
            return Ok(projs);
        }
    }
    Err(Error::NumericalDegeneracy(
        "could not separate minimal central projections".into(),
    ))
}

fn first_support_index(p: &CMatrix) -> usize {
    for i in 0..p.rows() {
        if p[(i, i)].re > 0.1 {
            return i;
        }
    }
    p.rows()
}

/// Frame for a single full factor M_n (x) 1_m inside its own r = n*m space:
/// returns the r x r unitary whose columns realize the tensor ordering.
fn factor_frame(falg: &AlgebraBasis, n: usize, mult: usize) -> Result<CMatrix> {
    let r = n * mult;
    if n == 1 {
        // abelian factor: scalars, any orthonormal frame works
        return Ok(CMatrix::identity(r));
    }
    let mut herm = Vec::new();
    for c in falg.basis() {
        herm.push(c.hermitize());
        herm.push(c.scale(c64(0.0, 1.0)).hermitize());
    }
    let herm = crate::linalg::orthonormalize_hermitian_real(&herm, 1e-9);
    let mut sampler = Sampler::new(0x5eed_a16e_b7a5_0002);
    'attempt: for _ in 0..8 {
        // generic Hermitian: n distinct eigenvalues, each of multiplicity m
        let mut h = CMatrix::zeros(r, r);
        for hb in &herm {
            h = &h + &hb.scale_re(sampler.gaussian());
        }
        let dec = match hermitian_spectral(&h.hermitize(), Some(1e-8 * h.max_abs().max(1.0))) {
            Ok(d) => d,
            Err(_) => continue,
        };
        if dec.eigenvalues.len() != n || dec.multiplicities.iter().any(|&mk| mk != mult) {
            continue;
        }
        let q: Vec<CMatrix> = dec.projections.clone();

        // generic element to link the eigenspaces
        let mut a = CMatrix::zeros(r, r);
        for b in falg.basis() {
            a = &a + &b.scale(sampler.c_gaussian());
        }
        // orthonormal frame of the first eigenspace
        let q1_dec = hermitian_spectral(&q[0], None)?;
        let q1_eig = q1_dec.raw_eigen();
        let w1: Vec<CMatrix> = (0..r)
            .filter(|&k| q1_eig.values[k] > 0.5)
            .map(|k| q1_eig.vectors.column(k))
            .collect();
        debug_assert_eq!(w1.len(), mult);

        let mut cols: Vec<CMatrix> = Vec::with_capacity(r);
        for wj in &w1 {
            cols.push(wj.clone());
        }
        for qi in q.iter().skip(1) {
            // x = Q_i a Q_1 is a scalar multiple of the (i,1) matrix unit
            let x = &(qi * &a) * &q[0];
            let probe = &x * &w1[0];
            let xi = probe.frobenius_norm();
            if xi < 1e-6 * a.frobenius_norm().max(1.0) {
                continue 'attempt;
            }
            let u = x.scale_re(1.0 / xi);
            for wj in &w1 {
                cols.push(&u * wj);
            }
        }
        let frame = CMatrix::from_columns(&cols);
        // unitarity check certifies the matrix-unit normalization was exact
        let gram = &frame.adjoint() * &frame;
        if (&gram - &CMatrix::identity(r)).frobenius_norm() > 1e-8 * r as f64 {
            continue;
        }
        return Ok(frame);
    }
    Err(Error::NumericalDegeneracy(
        "could not build a tensor frame for a matrix factor".into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::DensityOperator;

    fn matrix_unit(d: usize, i: usize, j: usize) -> CMatrix {
        let mut e = CMatrix::zeros(d, d);
        e[(i, j)] = c64(1.0, 0.0);
        e
    }

    fn pauli_x() -> CMatrix {
        &matrix_unit(2, 0, 1) + &matrix_unit(2, 1, 0)
    }

    #[test]
    fn generated_algebra_basics() {
        // no generators: scalars
        let triv = generated_algebra(&[], 3).unwrap();
        assert_eq!(triv.len(), 1);
        assert!(triv.contains_identity());

        // one self-adjoint generator with distinct eigenvalues: its eigenbasis
        // diagonal algebra
        let h = CMatrix::diag_real(&[1.0, 2.0, 5.0]);
        let diag = generated_algebra(&[h], 3).unwrap();
        assert_eq!(diag.len(), 3);
        assert!(diag.is_star_algebra(1e-9));

        // a single off-diagonal unit generates the full 2x2 algebra
        let full = generated_algebra(&[matrix_unit(2, 0, 1)], 2).unwrap();
        assert_eq!(full.len(), 4);
        assert!(full.is_star_algebra(1e-9));
    }

    #[test]
    fn commutant_extremes() {
        // commutant of scalars is everything
        let all = commutant(&[CMatrix::identity(3)], 3).unwrap();
        assert_eq!(all.len(), 9);

        // commutant of the full algebra is the scalars
        let full = generated_algebra(&[matrix_unit(3, 0, 1), matrix_unit(3, 1, 2)], 3).unwrap();
        assert_eq!(full.len(), 9);
        let scal = commutant(full.basis(), 3).unwrap();
        assert_eq!(scal.len(), 1);
        assert!(scal.contains(&CMatrix::identity(3), 1e-9));
    }

    #[test]
    fn commutant_of_block_algebra_is_its_center() {
        // diag(M_2, M_1) inside M_3
        let gens = [matrix_unit(3, 0, 1), matrix_unit(3, 1, 0)];
        let alg = generated_algebra(&gens, 3).unwrap();
        assert_eq!(alg.len(), 5); // M_2 (+) M_1

        let comm = commutant(alg.basis(), 3).unwrap();
        assert_eq!(comm.len(), 2);
        let z = center(&alg).unwrap();
        assert_eq!(z.len(), 2);
        // the two block projections span both
        let p1 = &matrix_unit(3, 0, 0) + &matrix_unit(3, 1, 1);
        let p2 = matrix_unit(3, 2, 2);
        for p in [&p1, &p2] {
            assert!(comm.contains(p, 1e-9));
            assert!(z.contains(p, 1e-9));
        }
        // center of the full algebra is trivial
        let full = generated_algebra(&[matrix_unit(3, 0, 1), matrix_unit(3, 1, 2)], 3).unwrap();
        assert_eq!(center(&full).unwrap().len(), 1);
    }

    #[test]
    fn conditional_expectation_is_a_pinching_for_diagonal_algebra() {
        let diag = generated_algebra(&[CMatrix::diag_real(&[1.0, 2.0, 3.0])], 3).unwrap();
        let e = diag.trace_conditional_expectation();
        assert!(e.is_trace_preserving());
        assert!(e.is_completely_positive().unwrap());
        assert!(e.is_unital());
        let mut s = Sampler::new(3);
        let x = s.ginibre(3, 3);
        let ex = e.apply(&x);
        // off-diagonal killed, diagonal kept
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { x[(i, j)] } else { c64(0.0, 0.0) };
                assert!((ex[(i, j)] - want).norm() < 1e-12);
            }
        }
        // idempotent
        let ee = e.compose(&e).unwrap();
        assert!((ee.super_matrix() - e.super_matrix()).frobenius_norm() < 1e-10);
    }

    #[test]
    fn conditional_expectation_onto_rotated_algebra() {
        let mut s = Sampler::new(5);
        let u = s.unitary(4);
        // rotated diag(M_2, M_2) block algebra
        let gens: Vec<CMatrix> = [matrix_unit(4, 0, 1), matrix_unit(4, 2, 3)]
            .iter()
            .map(|g| &(&u * g) * &u.adjoint())
            .collect();
        let alg = generated_algebra(&gens, 4).unwrap();
        assert_eq!(alg.len(), 8);
        let e = alg.trace_conditional_expectation();
        assert!(e.is_trace_preserving());
        assert!(e.is_completely_positive().unwrap());
        // fixed points are exactly the algebra
        for b in alg.basis() {
            assert!((&e.apply(b) - b).frobenius_norm() < 1e-10);
        }
        let x = s.ginibre(4, 4);
        assert!(alg.membership_residual(&e.apply(&x)) < 1e-9);
    }

    #[test]
    fn modular_invariance_distinguishes_commuting_algebras() {
        let rho = DensityOperator::new(CMatrix::diag_real(&[0.8, 0.2])).unwrap();
        let grid = [0.5, 1.0, 2.0];

        let diag = generated_algebra(&[CMatrix::diag_real(&[1.0, 2.0])], 2).unwrap();
        assert!(modular_invariance_check(&rho, &diag, &grid).holds);

        let xalg = generated_algebra(&[pauli_x()], 2).unwrap();
        assert_eq!(xalg.len(), 2);
        let bad = modular_invariance_check(&rho, &xalg, &grid);
        assert!(!bad.holds);
        assert!(bad.max_residual > 1e-2);
    }

    #[test]
    fn structure_of_full_and_diagonal_algebras() {
        let full = generated_algebra(&[matrix_unit(3, 0, 1), matrix_unit(3, 1, 2)], 3).unwrap();
        let bs = structure_decomposition(&full).unwrap();
        assert_eq!(bs.blocks, vec![(3, 1)]);
        assert_eq!(bs.kernel_dim, 0);
        assert!(bs.residual < 1e-9);

        let diag = generated_algebra(&[CMatrix::diag_real(&[1.0, 2.0, 3.0])], 3).unwrap();
        let bs = structure_decomposition(&diag).unwrap();
        assert_eq!(bs.blocks, vec![(1, 1), (1, 1), (1, 1)]);
        assert_eq!(bs.kernel_dim, 0);
    }

    #[test]
    fn structure_with_multiplicity() {
        // M_2 (x) 1_2 inside M_4
        let a = matrix_unit(2, 0, 1).kron(&CMatrix::identity(2));
        let alg = generated_algebra(&[a], 4).unwrap();
        assert_eq!(alg.len(), 4);
        let bs = structure_decomposition(&alg).unwrap();
        assert_eq!(bs.blocks, vec![(2, 2)]);
        assert!(bs.residual < 1e-9);
        // the unitary actually block-tensorizes a generic member
        let member = &alg.basis()[1] + &alg.basis()[2].scale(c64(0.3, 0.7));
        assert!(bs.pattern_residual(&member) < 1e-9);
        let mut s = Sampler::new(9);
        let outsider = s.ginibre(4, 4);
        assert!(bs.pattern_residual(&outsider) > 1e-3);
    }

    #[test]
    fn structure_of_rotated_mixed_blocks() {
        // diag(M_2, M_1) rotated by a random unitary
        let mut s = Sampler::new(11);
        let u = s.unitary(3);
        let g = &(&u * &matrix_unit(3, 0, 1)) * &u.adjoint();
        let alg = generated_algebra(&[g], 3).unwrap();
        assert_eq!(alg.len(), 5);
        let bs = structure_decomposition(&alg).unwrap();
        let mut profile = bs.blocks.clone();
        profile.sort();
        assert_eq!(profile, vec![(1, 1), (2, 1)]);
        assert_eq!(bs.kernel_dim, 0);
        assert!(bs.residual < 1e-8);
        // conjugating unitary is unitary
        let gram = &bs.unitary.adjoint() * &bs.unitary;
        assert!((&gram - &CMatrix::identity(3)).frobenius_norm() < 1e-9);
    }

    #[test]
    fn structure_of_non_unital_algebra() {
        // span{E_00} in M_2: unit is E_00, one-dimensional corner killed
        let alg = AlgebraBasis::from_span(&[matrix_unit(2, 0, 0)], 2).unwrap();
        assert!(alg.is_star_algebra(1e-9));
        assert!(!alg.contains_identity());
        let bs = structure_decomposition(&alg).unwrap();
        assert_eq!(bs.blocks, vec![(1, 1)]);
        assert_eq!(bs.kernel_dim, 1);
    }

    #[test]
    fn structure_rejects_non_algebras() {
        // span{X} without the identity is not product-closed
        let alg = AlgebraBasis::from_span(&[pauli_x()], 2).unwrap();
        assert!(matches!(
            structure_decomposition(&alg),
            Err(Error::NotAnAlgebra(_))
        ));
    }
}
