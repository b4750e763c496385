//! Reversibility of a channel relative to a family of states.
//!
//! The ground truth is the recovery identity: T is reversible for the family
//! when the composed recovery map built from the reference state restores
//! every member. The other checks in this module are equivalent
//! characterizations (divergence equalities, cocycle intertwining, fixed
//! point membership, factorization, error exponents, local metrics); each is
//! evaluated independently and the results are consolidated in a report so
//! disagreements between routes surface as data instead of being averaged
//! away.

use crate::algebra::{generated_algebra, AlgebraBasis};
use crate::channels::{Channel, DensityOperator, PositivityReport, SupportCompression};
use crate::divergences::{
    power_trace, relative_entropy, ExtReal, OperatorConvexFunction,
};
use crate::divergences::f_divergence;
use crate::error::{Error, Result};
use crate::fisher::{chi2_divergence, fisher_metric, MonotoneFunction};
use crate::linalg::{hermitian_spectral, kernel_basis, operator_norm, orthonormalize_hermitian_real};
use crate::CMatrix;
use serde::Serialize;

/// Radon-Nikodym derivative of sigma with respect to rho in the spatial
/// sense: d = rho^{-1/2} sigma rho^{-1/2}, inverses taken on the support.
///
/// d is positive semidefinite, Tr sigma a = <d, a>_rho for every observable
/// a, and the operator norm is at least 1 with equality exactly when
/// sigma = rho.
#[derive(Clone, Debug)]
pub struct RNDerivative {
    pub matrix: CMatrix,
    /// Operator norm of the derivative.
    pub norm: f64,
}

pub fn rn_derivative(sigma: &DensityOperator, rho: &DensityOperator) -> Result<RNDerivative> {
    if sigma.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            context: "rn derivative state dims",
            lhs: sigma.dim(),
            rhs: rho.dim(),
        });
    }
    if !sigma.support_leq(rho) {
        return Err(Error::SupportViolation(
            "rn derivative needs supp sigma inside supp rho".into(),
        ));
    }
    let inv = rho.inv_sqrt();
    let matrix = (&(&inv * sigma.matrix()) * &inv).hermitize();
    let norm = operator_norm(&matrix)?;
    Ok(RNDerivative { matrix, norm })
}

/// Composition Phi = T* . T_rho on the input observables. Phi is unital,
/// inherits the Schwarz inequality from T, and leaves Tr rho ( . )
/// invariant; its fixed points are exactly the observables on which T acts
/// reversibly relative to rho.
pub fn recovery_composition(t: &Channel, rho: &DensityOperator) -> Result<Channel> {
    t.adjoint().compose(&t.petz_dual(rho)?)
}

/// Mirror composition Phi~ = T_rho . T* on the output observables, with the
/// same properties relative to T(rho).
pub fn output_composition(t: &Channel, rho: &DensityOperator) -> Result<Channel> {
    t.petz_dual(rho)?.compose(&t.adjoint())
}

/// Fixed points of a unital map on observables, as an orthonormal span.
/// For a Schwarz map that preserves a faithful state the span is a
/// *-subalgebra; the caller can confirm with `is_star_algebra`.
pub fn fixed_point_algebra(phi: &Channel) -> Result<AlgebraBasis> {
    if phi.in_dim() != phi.out_dim() {
        return Err(Error::DimensionMismatch {
            context: "fixed points of a non-endomorphism",
            lhs: phi.in_dim(),
            rhs: phi.out_dim(),
        });
    }
    let d = phi.in_dim();
    let m = phi.super_matrix() - &CMatrix::identity(d * d);
    let vecs = kernel_basis(&m, 1e-7 * (1.0 + m.max_abs()))?;
    let mats: Vec<CMatrix> = vecs
        .iter()
        .map(|v| CMatrix::unvec_row_major(v, d, d))
        .collect();
    AlgebraBasis::from_span(&mats, d)
}

/// Cesaro mean E = lim_n (1/n) sum_{j < n} Phi^j. When the eigenvalue 1 of
/// Phi is semisimple (always the case for a Schwarz map preserving a
/// faithful state) the limit is the oblique projector onto ker(Phi - id)
/// along range(Phi - id), which is what gets built here: right and left
/// fixed spaces come from the kernel routine, and the projector is
/// V (Z* V)^{-1} Z*. Iterating powers instead would double the rounding
/// error of the superoperator at every squaring.
pub fn ergodic_projection(phi: &Channel) -> Result<Channel> {
    if phi.in_dim() != phi.out_dim() {
        return Err(Error::DimensionMismatch {
            context: "ergodic projection of a non-endomorphism",
            lhs: phi.in_dim(),
            rhs: phi.out_dim(),
        });
    }
    let d = phi.in_dim();
    let n = d * d;
    let s = phi.super_matrix();
    let m = s - &CMatrix::identity(n);
    let tol = 1e-7 * (1.0 + m.max_abs());
    let right = kernel_basis(&m, tol)?;
    let left = kernel_basis(&m.adjoint(), tol)?;
    if right.is_empty() || right.len() != left.len() {
        return Err(Error::NumericalDegeneracy(format!(
            "fixed spaces of the map and its adjoint have sizes {} and {}",
            right.len(),
            left.len()
        )));
    }
    let v = CMatrix::from_columns(&right);
    let z = CMatrix::from_columns(&left);
    let g = &z.adjoint() * &v;
    // g is invertible exactly when the eigenvalue 1 is semisimple; the
    // normal equations keep the inversion inside the hermitian routines
    let gram = (&g.adjoint() * &g).hermitize();
    let gram_dec = hermitian_spectral(&gram, None)?;
    if gram_dec.min_eigenvalue() < 1e-12 {
        return Err(Error::NumericalDegeneracy(
            "eigenvalue 1 of the map is defective".into(),
        ));
    }
    let g_inv = &gram_dec.power_on_support(-1.0) * &g.adjoint();
    let e = &(&v * &g_inv) * &z.adjoint();
    let fix_right = (&(s * &e) - &e).max_abs();
    let fix_left = (&(&e * s) - &e).max_abs();
    let idem = (&(&e * &e) - &e).max_abs();
    if fix_right.max(fix_left).max(idem) > 1e-8 * (1.0 + e.max_abs()) {
        return Err(Error::NumericalDegeneracy(
            "ergodic projection violates its fixed point identities".into(),
        ));
    }
    Channel::from_super(e, d, d)
}

/// Deviation of x from the multiplicative domain of phi: the larger of
/// ||phi(x* x) - phi(x)* phi(x)|| and the mirrored form, relative to
/// ||x||^2. Zero exactly on the multiplicative domain when phi is Schwarz.
pub fn multiplicative_domain_residual(phi: &Channel, x: &CMatrix) -> f64 {
    let px = phi.apply(x);
    let xs = x.adjoint();
    let left = (&phi.apply(&(&xs * x)) - &(&px.adjoint() * &px)).frobenius_norm();
    let right = (&phi.apply(&(x * &xs)) - &(&px * &px.adjoint())).frobenius_norm();
    let scale = x.frobenius_norm().powi(2).max(1.0);
    left.max(right) / scale
}

/// Family closed under the modular rotations of rho: appends
/// rho^{is} sigma rho^{-is} for every s in the grid. Reversibility for the
/// original family already forces reversibility for this extension, so the
/// extension sharpens pairwise conditions at no cost in soundness.
pub fn extended_family(
    sigmas: &[DensityOperator],
    rho: &DensityOperator,
    s_grid: &[f64],
) -> Result<Vec<DensityOperator>> {
    let mut out = sigmas.to_vec();
    for &s in s_grid {
        if s == 0.0 {
            continue;
        }
        let u = rho.unitary_power(s);
        let ua = u.adjoint();
        for sigma in sigmas {
            if !sigma.support_leq(rho) {
                return Err(Error::SupportViolation(
                    "modular extension needs supp sigma inside supp rho".into(),
                ));
            }
            let rotated = (&(&u * sigma.matrix()) * &ua).hermitize();
            out.push(DensityOperator::new(rotated)?);
        }
    }
    Ok(out)
}

/// Commuting factorization induced by the fixed points F of Phi = T* . T_rho.
///
/// rho_a is the trace-orthogonal projection of rho onto F (the density of
/// Tr rho ( . ) restricted to F), rho_b = rho_a^{-1} rho, and
/// rho0_a = T_rho(rho_a). When T is reversible for the family, every member
/// factors as sigma = T*(sigma0_a) rho_b with
/// sigma0_a = rho0_a^{1/2} d(T sigma, T rho) rho0_a^{1/2}, and the images
/// factor as T(sigma) = sigma0_a T(rho_b). The residuals record how far each
/// identity is from holding, so they double as a reversibility check.
#[derive(Clone, Debug)]
pub struct Factorization {
    pub fixed_point_dim: usize,
    pub rho_a: CMatrix,
    pub rho_b: CMatrix,
    pub rho0_a: CMatrix,
    pub sigma0_a: Vec<CMatrix>,
    pub state_residuals: Vec<f64>,
    pub image_residuals: Vec<f64>,
    pub max_residual: f64,
}

pub fn factorize(
    t: &Channel,
    sigmas: &[DensityOperator],
    rho: &DensityOperator,
) -> Result<Factorization> {
    let dual = t.petz_dual(rho)?;
    let adj = t.adjoint();
    let phi = adj.compose(&dual)?;
    let alg = fixed_point_algebra(&phi)?;
    let rho_a = alg.project(rho.matrix()).hermitize();
    let a_dec = hermitian_spectral(&rho_a, None)?;
    let rho_b = &a_dec.power_on_support(-1.0) * rho.matrix();
    let rho0_a = dual.apply(&rho_a).hermitize();
    let r0_sqrt = hermitian_spectral(&rho0_a, None)?.power_on_support(0.5);
    let t_rho = t.apply_to_state(rho)?;
    let t_rho_b = t.apply(&rho_b);

    let mut sigma0_a = Vec::with_capacity(sigmas.len());
    let mut state_residuals = Vec::with_capacity(sigmas.len());
    let mut image_residuals = Vec::with_capacity(sigmas.len());
    let mut max_residual = 0.0f64;
    for sigma in sigmas {
        let t_sigma = t.apply_to_state(sigma)?;
        let d0 = rn_derivative(&t_sigma, &t_rho)?;
        let s0a = (&(&r0_sqrt * &d0.matrix) * &r0_sqrt).hermitize();
        let state_res = (&(&adj.apply(&s0a) * &rho_b) - sigma.matrix()).frobenius_norm();
        let image_res = (&(&s0a * &t_rho_b) - t_sigma.matrix()).frobenius_norm();
        max_residual = max_residual.max(state_res).max(image_res);
        sigma0_a.push(s0a);
        state_residuals.push(state_res);
        image_residuals.push(image_res);
    }
    Ok(Factorization {
        fixed_point_dim: alg.len(),
        rho_a,
        rho_b,
        rho0_a,
        sigma0_a,
        state_residuals,
        image_residuals,
        max_residual,
    })
}

/// Three-way outcome of a condition check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Fails,
    Inconclusive,
}

/// One condition evaluated against the family.
#[derive(Clone, Debug, Serialize)]
pub struct ConditionResult {
    pub id: &'static str,
    pub residual: f64,
    pub verdict: Verdict,
    pub detail: String,
}

/// Tolerances and grids for `check_conditions`. Residuals at or below
/// `hold_tol` count as holding, at or above `fail_tol` as failing; the band
/// in between is reported as inconclusive rather than forced either way.
#[derive(Clone, Debug, Serialize)]
pub struct CheckOptions {
    pub hold_tol: f64,
    pub fail_tol: f64,
    /// Cocycle check times; each is evaluated at +t and -t.
    pub t_grid: Vec<f64>,
    /// Exponents for the power trace equality, inside (0, 1).
    pub s_powers: Vec<f64>,
    /// Rates for the Hoeffding equality; filtered per pair against the
    /// output relative entropy so only informative rates are kept.
    pub r_grid: Vec<f64>,
    /// Modular rotation parameters used to extend the family.
    pub modular_grid: Vec<f64>,
    /// Largest tensor power for the n-copy trace norm equality.
    pub n_copy_cap: usize,
    /// Hard cap on tensor product dimension.
    pub tensor_size_cap: usize,
    pub seed: u64,
    /// Sample count for the positivity profile of the channel.
    pub samples: usize,
    /// Refuse singular reference states instead of compressing onto supports.
    pub strict_support: bool,
    /// Override for the Hoeffding rate cap.
    pub s0: Option<f64>,
    /// Worker threads for the condition battery; 1 runs sequentially.
    pub threads: usize,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            hold_tol: crate::tol::HOLD_TOL,
            fail_tol: crate::tol::FAIL_TOL,
            t_grid: vec![0.25, 0.5, 1.0, 2.0, std::f64::consts::E, std::f64::consts::PI],
            s_powers: vec![0.25, 0.5, 0.75],
            r_grid: vec![0.0, 0.1, 1.0],
            modular_grid: vec![0.5, 1.0],
            n_copy_cap: 3,
            tensor_size_cap: crate::tol::TENSOR_SIZE_CAP,
            seed: 7,
            samples: 24,
            strict_support: false,
            s0: None,
            threads: 1,
        }
    }
}

/// Diagnostics that do not vote on the verdict.
#[derive(Clone, Debug, Serialize)]
pub struct ProbeData {
    /// Dimension of the fixed points of T* . T_rho.
    pub fixed_point_dim: usize,
    /// Dimension of the fixed points of T_rho . T*.
    pub output_fixed_point_dim: usize,
    /// Dimension of the algebra generated by pulling the output fixed
    /// points back through T*; absent when the generation step failed.
    pub pullback_algebra_dim: Option<usize>,
    /// Membership residual of each derivative in that pullback algebra.
    pub pullback_membership: Vec<f64>,
    /// Multiplicative domain residual of each derivative under T* . T_rho.
    pub multiplicative_domain: Vec<f64>,
    /// Per state gap of the f-divergence with f = 1/(1+x) type; this f has
    /// one-point support, which is why it stays a probe and not a condition.
    pub inv_one_plus_gap: Vec<f64>,
}

/// Compact description of a channel for embedding in reports.
#[derive(Clone, Debug, Serialize)]
pub struct ChannelSummary {
    pub in_dim: usize,
    pub out_dim: usize,
    pub trace_preserving_residual: f64,
    pub completely_positive: bool,
    /// Row-major superoperator entries as [re, im] pairs.
    pub super_matrix: Vec<Vec<[f64; 2]>>,
}

impl ChannelSummary {
    pub fn of(c: &Channel) -> Result<Self> {
        Ok(ChannelSummary {
            in_dim: c.in_dim(),
            out_dim: c.out_dim(),
            trace_preserving_residual: c.tp_residual(),
            completely_positive: c.is_completely_positive()?,
            super_matrix: matrix_entries(c.super_matrix()),
        })
    }
}

/// Factorization attached to a report once the verdict is that the channel
/// is reversible for the family.
#[derive(Clone, Debug, Serialize)]
pub struct FactorizationSummary {
    pub max_residual: f64,
    pub rho_b: Vec<Vec<[f64; 2]>>,
    pub sigma0_a: Vec<Vec<Vec<[f64; 2]>>>,
}

/// Consolidated reversibility report.
///
/// `verdict` is driven by the recovery identity, except that a decisive
/// failure of any equivalent condition certifies irreversibility on its
/// own. `internally_consistent` records the structural invariant that a
/// holding recovery identity forbids every other condition from failing.
#[derive(Clone, Debug, Serialize)]
pub struct ReversibilityReport {
    pub verdict: Verdict,
    pub reversible: bool,
    pub recovery_residual: f64,
    pub internally_consistent: bool,
    pub in_dim: usize,
    pub out_dim: usize,
    pub working_in_dim: usize,
    pub working_out_dim: usize,
    /// True when the problem was compressed onto the supports of rho and
    /// T(rho) before checking.
    pub compressed: bool,
    pub n_states: usize,
    pub conditions: Vec<ConditionResult>,
    pub probes: ProbeData,
    /// Recovery map on the ambient spaces (extended off the supports when
    /// the working problem was compressed).
    pub recovery: ChannelSummary,
    pub factorization: Option<FactorizationSummary>,
    pub channel: PositivityReport,
    pub options: CheckOptions,
}

/// Row-major [re, im] entry table, the JSON form of a matrix.
pub fn matrix_entries(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

fn verdict_for(residual: f64, o: &CheckOptions) -> Verdict {
    if residual <= o.hold_tol {
        Verdict::Holds
    } else if residual >= o.fail_tol {
        Verdict::Fails
    } else {
        Verdict::Inconclusive
    }
}

fn ext_gap(a: &ExtReal, b: &ExtReal) -> f64 {
    match (a.value(), b.value()) {
        (Some(x), Some(y)) => (x - y).abs(),
        (None, None) => 0.0,
        _ => f64::INFINITY,
    }
}

fn midpoint(a: &DensityOperator, b: &DensityOperator) -> Result<DensityOperator> {
    DensityOperator::new((a.matrix() + b.matrix()).scale_re(0.5).hermitize())
}

struct Workspace {
    t: Channel,
    adj: Channel,
    rec: Channel,
    e_phi: Channel,
    rho: DensityOperator,
    t_rho: DensityOperator,
    sigmas: Vec<DensityOperator>,
    t_sigmas: Vec<DensityOperator>,
    ext_sigmas: Vec<DensityOperator>,
    ext_t_sigmas: Vec<DensityOperator>,
    ds: Vec<RNDerivative>,
    d0s: Vec<RNDerivative>,
    fact: Factorization,
    opts: CheckOptions,
}

type ConditionFn = fn(&Workspace) -> Result<(f64, String)>;

const CONDITIONS: &[(&str, ConditionFn)] = &[
    ("recovery", cond_recovery),
    ("relative_entropy", cond_relative_entropy),
    ("cocycle", cond_cocycle),
    ("power_trace", cond_power_trace),
    ("rn_pullback", cond_rn_pullback),
    ("fixed_point_membership", cond_fixed_point),
    ("factorization", cond_factorization),
    ("l1_family", cond_l1_family),
    ("l1_n_copy", cond_l1_n_copy),
    ("chernoff", cond_chernoff),
    ("hoeffding", cond_hoeffding),
    ("fisher_chi2", cond_fisher),
];

fn cond_recovery(w: &Workspace) -> Result<(f64, String)> {
    let mut worst = 0.0f64;
    let mut at = 0usize;
    for (i, (s, ts)) in w.sigmas.iter().zip(&w.t_sigmas).enumerate() {
        let r = (&w.rec.apply(ts.matrix()) - s.matrix()).frobenius_norm();
        if r > worst {
            worst = r;
            at = i;
        }
    }
    Ok((worst, format!("worst recovery defect at state {at}")))
}

fn cond_relative_entropy(w: &Workspace) -> Result<(f64, String)> {
    let mut worst = 0.0f64;
    let mut at = 0usize;
    for (i, (s, ts)) in w.sigmas.iter().zip(&w.t_sigmas).enumerate() {
        let inside = relative_entropy(s, &w.rho)?;
        let outside = relative_entropy(ts, &w.t_rho)?;
        let g = ext_gap(&inside, &outside);
        if g > worst {
            worst = g;
            at = i;
        }
    }
    Ok((worst, format!("worst relative entropy gap at state {at}")))
}

fn cond_cocycle(w: &Workspace) -> Result<(f64, String)> {
    let mut worst = 0.0f64;
    let mut at = (0usize, 0.0f64);
    for &tv in &w.opts.t_grid {
        for t in [tv, -tv] {
            let rho_u = w.rho.unitary_power(-t);
            let t_rho_u = w.t_rho.unitary_power(-t);
            for (i, (s, ts)) in w.sigmas.iter().zip(&w.t_sigmas).enumerate() {
                let lhs = w.adj.apply(&(&ts.unitary_power(t) * &t_rho_u));
                let rhs = &s.unitary_power(t) * &rho_u;
                let r = (&lhs - &rhs).frobenius_norm();
                if r > worst {
                    worst = r;
                    at = (i, t);
                }
            }
        }
    }
    Ok((
        worst,
        format!("worst cocycle defect at state {} for t = {}", at.0, at.1),
    ))
}

fn cond_power_trace(w: &Workspace) -> Result<(f64, String)> {
    let mut worst = 0.0f64;
    let mut at = (0usize, 0.0f64);
    for &s in &w.opts.s_powers {
        for (i, (sig, tsig)) in w.sigmas.iter().zip(&w.t_sigmas).enumerate() {
            let inside = power_trace(sig, &w.rho, s)?;
            let outside = power_trace(tsig, &w.t_rho, s)?;
            let g = (inside - outside).abs();
            if g > worst {
                worst = g;
                at = (i, s);
            }
        }
    }
    Ok((
        worst,
        format!("worst power trace gap at state {} for s = {}", at.0, at.1),
    ))
}

fn cond_rn_pullback(w: &Workspace) -> Result<(f64, String)> {
    let mut worst = 0.0f64;
    let mut at = 0usize;
    for i in 0..w.sigmas.len() {
        let pulled = w.adj.apply(&w.d0s[i].matrix);
        let scale = w.ds[i].matrix.frobenius_norm().max(1.0);
        let r = (&pulled - &w.ds[i].matrix).frobenius_norm() / scale;
        if r > worst {
            worst = r;
            at = i;
        }
    }
    Ok((
        worst,
        format!("worst derivative pullback defect at state {at}"),
    ))
}

fn cond_fixed_point(w: &Workspace) -> Result<(f64, String)> {
    let mut worst = 0.0f64;
    let mut at = 0usize;
    for (i, d) in w.ds.iter().enumerate() {
        let e = w.e_phi.apply(&d.matrix);
        let scale = d.matrix.frobenius_norm().max(1.0);
        let r = (&e - &d.matrix).frobenius_norm() / scale;
        if r > worst {
            worst = r;
            at = i;
        }
    }
    Ok((
        worst,
        format!("worst fixed point defect of the derivative at state {at}"),
    ))
}

fn cond_factorization(w: &Workspace) -> Result<(f64, String)> {
    Ok((
        w.fact.max_residual,
        format!(
            "state and image factorization residuals over {} states, fixed point dimension {}",
            w.sigmas.len(),
            w.fact.fixed_point_dim
        ),
    ))
}

fn cond_l1_family(w: &Workspace) -> Result<(f64, String)> {
    let mut worst = 0.0f64;
    let mut at = (0usize, 0.0f64);
    for (i, se) in w.ext_sigmas.iter().enumerate() {
        let check = crate::testing::l1_equality_family(
            se,
            &w.rho,
            &w.ext_t_sigmas[i],
            &w.t_rho,
            1,
            w.opts.tensor_size_cap,
        )?;
        if check.max_gap > worst {
            worst = check.max_gap;
            at = (i, check.worst_t);
        }
    }
    Ok((
        worst,
        format!(
            "worst trace norm gap over the modular extension at member {} for t = {}",
            at.0, at.1
        ),
    ))
}

fn cond_l1_n_copy(w: &Workspace) -> Result<(f64, String)> {
    let mut worst = 0.0f64;
    let mut at = (0usize, 0usize);
    let mut reached = 0usize;
    for (i, (s, ts)) in w.sigmas.iter().zip(&w.t_sigmas).enumerate() {
        let check = crate::testing::l1_equality_family(
            s,
            &w.rho,
            ts,
            &w.t_rho,
            w.opts.n_copy_cap,
            w.opts.tensor_size_cap,
        )?;
        reached = reached.max(check.attained_n);
        if check.max_gap > worst {
            worst = check.max_gap;
            at = (i, check.worst_n);
        }
    }
    Ok((
        worst,
        format!(
            "worst n-copy trace norm gap at state {} for n = {}, powers reached n = {}",
            at.0, at.1, reached
        ),
    ))
}

fn cond_chernoff(w: &Workspace) -> Result<(f64, String)> {
    let mut worst = 0.0f64;
    let mut at = 0usize;
    for (i, (s, ts)) in w.sigmas.iter().zip(&w.t_sigmas).enumerate() {
        let m = midpoint(s, &w.rho)?;
        let tm = w.t.apply_to_state(&m)?;
        for (x, y, tx, ty) in [(s, &m, ts, &tm), (&w.rho, &m, &w.t_rho, &tm)] {
            let inside = crate::testing::chernoff(x, y)?.exponent;
            let outside = crate::testing::chernoff(tx, ty)?.exponent;
            let g = ext_gap(&inside, &outside);
            if g > worst {
                worst = g;
                at = i;
            }
        }
    }
    Ok((
        worst,
        format!("worst Chernoff exponent gap against the midpoint at state {at}"),
    ))
}

fn cond_hoeffding(w: &Workspace) -> Result<(f64, String)> {
    let mut worst = 0.0f64;
    let mut at = (0usize, 0.0f64);
    for (i, (s, ts)) in w.sigmas.iter().zip(&w.t_sigmas).enumerate() {
        let m = midpoint(s, &w.rho)?;
        let tm = w.t.apply_to_state(&m)?;
        // Rates are informative below the relative entropy of the pair;
        // capping with the output side keeps the cap monotone safe.
        for (x, y, tx, ty) in [(&w.rho, &m, &w.t_rho, &tm), (s, &m, ts, &tm)] {
            let cap = match w.opts.s0 {
                Some(v) => v,
                None => relative_entropy(ty, tx)?.as_f64(),
            };
            let mut rates = vec![0.0];
            for &r in &w.opts.r_grid {
                if r > 0.0 && r <= 0.999 * cap {
                    rates.push(r);
                }
            }
            for r in rates {
                let inside = crate::testing::hoeffding(x, y, r)?;
                let outside = crate::testing::hoeffding(tx, ty, r)?;
                let g = ext_gap(&inside, &outside);
                if g > worst {
                    worst = g;
                    at = (i, r);
                }
            }
        }
    }
    Ok((
        worst,
        format!(
            "worst Hoeffding exponent gap against the midpoint at state {} for r = {}",
            at.0, at.1
        ),
    ))
}

fn cond_fisher(w: &Workspace) -> Result<(f64, String)> {
    let diffs: Vec<CMatrix> = w
        .sigmas
        .iter()
        .map(|s| s.matrix() - w.rho.matrix())
        .collect();
    let xs = orthonormalize_hermitian_real(&diffs, 1e-9);
    if xs.is_empty() {
        return Ok((0.0, "family spans no tangent directions at rho".into()));
    }
    let fs = [
        MonotoneFunction::bures(),
        MonotoneFunction::kubo_mori(),
        MonotoneFunction::rld(),
        MonotoneFunction::rich(w.t.in_dim(), w.t.out_dim()),
    ];
    let mut worst = 0.0f64;
    let mut name = "";
    for f in &fs {
        for x in &xs {
            let inside = fisher_metric(&w.rho, x, x, f)?;
            let tx = w.t.apply(x);
            let outside = fisher_metric(&w.t_rho, &tx, &tx, f)?;
            let g = (inside - outside).abs() / inside.abs().max(1.0);
            if g > worst {
                worst = g;
                name = f.name();
            }
        }
        for (i, s) in w.sigmas.iter().enumerate() {
            let inside = chi2_divergence(s, &w.rho, f)?;
            let outside = chi2_divergence(&w.t_sigmas[i], &w.t_rho, f)?;
            let g = (inside - outside).abs() / inside.abs().max(1.0);
            if g > worst {
                worst = g;
                name = f.name();
            }
        }
    }
    Ok((
        worst,
        format!("worst metric or chi-square gap, function {name}"),
    ))
}

fn run_conditions(w: &Workspace, threads: usize) -> Vec<Result<(f64, String)>> {
    let n = CONDITIONS.len();
    if threads <= 1 {
        return CONDITIONS.iter().map(|(_, f)| f(w)).collect();
    }
    let mut slots: Vec<Option<Result<(f64, String)>>> = Vec::new();
    slots.resize_with(n, || None);
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for worker in 0..threads.min(n) {
            handles.push(scope.spawn(move || {
                let mut acc = Vec::new();
                let mut i = worker;
                while i < n {
                    acc.push((i, (CONDITIONS[i].1)(w)));
                    i += threads;
                }
                acc
            }));
        }
        // Results land in per-index slots, so scheduling cannot reorder them.
        for h in handles {
            for (i, r) in h.join().expect("condition worker panicked") {
                slots[i] = Some(r);
            }
        }
    });
    slots
        .into_iter()
        .map(|s| s.expect("every condition slot is filled"))
        .collect()
}

/// Runs the full battery of reversibility conditions for the family
/// relative to rho and consolidates the outcome.
///
/// Every member must be supported inside the support of rho. A singular rho
/// or T(rho) compresses the problem onto the supports first, unless
/// `strict_support` asks for an error instead.
pub fn check_conditions(
    t: &Channel,
    sigmas: &[DensityOperator],
    rho: &DensityOperator,
    options: &CheckOptions,
) -> Result<ReversibilityReport> {
    if sigmas.is_empty() {
        return Err(Error::DomainError(
            "reversibility check needs at least one state".into(),
        ));
    }
    if t.in_dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            context: "channel input vs reference state",
            lhs: t.in_dim(),
            rhs: rho.dim(),
        });
    }
    for (i, s) in sigmas.iter().enumerate() {
        if s.dim() != rho.dim() {
            return Err(Error::DimensionMismatch {
                context: "family member vs reference state",
                lhs: s.dim(),
                rhs: rho.dim(),
            });
        }
        if !s.support_leq(rho) {
            return Err(Error::SupportViolation(format!(
                "state {i} is not supported inside supp rho"
            )));
        }
    }

    let channel_profile = t.positivity_report(options.samples, options.seed)?;
    let t_rho_ambient = t.apply_to_state(rho)?;
    let needs_compression = !rho.is_invertible() || !t_rho_ambient.is_invertible();
    if needs_compression && options.strict_support {
        return Err(Error::SupportViolation(
            "rho or T(rho) is singular and strict support mode is on".into(),
        ));
    }
    let compression: Option<SupportCompression> = if needs_compression {
        Some(t.restrict_to_support(rho)?)
    } else {
        None
    };
    let (wt, wrho, wsigmas) = match &compression {
        Some(comp) => {
            let ws = sigmas
                .iter()
                .map(|s| comp.compress_state(s))
                .collect::<Result<Vec<_>>>()?;
            (comp.channel.clone(), comp.rho.clone(), ws)
        }
        None => (t.clone(), rho.clone(), sigmas.to_vec()),
    };

    let adj = wt.adjoint();
    let dual = wt.petz_dual(&wrho)?;
    let rec = wt.petz_recovery(&wrho)?;
    let phi = adj.compose(&dual)?;
    let phi_tilde = dual.compose(&adj)?;
    let e_phi = ergodic_projection(&phi)?;
    let t_rho = wt.apply_to_state(&wrho)?;
    let t_sigmas = wsigmas
        .iter()
        .map(|s| wt.apply_to_state(s))
        .collect::<Result<Vec<_>>>()?;
    let ds = wsigmas
        .iter()
        .map(|s| rn_derivative(s, &wrho))
        .collect::<Result<Vec<_>>>()?;
    let d0s = t_sigmas
        .iter()
        .map(|s| rn_derivative(s, &t_rho))
        .collect::<Result<Vec<_>>>()?;
    let ext_sigmas = extended_family(&wsigmas, &wrho, &options.modular_grid)?;
    let ext_t_sigmas = ext_sigmas
        .iter()
        .map(|s| wt.apply_to_state(s))
        .collect::<Result<Vec<_>>>()?;
    let fact = factorize(&wt, &wsigmas, &wrho)?;
    let f_out = fixed_point_algebra(&phi_tilde)?;
    let fixed_point_dim = fact.fixed_point_dim;

    let recovery_ambient = match &compression {
        Some(comp) => comp.extend_recovery(&rec, rho)?,
        None => rec.clone(),
    };

    let w = Workspace {
        t: wt,
        adj,
        rec,
        e_phi,
        rho: wrho,
        t_rho,
        sigmas: wsigmas,
        t_sigmas,
        ext_sigmas,
        ext_t_sigmas,
        ds,
        d0s,
        fact,
        opts: options.clone(),
    };

    let raw = run_conditions(&w, options.threads.max(1));
    let mut conditions = Vec::with_capacity(raw.len());
    for ((id, _), r) in CONDITIONS.iter().zip(raw) {
        let (residual, detail) = r?;
        conditions.push(ConditionResult {
            id,
            residual,
            verdict: verdict_for(residual, options),
            detail,
        });
    }

    let inv_f = OperatorConvexFunction::inv_one_plus();
    let mut inv_one_plus_gap = Vec::with_capacity(w.sigmas.len());
    for (s, ts) in w.sigmas.iter().zip(&w.t_sigmas) {
        let inside = f_divergence(&inv_f, s, &w.rho)?;
        let outside = f_divergence(&inv_f, ts, &w.t_rho)?;
        inv_one_plus_gap.push((inside - outside).abs());
    }
    let multiplicative_domain: Vec<f64> = w
        .ds
        .iter()
        .map(|d| multiplicative_domain_residual(&phi, &d.matrix))
        .collect();
    // Observables pulled back from the output fixed points generate the
    // algebra the derivatives must live in when the channel is reversible.
    // Images that leave the multiplicative domain cannot take part in a
    // homomorphic pullback and are dropped before generating.
    let pulled: Vec<CMatrix> = f_out
        .basis()
        .iter()
        .map(|b| w.adj.apply(b))
        .filter(|y| multiplicative_domain_residual(&phi, y) <= 1e-6)
        .collect();
    let (pullback_algebra_dim, pullback_membership) =
        match generated_algebra(&pulled, w.rho.dim()) {
            Ok(alg) => (
                Some(alg.len()),
                w.ds.iter()
                    .map(|d| alg.membership_residual(&d.matrix))
                    .collect(),
            ),
            Err(_) => (None, Vec::new()),
        };
    let probes = ProbeData {
        fixed_point_dim,
        output_fixed_point_dim: f_out.len(),
        pullback_algebra_dim,
        pullback_membership,
        multiplicative_domain,
        inv_one_plus_gap,
    };

    let recovery_residual = conditions[0].residual;
    let recovery_verdict = conditions[0].verdict;
    let any_failure = conditions.iter().any(|c| c.verdict == Verdict::Fails);
    let verdict = if recovery_verdict == Verdict::Holds {
        Verdict::Holds
    } else if any_failure {
        Verdict::Fails
    } else {
        recovery_verdict
    };
    let internally_consistent = !(recovery_verdict == Verdict::Holds
        && conditions
            .iter()
            .skip(1)
            .any(|c| c.verdict == Verdict::Fails));
    let factorization = if verdict == Verdict::Holds {
        Some(FactorizationSummary {
            max_residual: w.fact.max_residual,
            rho_b: matrix_entries(&w.fact.rho_b),
            sigma0_a: w.fact.sigma0_a.iter().map(matrix_entries).collect(),
        })
    } else {
        None
    };

    Ok(ReversibilityReport {
        verdict,
        reversible: verdict == Verdict::Holds,
        recovery_residual,
        internally_consistent,
        in_dim: t.in_dim(),
        out_dim: t.out_dim(),
        working_in_dim: w.t.in_dim(),
        working_out_dim: w.t.out_dim(),
        compressed: compression.is_some(),
        n_states: sigmas.len(),
        conditions,
        probes,
        recovery: ChannelSummary::of(&recovery_ambient)?,
        factorization,
        channel: channel_profile,
        options: options.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::Sampler;
    use crate::{c64, CMatrix};

    fn matrix_unit(d: usize, i: usize, j: usize) -> CMatrix {
        let mut e = CMatrix::zeros(d, d);
        e[(i, j)] = c64(1.0, 0.0);
        e
    }

    fn pinching(d: usize) -> Channel {
        let kraus: Vec<CMatrix> = (0..d).map(|i| matrix_unit(d, i, i)).collect();
        Channel::from_kraus(kraus).unwrap()
    }

    fn diag_state(entries: &[f64]) -> DensityOperator {
        DensityOperator::new(CMatrix::diag_real(entries)).unwrap()
    }

    #[test]
    fn derivative_of_a_state_against_itself_is_the_identity() {
        let mut smp = Sampler::new(11);
        let rho = DensityOperator::new(smp.invertible_state(3, 0.05)).unwrap();
        let d = rn_derivative(&rho, &rho).unwrap();
        assert!((&d.matrix - &CMatrix::identity(3)).max_abs() < 1e-10);
        assert!((d.norm - 1.0).abs() < 1e-10);
    }

    #[test]
    fn derivative_of_commuting_states_is_the_ratio() {
        let sigma = diag_state(&[0.5, 0.3, 0.2]);
        let rho = diag_state(&[0.25, 0.25, 0.5]);
        let d = rn_derivative(&sigma, &rho).unwrap();
        let expected = CMatrix::diag_real(&[2.0, 1.2, 0.4]);
        assert!((&d.matrix - &expected).max_abs() < 1e-12);
        assert!((d.norm - 2.0).abs() < 1e-12);
    }

    #[test]
    fn derivative_reproduces_expectations_in_the_weighted_inner_product() {
        let mut smp = Sampler::new(23);
        let sigma = DensityOperator::new(smp.state(4)).unwrap();
        let rho = DensityOperator::new(smp.invertible_state(4, 0.03)).unwrap();
        let d = rn_derivative(&sigma, &rho).unwrap();
        assert!(d.norm >= 1.0 - 1e-10);
        let half = rho.sqrt();
        for _ in 0..20 {
            let a = smp.hermitian(4);
            let lhs = (sigma.matrix() * &a).trace();
            let rhs = (&(&d.matrix.adjoint() * &half) * &(&a * &half)).trace();
            assert!((lhs - rhs).norm() < 1e-10);
        }
    }

    #[test]
    fn derivative_requires_support_containment() {
        let mut smp = Sampler::new(5);
        let sigma = DensityOperator::new(smp.invertible_state(3, 0.05)).unwrap();
        let rho = DensityOperator::new(smp.rank_deficient_state(3, 2)).unwrap();
        assert!(matches!(
            rn_derivative(&sigma, &rho),
            Err(Error::SupportViolation(_))
        ));
    }

    #[test]
    fn pinching_composition_fixes_the_diagonal_algebra() {
        let t = pinching(3);
        let rho = diag_state(&[0.5, 0.3, 0.2]);
        let phi = recovery_composition(&t, &rho).unwrap();
        let alg = fixed_point_algebra(&phi).unwrap();
        assert_eq!(alg.len(), 3);
        assert!(alg.is_star_algebra(1e-8));
        assert!(alg.contains_identity());
        assert!(alg.contains(&CMatrix::diag_real(&[1.0, -2.0, 0.5]), 1e-8));
        assert!(!alg.contains(&matrix_unit(3, 0, 1), 1e-4));
    }

    #[test]
    fn unitary_composition_fixes_everything() {
        let mut smp = Sampler::new(31);
        let u = smp.unitary(3);
        let t = Channel::unitary(&u).unwrap();
        let rho = DensityOperator::new(smp.invertible_state(3, 0.05)).unwrap();
        let phi = recovery_composition(&t, &rho).unwrap();
        let alg = fixed_point_algebra(&phi).unwrap();
        assert_eq!(alg.len(), 9);
    }

    #[test]
    fn ergodic_projection_matches_the_pinching_expectation() {
        let t = pinching(4);
        let rho = diag_state(&[0.4, 0.3, 0.2, 0.1]);
        let phi = recovery_composition(&t, &rho).unwrap();
        let e = ergodic_projection(&phi).unwrap();
        assert!((e.super_matrix() - t.super_matrix()).max_abs() < 1e-11);
    }

    #[test]
    fn ergodic_projection_is_an_expectation_preserving_rho() {
        let mut smp = Sampler::new(47);
        let t = Channel::from_kraus(smp.kraus_channel(3, 3, 4)).unwrap();
        let rho = DensityOperator::new(smp.invertible_state(3, 0.05)).unwrap();
        let phi = recovery_composition(&t, &rho).unwrap();
        let e = ergodic_projection(&phi).unwrap();
        let es = e.super_matrix();
        assert!(((&(es * es)) - es).max_abs() < 1e-9, "idempotent");
        assert!(e.is_unital(), "unital");
        for _ in 0..5 {
            let x = smp.hermitian(3);
            let lhs = (rho.matrix() * &e.apply(&x)).trace();
            let rhs = (rho.matrix() * &x).trace();
            assert!((lhs - rhs).norm() < 1e-10, "rho expectation preserved");
        }
        // the projection reproduces phi's own fixed points
        let alg = fixed_point_algebra(&phi).unwrap();
        for b in alg.basis() {
            assert!((&e.apply(b) - b).max_abs() < 1e-8);
        }
    }

    #[test]
    fn multiplicative_domain_separates_block_from_offblock() {
        let t = pinching(3);
        let rho = diag_state(&[0.5, 0.3, 0.2]);
        let phi = recovery_composition(&t, &rho).unwrap();
        let diag = CMatrix::diag_real(&[1.0, 2.0, 3.0]);
        assert!(multiplicative_domain_residual(&phi, &diag) < 1e-12);
        let off = &matrix_unit(3, 0, 1) + &matrix_unit(3, 1, 0);
        assert!(multiplicative_domain_residual(&phi, &off) > 1e-2);
    }

    #[test]
    fn modular_extension_is_trivial_for_commuting_families() {
        let sigma = diag_state(&[0.7, 0.2, 0.1]);
        let rho = diag_state(&[0.5, 0.25, 0.25]);
        let ext = extended_family(&[sigma.clone()], &rho, &[0.5, 1.0]).unwrap();
        assert_eq!(ext.len(), 3);
        for e in &ext {
            assert!((e.matrix() - sigma.matrix()).max_abs() < 1e-12);
        }
    }

    #[test]
    fn modular_extension_rotates_noncommuting_members() {
        let mut smp = Sampler::new(61);
        let sigma = DensityOperator::new(smp.state(3)).unwrap();
        let rho = DensityOperator::new(smp.invertible_state(3, 0.05)).unwrap();
        let ext = extended_family(&[sigma.clone()], &rho, &[1.0]).unwrap();
        assert_eq!(ext.len(), 2);
        assert!((ext[1].matrix().trace().re - 1.0).abs() < 1e-10);
        assert!((ext[1].matrix() - sigma.matrix()).max_abs() > 1e-4);
    }

    #[test]
    fn factorization_closes_for_a_pinched_commuting_family() {
        let t = pinching(3);
        let sigmas = vec![diag_state(&[0.6, 0.3, 0.1]), diag_state(&[0.2, 0.5, 0.3])];
        let rho = diag_state(&[0.5, 0.25, 0.25]);
        let fact = factorize(&t, &sigmas, &rho).unwrap();
        assert!(fact.max_residual < 1e-10, "residual {}", fact.max_residual);
        assert_eq!(fact.fixed_point_dim, 3);
        // rho is already diagonal, so it is its own fixed point part
        assert!((&fact.rho_a - rho.matrix()).max_abs() < 1e-10);
        assert!((&fact.rho_b - &CMatrix::identity(3)).max_abs() < 1e-8);
    }

    #[test]
    fn factorization_detects_an_information_destroying_channel() {
        let mut smp = Sampler::new(71);
        let omega = DensityOperator::new(smp.invertible_state(3, 0.1)).unwrap();
        let t = Channel::fixed_output(&omega, 3);
        let sigmas = vec![diag_state(&[0.7, 0.2, 0.1])];
        let rho = diag_state(&[0.3, 0.4, 0.3]);
        let fact = factorize(&t, &sigmas, &rho).unwrap();
        assert!(fact.max_residual > 1e-2, "residual {}", fact.max_residual);
    }

    #[test]
    fn report_for_a_reversible_pinching_holds_everywhere() {
        let t = pinching(3);
        let sigmas = vec![diag_state(&[0.6, 0.3, 0.1]), diag_state(&[0.1, 0.45, 0.45])];
        let rho = diag_state(&[0.5, 0.25, 0.25]);
        let report = check_conditions(&t, &sigmas, &rho, &CheckOptions::default()).unwrap();
        assert_eq!(report.verdict, Verdict::Holds);
        assert!(report.reversible);
        assert!(report.recovery_residual < 1e-10);
        assert!(report.internally_consistent);
        assert!(!report.compressed);
        for c in &report.conditions {
            assert_eq!(c.verdict, Verdict::Holds, "{} residual {}", c.id, c.residual);
        }
        let fact = report.factorization.as_ref().expect("factorization data");
        assert!(fact.max_residual < 1e-8);
        assert_eq!(report.probes.fixed_point_dim, 3);
        for r in &report.probes.pullback_membership {
            assert!(*r < 1e-7);
        }
        for g in &report.probes.inv_one_plus_gap {
            assert!(*g < 1e-10);
        }
    }

    #[test]
    fn report_for_a_unitary_holds_on_random_states() {
        let mut smp = Sampler::new(83);
        let u = smp.unitary(3);
        let t = Channel::unitary(&u).unwrap();
        let sigmas = vec![DensityOperator::new(smp.state(3)).unwrap(), DensityOperator::new(smp.state(3)).unwrap()];
        let rho = DensityOperator::new(smp.invertible_state(3, 0.05)).unwrap();
        let report = check_conditions(&t, &sigmas, &rho, &CheckOptions::default()).unwrap();
        assert_eq!(report.verdict, Verdict::Holds);
        for c in &report.conditions {
            assert_eq!(c.verdict, Verdict::Holds, "{} residual {}", c.id, c.residual);
        }
    }

    #[test]
    fn report_for_a_constant_channel_fails_decisively() {
        let mut smp = Sampler::new(97);
        let omega = DensityOperator::new(smp.invertible_state(3, 0.1)).unwrap();
        let t = Channel::fixed_output(&omega, 3);
        let sigmas = vec![diag_state(&[0.7, 0.2, 0.1])];
        let rho = diag_state(&[0.2, 0.4, 0.4]);
        let report = check_conditions(&t, &sigmas, &rho, &CheckOptions::default()).unwrap();
        assert_eq!(report.verdict, Verdict::Fails);
        assert!(!report.reversible);
        assert!(report.internally_consistent);
        assert!(report.factorization.is_none());
        let by_id = |id: &str| {
            report
                .conditions
                .iter()
                .find(|c| c.id == id)
                .unwrap()
                .verdict
        };
        assert_eq!(by_id("recovery"), Verdict::Fails);
        assert_eq!(by_id("relative_entropy"), Verdict::Fails);
        assert_eq!(by_id("fixed_point_membership"), Verdict::Fails);
        assert_eq!(report.probes.fixed_point_dim, 1);
    }

    #[test]
    fn report_compresses_singular_references() {
        let mut smp = Sampler::new(103);
        let u = smp.unitary(4);
        let t = Channel::unitary(&u).unwrap();
        // rho lives on a 2-dimensional subspace; sigma leans on one axis of it
        let rho = DensityOperator::new(CMatrix::diag_real(&[0.6, 0.4, 0.0, 0.0])).unwrap();
        let sigma = DensityOperator::new(CMatrix::diag_real(&[0.3, 0.7, 0.0, 0.0])).unwrap();
        let report =
            check_conditions(&t, &[sigma.clone()], &rho, &CheckOptions::default()).unwrap();
        assert!(report.compressed);
        assert_eq!(report.working_in_dim, 2);
        assert_eq!(report.verdict, Verdict::Holds);
        assert_eq!(report.recovery.in_dim, 4, "recovery is extended back");

        let strict = CheckOptions {
            strict_support: true,
            ..CheckOptions::default()
        };
        assert!(matches!(
            check_conditions(&t, &[sigma], &rho, &strict),
            Err(Error::SupportViolation(_))
        ));
    }

    #[test]
    fn report_is_identical_across_thread_counts() {
        let mut smp = Sampler::new(131);
        let t = Channel::from_kraus(smp.kraus_channel(3, 3, 3)).unwrap();
        let sigmas = vec![DensityOperator::new(smp.state(3)).unwrap()];
        let rho = DensityOperator::new(smp.invertible_state(3, 0.05)).unwrap();
        let sequential = check_conditions(&t, &sigmas, &rho, &CheckOptions::default()).unwrap();
        let threaded = check_conditions(
            &t,
            &sigmas,
            &rho,
            &CheckOptions {
                threads: 4,
                ..CheckOptions::default()
            },
        )
        .unwrap();
        let mut a = serde_json::to_value(&sequential).unwrap();
        let mut b = serde_json::to_value(&threaded).unwrap();
        // the echoed options differ in the thread count by construction
        a["options"]["threads"] = 0.into();
        b["options"]["threads"] = 0.into();
        assert_eq!(a, b);
    }

    #[test]
    fn rotated_expectation_family_is_reversible() {
        // conditional expectation onto a rotated block algebra, states built
        // inside the algebra so the channel is reversible for them
        let mut smp = Sampler::new(139);
        let u = smp.unitary(3);
        let blocks = [
            (&(&u.column(0) * &u.column(0).adjoint()) + &(&u.column(1) * &u.column(1).adjoint())),
            (&u.column(2) * &u.column(2).adjoint()),
        ];
        let t = Channel::from_apply(3, 3, |x| {
            let mut acc = CMatrix::zeros(3, 3);
            for p in &blocks {
                acc = &acc + &(&(p * x) * p);
            }
            acc
        });
        let mix = |w: f64, v: f64| {
            DensityOperator::new(
                (&blocks[0].scale_re(w / 2.0) + &blocks[1].scale_re(v)).hermitize(),
            )
            .unwrap()
        };
        let rho = mix(0.8, 0.2);
        let sigmas = vec![mix(0.5, 0.5), mix(0.9, 0.1)];
        let report = check_conditions(&t, &sigmas, &rho, &CheckOptions::default()).unwrap();
        assert_eq!(report.verdict, Verdict::Holds, "{:?}", report.conditions);
        for c in &report.conditions {
            assert_eq!(c.verdict, Verdict::Holds, "{} residual {}", c.id, c.residual);
        }
    }

    #[test]
    fn derivative_pullback_uses_the_adjoint_not_the_inverse() {
        // depolarizing noise mixed with identity: invertible as a linear map,
        // but not reversible; the pullback condition must fail, showing the
        // check uses the adjoint rather than any linear inverse
        let d = 3usize;
        let eye = Channel::identity(d);
        let flat = Channel::fixed_output(
            &DensityOperator::new(CMatrix::identity(d).scale_re(1.0 / d as f64)).unwrap(),
            d,
        );
        let t = Channel::mixture(&[(0.7, &eye), (0.3, &flat)]).unwrap();
        let mut smp = Sampler::new(149);
        let sigmas = vec![DensityOperator::new(smp.state(d)).unwrap()];
        let rho = DensityOperator::new(smp.invertible_state(d, 0.05)).unwrap();
        let report = check_conditions(&t, &sigmas, &rho, &CheckOptions::default()).unwrap();
        assert_eq!(report.verdict, Verdict::Fails);
        let rn = report
            .conditions
            .iter()
            .find(|c| c.id == "rn_pullback")
            .unwrap();
        assert_eq!(rn.verdict, Verdict::Fails);
    }

    #[test]
    fn trivial_family_reduces_to_the_reference() {
        let mut smp = Sampler::new(151);
        let t = Channel::from_kraus(smp.kraus_channel(2, 2, 2)).unwrap();
        let rho = DensityOperator::new(smp.invertible_state(2, 0.1)).unwrap();
        let report =
            check_conditions(&t, &[rho.clone()], &rho, &CheckOptions::default()).unwrap();
        assert_eq!(report.verdict, Verdict::Holds);
        assert!(report.recovery_residual < 1e-9);
        let fisher = report
            .conditions
            .iter()
            .find(|c| c.id == "fisher_chi2")
            .unwrap();
        assert_eq!(fisher.verdict, Verdict::Holds);
    }

    #[test]
    fn empty_family_is_rejected() {
        let t = Channel::identity(2);
        let rho = diag_state(&[0.5, 0.5]);
        assert!(matches!(
            check_conditions(&t, &[], &rho, &CheckOptions::default()),
            Err(Error::DomainError(_))
        ));
    }

    #[test]
    fn uncontained_member_is_rejected() {
        let t = Channel::identity(3);
        let rho = DensityOperator::new(CMatrix::diag_real(&[0.5, 0.5, 0.0])).unwrap();
        let sigma = diag_state(&[0.4, 0.3, 0.3]);
        assert!(matches!(
            check_conditions(&t, &[sigma], &rho, &CheckOptions::default()),
            Err(Error::SupportViolation(_))
        ));
    }

    #[test]
    fn embedding_into_a_larger_system_is_reversible() {
        // X -> X tensor omega is reversible with the partial trace as inverse
        let mut smp = Sampler::new(163);
        let omega = DensityOperator::new(smp.invertible_state(2, 0.1)).unwrap();
        let odec = omega.spectral();
        let mut kraus = Vec::new();
        for k in 0..2 {
            let w = odec.raw_eigen().values[k];
            let v = CMatrix::from_fn(2, 1, |i, _| odec.raw_eigen().vectors[(i, k)]);
            // K = sqrt(w) (I tensor |v_k>)
            let mut m = CMatrix::zeros(4, 2);
            for i in 0..2 {
                for r in 0..2 {
                    m[(i * 2 + r, i)] = v[(r, 0)] * c64(w.sqrt(), 0.0);
                }
            }
            kraus.push(m);
        }
        let t = Channel::from_kraus(kraus).unwrap();
        let sigmas = vec![DensityOperator::new(smp.state(2)).unwrap()];
        let rho = DensityOperator::new(smp.invertible_state(2, 0.1)).unwrap();
        let report = check_conditions(&t, &sigmas, &rho, &CheckOptions::default()).unwrap();
        assert_eq!(report.verdict, Verdict::Holds, "{:?}", report.conditions);
        for c in &report.conditions {
            assert_eq!(c.verdict, Verdict::Holds, "{} residual {}", c.id, c.residual);
        }
    }
}
