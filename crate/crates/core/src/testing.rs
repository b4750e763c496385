//! Binary state discrimination: Neyman-Pearson tests, Bayes error, and the
//! Chernoff and Hoeffding error exponents, plus the L1-distance family
//! comparison used by the reversibility checks.
//!
//! Exponents are computed from the weighted eigenvalue-pair decomposition
//! Tr sigma^u rho^{1-u} = sum_ij c_ij a_i^u b_j^{1-u} restricted to positive
//! eigenvalue pairs, which extends continuously to the support convention
//! x^0 = supp x at the endpoints.

use crate::channels::DensityOperator;
use crate::divergences::{relative_entropy, ExtReal};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_spectral, trace_norm_hermitian};
use crate::CMatrix;

/// Spectral split of sigma - t rho with the projections a Neyman-Pearson
/// test is built from.
#[derive(Clone, Debug)]
pub struct NpTest {
    pub t: f64,
    /// Projection onto strictly positive eigenvalues.
    pub positive_projection: CMatrix,
    /// Projection onto the (numerical) kernel.
    pub zero_projection: CMatrix,
    pub positive_rank: usize,
    pub zero_rank: usize,
    /// Tr (sigma - t rho)_+, the optimal test advantage.
    pub positive_part_trace: f64,
    pub l1_norm: f64,
}

/// Eigenvalues within `zero_tol` of zero count as kernel; the tolerance sits
/// between rounding noise on exact kernels and genuinely displaced
/// eigenvalues of nearby problems.
pub fn np_test(sigma: &DensityOperator, rho: &DensityOperator, t: f64) -> Result<NpTest> {
    if sigma.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            context: "np test state dims",
            lhs: sigma.dim(),
            rhs: rho.dim(),
        });
    }
    if t < 0.0 {
        return Err(Error::DomainError(format!("np test threshold {t} < 0")));
    }
    let diff = (sigma.matrix() - &rho.matrix().scale_re(t)).hermitize();
    let dec = hermitian_spectral(&diff, None)?;
    let zero_tol = 1e-11 * dec.spectral_radius().max(1.0);
    let d = sigma.dim();
    let mut pos = CMatrix::zeros(d, d);
    let mut zero = CMatrix::zeros(d, d);
    let (mut pos_rank, mut zero_rank) = (0usize, 0usize);
    let (mut pos_trace, mut l1) = (0.0f64, 0.0f64);
    for (k, &lam) in dec.eigenvalues.iter().enumerate() {
        let mult = dec.multiplicities[k];
        l1 += lam.abs() * mult as f64;
        if lam > zero_tol {
            pos = &pos + &dec.projections[k];
            pos_rank += mult;
            pos_trace += lam * mult as f64;
        } else if lam.abs() <= zero_tol {
            zero = &zero + &dec.projections[k];
            zero_rank += mult;
        }
    }
    Ok(NpTest {
        t,
        positive_projection: pos,
        zero_projection: zero,
        positive_rank: pos_rank,
        zero_rank,
        positive_part_trace: pos_trace,
        l1_norm: l1,
    })
}

/// Minimal Bayes error for priors (1-s, s) on (sigma, rho):
/// (1 - || (1-s) sigma - s rho ||_1) / 2.
pub fn bayes_error(sigma: &DensityOperator, rho: &DensityOperator, s: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::DomainError(format!("prior {s} outside [0, 1]")));
    }
    let diff = (&sigma.matrix().scale_re(1.0 - s) - &rho.matrix().scale_re(s)).hermitize();
    Ok(0.5 * (1.0 - trace_norm_hermitian(&diff)?))
}

/// Positive eigenvalue pairs (a_i, b_j, Tr P_i Q_j) of two states.
fn overlap_pairs(sigma: &DensityOperator, rho: &DensityOperator) -> Vec<(f64, f64, f64)> {
    let sd = sigma.spectral();
    let rd = rho.spectral();
    let s_cut = sd.support_cutoff();
    let r_cut = rd.support_cutoff();
    let mut out = Vec::new();
    for (i, &a) in sd.eigenvalues.iter().enumerate() {
        if a <= s_cut {
            continue;
        }
        for (j, &b) in rd.eigenvalues.iter().enumerate() {
            if b <= r_cut {
                continue;
            }
            let c = (&sd.projections[i] * &rd.projections[j]).trace().re;
            if c > 1e-14 {
                out.push((a, b, c));
            }
        }
    }
    out
}

fn pair_value(pairs: &[(f64, f64, f64)], u: f64) -> f64 {
    pairs
        .iter()
        .map(|&(a, b, c)| c * a.powf(u) * b.powf(1.0 - u))
        .sum()
}

/// Golden-section minimization of a unimodal function on [lo, hi].
fn golden_min(mut lo: f64, mut hi: f64, f: &dyn Fn(f64) -> f64) -> (f64, f64) {
    let phi = 0.618_033_988_749_894_9_f64;
    let mut c = hi - phi * (hi - lo);
    let mut d = lo + phi * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if hi - lo < 1e-13 {
            break;
        }
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + phi * (hi - lo);
            fd = f(d);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}

/// Chernoff exponent and its minimizer.
#[derive(Clone, Copy, Debug)]
pub struct ChernoffResult {
    /// -ln min_u Tr sigma^u rho^{1-u}; +inf for disjoint supports.
    pub exponent: ExtReal,
    pub minimizer: f64,
    pub min_value: f64,
}

/// Grid scan plus golden-section refinement of the log-convex map
/// u -> Tr sigma^u rho^{1-u} on [0, 1].
pub fn chernoff(sigma: &DensityOperator, rho: &DensityOperator) -> Result<ChernoffResult> {
    if sigma.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            context: "chernoff state dims",
            lhs: sigma.dim(),
            rhs: rho.dim(),
        });
    }
    let pairs = overlap_pairs(sigma, rho);
    if pairs.is_empty() {
        return Ok(ChernoffResult {
            exponent: ExtReal::PlusInfinity,
            minimizer: 0.5,
            min_value: 0.0,
        });
    }
    let g = |u: f64| pair_value(&pairs, u);
    let n = 64;
    let mut best = (0usize, g(0.0));
    for k in 1..=n {
        let u = k as f64 / n as f64;
        let v = g(u);
        if v < best.1 {
            best = (k, v);
        }
    }
    let lo = (best.0.saturating_sub(1)) as f64 / n as f64;
    let hi = ((best.0 + 1).min(n)) as f64 / n as f64;
    let (u_star, v_star) = golden_min(lo, hi, &g);
    let (minimizer, min_value) = if v_star < best.1 {
        (u_star, v_star)
    } else {
        (best.0 as f64 / n as f64, best.1)
    };
    Ok(ChernoffResult {
        exponent: ExtReal::Finite(-min_value.ln()),
        minimizer,
        min_value,
    })
}

const HOEFFDING_U_CAP: f64 = 1.0 - 1e-6;

/// Hoeffding error exponent H_r(sigma || rho) =
/// sup_{0 <= u < 1} (-u r - ln Tr sigma^u rho^{1-u}) / (1 - u).
///
/// The sup is scanned up to u = 1 - 1e-6 and golden-refined. For r > 0 the
/// objective tends to -inf at u = 1, so the maximizer is interior and the cap
/// is harmless; at r = 0 the sup is the u -> 1 limit, which equals the
/// relative entropy and is taken as a floor since the capped scan can only
/// undershoot it. Probing closer to 1 than the cap is counterproductive:
/// ln Tr sigma^u rho^{1-u} vanishes there and the division by 1 - u turns
/// rounding noise in the trace into O(1e-8) errors.
pub fn hoeffding(sigma: &DensityOperator, rho: &DensityOperator, r: f64) -> Result<ExtReal> {
    if sigma.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            context: "hoeffding state dims",
            lhs: sigma.dim(),
            rhs: rho.dim(),
        });
    }
    if r < 0.0 {
        return Err(Error::DomainError(format!("hoeffding rate {r} < 0")));
    }
    let pairs = overlap_pairs(sigma, rho);
    if pairs.is_empty() {
        return Ok(ExtReal::PlusInfinity);
    }
    let h = |u: f64| (-u * r - pair_value(&pairs, u).ln()) / (1.0 - u);
    let n = 4096;
    let mut best = (0.0f64, h(0.0));
    for k in 1..=n {
        let u = HOEFFDING_U_CAP * k as f64 / n as f64;
        let v = h(u);
        if v > best.1 {
            best = (u, v);
        }
    }
    let step = HOEFFDING_U_CAP / n as f64;
    let lo = (best.0 - step).max(0.0);
    let hi = (best.0 + step).min(HOEFFDING_U_CAP);
    let neg = |u: f64| -h(u);
    let (u_star, v_neg) = golden_min(lo, hi, &neg);
    let mut sup = best.1.max(-v_neg).max(h(u_star));
    if r == 0.0 {
        match relative_entropy(sigma, rho)? {
            ExtReal::PlusInfinity => return Ok(ExtReal::PlusInfinity),
            ExtReal::Finite(s) => sup = sup.max(s),
        }
    }
    Ok(ExtReal::Finite(sup))
}

/// Saturation of the Hoeffding exponent: for r at or above `threshold` the
/// exponent sits on the constant `plateau` = -ln Tr (supp sigma) rho.
#[derive(Clone, Copy, Debug)]
pub struct HoeffdingThreshold {
    pub threshold: ExtReal,
    pub plateau: ExtReal,
}

pub fn hoeffding_threshold(
    sigma: &DensityOperator,
    rho: &DensityOperator,
) -> Result<HoeffdingThreshold> {
    let pairs = overlap_pairs(sigma, rho);
    if pairs.is_empty() {
        return Ok(HoeffdingThreshold {
            threshold: ExtReal::PlusInfinity,
            plateau: ExtReal::PlusInfinity,
        });
    }
    // psi(0) and psi'(0) of psi(u) = ln sum c a^u b^{1-u}
    let g0: f64 = pairs.iter().map(|&(_, b, c)| c * b).sum();
    let dg0: f64 = pairs
        .iter()
        .map(|&(a, b, c)| c * b * (a / b).ln())
        .sum();
    let plateau = -g0.ln();
    let threshold = plateau - dg0 / g0;
    Ok(HoeffdingThreshold {
        threshold: ExtReal::Finite(threshold),
        plateau: ExtReal::Finite(plateau),
    })
}

/// Worst-case gap between || sigma_n - t rho_n ||_1 before and after a
/// channel, over tensor powers n = 1..attained_n and a kink-resolving grid
/// of thresholds t.
#[derive(Clone, Debug)]
pub struct L1FamilyCheck {
    pub max_gap: f64,
    pub worst_t: f64,
    pub worst_n: usize,
    /// Largest tensor power that fit under the size cap.
    pub attained_n: usize,
}

/// Kinks of t -> || sigma - t rho ||_1 lie at the eigenvalues of
/// rho^{-1/2} sigma rho^{-1/2}; for tensor powers those are n-fold products.
/// The grid takes the union over both sides, their midpoints, 0, and a point
/// beyond the maximum.
fn kink_grid(ratios_in: &[f64], ratios_out: &[f64], n: usize) -> Vec<f64> {
    let products = |base: &[f64]| -> Vec<f64> {
        let mut acc = vec![1.0f64];
        for _ in 0..n {
            let mut next = Vec::with_capacity(acc.len() * base.len());
            for &p in &acc {
                for &r in base {
                    next.push(p * r);
                }
            }
            next.sort_by(|a, b| a.partial_cmp(b).unwrap());
            next.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1e-300));
            acc = next;
        }
        acc
    };
    let mut grid = products(ratios_in);
    grid.extend(products(ratios_out));
    grid.retain(|t| t.is_finite() && *t >= 0.0);
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1e-300));
    let mut full = vec![0.0];
    for w in grid.windows(2) {
        full.push(w[0]);
        full.push(0.5 * (w[0] + w[1]));
    }
    if let Some(&last) = grid.last() {
        full.push(last);
        full.push(last + 1.0);
    }
    full
}

fn rn_ratios(sigma: &DensityOperator, rho: &DensityOperator) -> Result<Vec<f64>> {
    let inv = rho.inv_sqrt();
    let d = (&(&inv * sigma.matrix()) * &inv).hermitize();
    let dec = hermitian_spectral(&d, None)?;
    Ok(dec.eigenvalues.clone())
}

pub fn l1_equality_family(
    sigma: &DensityOperator,
    rho: &DensityOperator,
    t_sigma: &DensityOperator,
    t_rho: &DensityOperator,
    n_cap: usize,
    size_cap: usize,
) -> Result<L1FamilyCheck> {
    let ratios_in = rn_ratios(sigma, rho)?;
    let ratios_out = rn_ratios(t_sigma, t_rho)?;
    let mut check = L1FamilyCheck {
        max_gap: 0.0,
        worst_t: 0.0,
        worst_n: 0,
        attained_n: 0,
    };
    for n in 1..=n_cap.max(1) {
        let dim_in = sigma.dim().pow(n as u32);
        let dim_out = t_sigma.dim().pow(n as u32);
        if dim_in > size_cap || dim_out > size_cap {
            break;
        }
        let sn = sigma.matrix().tensor_power(n, size_cap)?;
        let rn = rho.matrix().tensor_power(n, size_cap)?;
        let tsn = t_sigma.matrix().tensor_power(n, size_cap)?;
        let trn = t_rho.matrix().tensor_power(n, size_cap)?;
        for t in kink_grid(&ratios_in, &ratios_out, n) {
            let lhs = trace_norm_hermitian(&(&sn - &rn.scale_re(t)).hermitize())?;
            let rhs = trace_norm_hermitian(&(&tsn - &trn.scale_re(t)).hermitize())?;
            let gap = (lhs - rhs).abs();
            if gap > check.max_gap {
                check.max_gap = gap;
                check.worst_t = t;
                check.worst_n = n;
            }
        }
        check.attained_n = n;
    }
    Ok(check)
}
