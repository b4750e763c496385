//! Monotone (quantum Fisher) metrics. Each metric comes from an operator
//! monotone function f with f(1) = 1 through the inverse metric operator
//!
//!   (J_rho^f)^{-1}(x) = sum_ij [f(l_i/l_j) l_j]^{-1} P_i x P_j,
//!
//! which every catalog entry also represents as
//!
//!   (J_rho^f)^{-1} = alpha R^{-1} + sum_k w_k (L + s_k R)^{-1}
//!
//! for a positive measure nu on [0, infinity]. The measure drives the
//! resolvent-level equality checks; closed forms drive evaluation.

use crate::channels::{Channel, DensityOperator};
use crate::divergences::MeasureSupport;
use crate::error::{Error, Result};
use crate::CMatrix;

/// Measure in the resolvent representation of an inverse metric operator.
/// `alpha` weights R^{-1}, the atom at s = infinity.
#[derive(Clone, Debug)]
pub struct NuMeasure {
    pub alpha: f64,
    pub atoms: Vec<(f64, f64)>,
    /// True when the atoms merely discretize a continuous measure.
    pub infinite: bool,
}

impl NuMeasure {
    pub fn support_cardinality(&self) -> MeasureSupport {
        if self.infinite {
            MeasureSupport::Infinite
        } else {
            let extra = usize::from(self.alpha > 0.0);
            MeasureSupport::Finite(self.atoms.len() + extra)
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum MonotoneTag {
    Bures,
    KuboMori,
    Rld,
    Rich,
}

/// Operator monotone function with its resolvent measure.
#[derive(Clone, Debug)]
pub struct MonotoneFunction {
    pub tag: MonotoneTag,
    pub nu: NuMeasure,
}

impl MonotoneFunction {
    /// f(t) = (1+t)/2, the Bures / SLD metric. One atom.
    pub fn bures() -> Self {
        Self {
            tag: MonotoneTag::Bures,
            nu: NuMeasure {
                alpha: 0.0,
                atoms: vec![(1.0, 2.0)],
                infinite: false,
            },
        }
    }

    /// f(t) = (t-1)/ln t, the Kubo-Mori metric. Continuous measure
    /// d nu = ds/(1+s), discretized on a log grid for resolvent checks.
    pub fn kubo_mori() -> Self {
        let n = 16;
        let (lo, hi) = (1e-3f64, 1e3f64);
        let mut atoms = Vec::with_capacity(n);
        // midpoint rule on the log axis: weight = density * cell width
        for k in 0..n {
            let frac = (k as f64 + 0.5) / n as f64;
            let s = lo * (hi / lo).powf(frac);
            let width = s * (hi / lo).ln() / n as f64;
            atoms.push((s, width / (1.0 + s)));
        }
        Self {
            tag: MonotoneTag::KuboMori,
            nu: NuMeasure {
                alpha: 0.0,
                atoms,
                infinite: true,
            },
        }
    }

    /// f(t) = 2t/(1+t), the right logarithmic derivative metric.
    /// Half an atom at 0 and half at infinity.
    pub fn rld() -> Self {
        Self {
            tag: MonotoneTag::Rld,
            nu: NuMeasure {
                alpha: 0.5,
                atoms: vec![(0.0, 0.5)],
                infinite: false,
            },
        }
    }

    /// Purpose-built metric whose measure carries 2(d^2 + d'^2) atoms in
    /// mirror pairs (s, v), (1/s, v/s), normalized to f(1) = 1. Enough
    /// support points to satisfy the cardinality hypothesis of the
    /// metric-equality reversibility criterion at the given dimensions.
    pub fn rich(d_in: usize, d_out: usize) -> Self {
        let half = (d_in * d_in + d_out * d_out).max(1);
        let (lo, hi) = (0.05f64, 0.8f64);
        let mut atoms = Vec::with_capacity(2 * half);
        for k in 0..half {
            let frac = if half == 1 {
                0.5
            } else {
                k as f64 / (half - 1) as f64
            };
            let s = lo * (hi / lo).powf(frac);
            // mirror pair keeping the measure invariant under (s, w) -> (1/s, w/s)
            atoms.push((s, 1.0));
            atoms.push((1.0 / s, 1.0 / s));
        }
        // normalize: 1/f(1) = sum w/(1+s) must be 1
        let c: f64 = atoms.iter().map(|&(s, w)| w / (1.0 + s)).sum();
        for a in &mut atoms {
            a.1 /= c;
        }
        Self {
            tag: MonotoneTag::Rich,
            nu: NuMeasure {
                alpha: 0.0,
                atoms,
                infinite: false,
            },
        }
    }

    /// Closed-form value of f on (0, infinity).
    pub fn eval(&self, t: f64) -> f64 {
        debug_assert!(t > 0.0);
        match self.tag {
            MonotoneTag::Bures => 0.5 * (1.0 + t),
            MonotoneTag::KuboMori => {
                if (t - 1.0).abs() < 1e-8 {
                    0.5 * (1.0 + t)
                } else {
                    (t - 1.0) / t.ln()
                }
            }
            MonotoneTag::Rld => 2.0 * t / (1.0 + t),
            MonotoneTag::Rich => {
                let inv: f64 = self.nu.alpha / t
                    + self
                        .nu
                        .atoms
                        .iter()
                        .map(|&(s, w)| w / (t + s))
                        .sum::<f64>();
                1.0 / inv
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self.tag {
            MonotoneTag::Bures => "bures",
            MonotoneTag::KuboMori => "kubo_mori",
            MonotoneTag::Rld => "rld",
            MonotoneTag::Rich => "rich",
        }
    }
}

fn check_support(rho: &DensityOperator, x: &CMatrix) -> Result<()> {
    if x.rows() != rho.dim() || x.cols() != rho.dim() {
        return Err(Error::DimensionMismatch {
            context: "metric argument dims",
            lhs: x.rows(),
            rhs: rho.dim(),
        });
    }
    if rho.is_invertible() {
        return Ok(());
    }
    let p = rho.support_projection();
    let inside = &(&p * x) * &p;
    let leak = (x - &inside).frobenius_norm();
    if leak > 1e-9 * x.frobenius_norm().max(1.0) {
        return Err(Error::SupportViolation(format!(
            "metric argument leaks {leak:e} outside supp rho"
        )));
    }
    Ok(())
}

/// (J_rho^f)^{-1}(x) on the support of rho.
pub fn metric_inverse_apply(
    rho: &DensityOperator,
    x: &CMatrix,
    f: &MonotoneFunction,
) -> Result<CMatrix> {
    check_support(rho, x)?;
    let dec = rho.spectral();
    let cut = dec.support_cutoff();
    let d = rho.dim();
    let mut out = CMatrix::zeros(d, d);
    for (i, &li) in dec.eigenvalues.iter().enumerate() {
        if li <= cut {
            continue;
        }
        for (j, &lj) in dec.eigenvalues.iter().enumerate() {
            if lj <= cut {
                continue;
            }
            let denom = f.eval(li / lj) * lj;
            let term = &(&dec.projections[i] * x) * &dec.projections[j];
            out = &out + &term.scale_re(1.0 / denom);
        }
    }
    Ok(out)
}

/// J_rho^f(x): the forward metric operator, inverse of the above on supp rho.
pub fn metric_apply(rho: &DensityOperator, x: &CMatrix, f: &MonotoneFunction) -> Result<CMatrix> {
    check_support(rho, x)?;
    let dec = rho.spectral();
    let cut = dec.support_cutoff();
    let d = rho.dim();
    let mut out = CMatrix::zeros(d, d);
    for (i, &li) in dec.eigenvalues.iter().enumerate() {
        if li <= cut {
            continue;
        }
        for (j, &lj) in dec.eigenvalues.iter().enumerate() {
            if lj <= cut {
                continue;
            }
            let term = &(&dec.projections[i] * x) * &dec.projections[j];
            out = &out + &term.scale_re(f.eval(li / lj) * lj);
        }
    }
    Ok(out)
}

/// Metric value gamma_rho^f(x, y) = Re Tr x* (J_rho^f)^{-1}(y).
pub fn fisher_metric(
    rho: &DensityOperator,
    x: &CMatrix,
    y: &CMatrix,
    f: &MonotoneFunction,
) -> Result<f64> {
    let jy = metric_inverse_apply(rho, y, f)?;
    Ok(x.hs_inner(&jy).re)
}

/// Quadratic divergence chi^2_f(sigma, rho) = gamma_rho^f(sigma - rho, sigma - rho).
/// Requires supp(sigma - rho) inside supp rho.
pub fn chi2_divergence(
    sigma: &DensityOperator,
    rho: &DensityOperator,
    f: &MonotoneFunction,
) -> Result<f64> {
    let x = sigma.matrix() - rho.matrix();
    fisher_metric(rho, &x, &x, f)
}

/// (L_rho + s R_rho)^{-1}(x) on the support of rho; the building block every
/// monotone inverse metric integrates over.
pub fn resolvent_apply(rho: &DensityOperator, x: &CMatrix, s: f64) -> Result<CMatrix> {
    check_support(rho, x)?;
    let dec = rho.spectral();
    let cut = dec.support_cutoff();
    let d = rho.dim();
    let mut out = CMatrix::zeros(d, d);
    for (i, &li) in dec.eigenvalues.iter().enumerate() {
        if li <= cut {
            continue;
        }
        for (j, &lj) in dec.eigenvalues.iter().enumerate() {
            if lj <= cut {
                continue;
            }
            let term = &(&dec.projections[i] * x) * &dec.projections[j];
            out = &out + &term.scale_re(1.0 / (li + s * lj));
        }
    }
    Ok(out)
}

/// Per-atom resolvent residuals behind a metric equality: when the metric
/// value is preserved and the measure has enough support points, each
/// resolvent must satisfy (L_rho + s R_rho)^{-1}(x) =
/// T*[(L_Trho + s R_Trho)^{-1}(T x)]. `s = +inf` rows encode the alpha term
/// x rho^{-1} = T*((Tx) (Trho)^{-1}).
#[derive(Clone, Debug)]
pub struct FisherEqualityCheck {
    pub metric_in: f64,
    pub metric_out: f64,
    /// metric_in - metric_out; nonnegative up to rounding by monotonicity.
    pub gap: f64,
    pub per_s_residuals: Vec<(f64, f64)>,
    pub max_residual: f64,
}

pub fn fisher_equality_check(
    t: &Channel,
    rho: &DensityOperator,
    x: &CMatrix,
    f: &MonotoneFunction,
) -> Result<FisherEqualityCheck> {
    let t_rho = t.apply_to_state(rho)?;
    let tx = t.apply(x);
    let adj = t.adjoint();
    let metric_in = fisher_metric(rho, x, x, f)?;
    let metric_out = fisher_metric(&t_rho, &tx, &tx, f)?;

    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    let scale = x.frobenius_norm().max(1.0);
    for &(s, _w) in &f.nu.atoms {
        let lhs = resolvent_apply(rho, x, s)?;
        let rhs = adj.apply(&resolvent_apply(&t_rho, &tx, s)?);
        let res = (&lhs - &rhs).frobenius_norm() / scale;
        worst = worst.max(res);
        rows.push((s, res));
    }
    if f.nu.alpha > 0.0 {
        let lhs = x * &rho.pow(-1.0);
        let rhs = adj.apply(&(&tx * &t_rho.pow(-1.0)));
        let res = (&lhs - &rhs).frobenius_norm() / scale;
        worst = worst.max(res);
        rows.push((f64::INFINITY, res));
    }
    Ok(FisherEqualityCheck {
        metric_in,
        metric_out,
        gap: metric_in - metric_out,
        per_s_residuals: rows,
        max_residual: worst,
    })
}

/// Open interval of t around 0 keeping rho + t x positive semidefinite,
/// shrunk by 1% for numerical headroom. Requires Hermitian x supported in
/// supp rho; infinite ends are +-inf.
pub fn state_line_interval(rho: &DensityOperator, x: &CMatrix) -> Result<(f64, f64)> {
    check_support(rho, x)?;
    let inv = rho.inv_sqrt();
    let m = (&(&inv * x) * &inv).hermitize();
    let dec = crate::linalg::hermitian_spectral(&m, None)?;
    let mu_max = dec.eigenvalues.first().copied().unwrap_or(0.0);
    let mu_min = dec.eigenvalues.last().copied().unwrap_or(0.0);
    let hi = if mu_min < -1e-14 {
        0.99 / (-mu_min)
    } else {
        f64::INFINITY
    };
    let lo = if mu_max > 1e-14 {
        -0.99 / mu_max
    } else {
        f64::NEG_INFINITY
    };
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;
    use crate::sample::Sampler;

    fn catalog() -> Vec<MonotoneFunction> {
        vec![
            MonotoneFunction::bures(),
            MonotoneFunction::kubo_mori(),
            MonotoneFunction::rld(),
            MonotoneFunction::rich(2, 2),
        ]
    }

    #[test]
    fn catalog_eval_values() {
        let b = MonotoneFunction::bures();
        assert!((b.eval(1.0) - 1.0).abs() < 1e-15);
        assert!((b.eval(3.0) - 2.0).abs() < 1e-15);

        let km = MonotoneFunction::kubo_mori();
        assert!((km.eval(1.0) - 1.0).abs() < 1e-12);
        assert!((km.eval(std::f64::consts::E) - (std::f64::consts::E - 1.0)).abs() < 1e-12);

        let r = MonotoneFunction::rld();
        assert!((r.eval(1.0) - 1.0).abs() < 1e-15);
        assert!((r.eval(3.0) - 1.5).abs() < 1e-15);

        let rich = MonotoneFunction::rich(2, 3);
        assert!((rich.eval(1.0) - 1.0).abs() < 1e-12, "normalized at 1");
        assert_eq!(rich.nu.atoms.len(), 2 * (4 + 9));
        // mirror symmetry of the measure: f(t) = t f(1/t)
        for t in [0.3, 0.7, 2.5] {
            assert!((rich.eval(t) - t * rich.eval(1.0 / t)).abs() < 1e-12);
        }
    }

    #[test]
    fn all_metrics_agree_classically() {
        // commuting case: every monotone metric is the classical Fisher info
        let rho = DensityOperator::new(CMatrix::diag_real(&[0.5, 0.3, 0.2])).unwrap();
        let x = CMatrix::diag_real(&[0.1, -0.04, -0.06]);
        let classical: f64 = [0.1f64, -0.04, -0.06]
            .iter()
            .zip([0.5f64, 0.3, 0.2].iter())
            .map(|(u, p)| u * u / p)
            .sum();
        for f in catalog() {
            let g = fisher_metric(&rho, &x, &x, &f).unwrap();
            assert!((g - classical).abs() < 1e-10, "{}", f.name());
        }
    }

    #[test]
    fn inverse_and_forward_cancel() {
        let mut s = Sampler::new(97);
        let rho = DensityOperator::new(s.invertible_state(3, 0.05)).unwrap();
        let x = s.hermitian(3);
        for f in catalog() {
            let y = metric_inverse_apply(&rho, &x, &f).unwrap();
            let back = metric_apply(&rho, &y, &f).unwrap();
            assert!((&back - &x).frobenius_norm() < 1e-9, "{}", f.name());
        }
    }

    #[test]
    fn resolvent_solves_sylvester() {
        let mut s = Sampler::new(101);
        let rho = DensityOperator::new(s.invertible_state(3, 0.05)).unwrap();
        let x = s.hermitian(3);
        for sv in [0.0, 0.5, 1.0, 10.0] {
            let y = resolvent_apply(&rho, &x, sv).unwrap();
            // L y + s R y = rho y + s y rho must reproduce x
            let lhs = &(rho.matrix() * &y) + &(&y * rho.matrix()).scale_re(sv);
            assert!((&lhs - &x).frobenius_norm() < 1e-10);
        }
    }

    #[test]
    fn monotonicity_under_channels() {
        let mut s = Sampler::new(103);
        for f in catalog() {
            for _ in 0..4 {
                let rho = DensityOperator::new(s.invertible_state(3, 0.05)).unwrap();
                let x = s.traceless_hermitian(3);
                let t = crate::channels::Channel::from_kraus(s.kraus_channel(3, 3, 2)).unwrap();
                let chk = fisher_equality_check(&t, &rho, &x, &f).unwrap();
                assert!(
                    chk.gap >= -1e-9,
                    "{} contracted the wrong way: {}",
                    f.name(),
                    chk.gap
                );
            }
        }
    }

    #[test]
    fn chi2_positive_definite() {
        let mut s = Sampler::new(107);
        let rho = DensityOperator::new(s.invertible_state(3, 0.05)).unwrap();
        let sigma = DensityOperator::new(s.invertible_state(3, 0.05)).unwrap();
        for f in catalog() {
            let v = chi2_divergence(&sigma, &rho, &f).unwrap();
            assert!(v > 0.0);
            let z = chi2_divergence(&rho, &rho, &f).unwrap();
            assert!(z.abs() < 1e-12);
        }
    }

    #[test]
    fn equality_check_flat_for_unitaries() {
        let mut s = Sampler::new(109);
        let rho = DensityOperator::new(s.invertible_state(3, 0.05)).unwrap();
        let x = s.traceless_hermitian(3);
        let u = s.unitary(3);
        let t = crate::channels::Channel::unitary(&u).unwrap();
        for f in catalog() {
            let chk = fisher_equality_check(&t, &rho, &x, &f).unwrap();
            assert!(chk.gap.abs() < 1e-9, "{}", f.name());
            assert!(chk.max_residual < 1e-9, "{}", f.name());
        }

        // an information-destroying channel shows a strict gap and residuals
        let omega = DensityOperator::new(CMatrix::diag_real(&[0.4, 0.3, 0.3])).unwrap();
        let bad = crate::channels::Channel::fixed_output(&omega, 3);
        let f = MonotoneFunction::bures();
        let chk = fisher_equality_check(&bad, &rho, &x, &f).unwrap();
        assert!(chk.gap > 1e-3);
        assert!(chk.max_residual > 1e-3);
    }

    #[test]
    fn support_violation_rejected() {
        let rho = DensityOperator::new(CMatrix::diag_real(&[0.5, 0.5, 0.0])).unwrap();
        let mut x = CMatrix::zeros(3, 3);
        x[(2, 2)] = c64(1.0, 0.0);
        x[(0, 0)] = c64(-1.0, 0.0);
        assert!(matches!(
            fisher_metric(&rho, &x, &x, &MonotoneFunction::bures()),
            Err(Error::SupportViolation(_))
        ));
    }

    #[test]
    fn line_interval_keeps_states_positive() {
        let mut s = Sampler::new(113);
        let rho = DensityOperator::new(s.invertible_state(3, 0.05)).unwrap();
        let x = s.traceless_hermitian(3);
        let (lo, hi) = state_line_interval(&rho, &x).unwrap();
        assert!(lo < 0.0 && hi > 0.0);
        for t in [lo, hi] {
            if t.is_finite() {
                let m = (rho.matrix() + &x.scale_re(t)).hermitize();
                let dec = crate::linalg::hermitian_spectral(&m, None).unwrap();
                assert!(dec.min_eigenvalue() > -1e-12);
            }
        }
        // 2% beyond the upper end must dip negative when finite
        if hi.is_finite() {
            let m = (rho.matrix() + &x.scale_re(hi * 1.02)).hermitize();
            let dec = crate::linalg::hermitian_spectral(&m, None).unwrap();
            assert!(dec.min_eigenvalue() < 0.0);
        }
    }
}
