//! Quantum f-divergences through the spectrum of the relative modular
//! operator, with a small catalog of operator convex functions carrying their
//! integral representations.
//!
//! For states sigma, rho the relative modular operator acts as
//! x -> sigma x rho^{-1} on supp rho; its spectrum is the set of eigenvalue
//! ratios a_i / b_j weighted by b_j Tr(P_i Q_j). The divergence
//! S_f(sigma || rho) is the f-moment of that weighted spectrum plus an f(0)
//! term for the part of supp rho that sigma misses.

use crate::channels::DensityOperator;
use crate::error::{Error, Result};
use serde::{Serialize, Serializer};

/// Real line extended with +infinity; serializes as a number or "+inf".
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    PlusInfinity,
}

impl ExtReal {
    pub fn is_finite(&self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            ExtReal::Finite(v) => Some(*v),
            ExtReal::PlusInfinity => None,
        }
    }

    pub fn as_f64(&self) -> f64 {
        match self {
            ExtReal::Finite(v) => *v,
            ExtReal::PlusInfinity => f64::INFINITY,
        }
    }
}

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtReal::Finite(v) => s.serialize_f64(*v),
            ExtReal::PlusInfinity => s.serialize_str("+inf"),
        }
    }
}

/// One eigenvalue line of the relative modular operator: the ratio and its
/// weight in the rho-induced measure.
#[derive(Clone, Copy, Debug)]
pub struct ModularLine {
    pub ratio: f64,
    pub weight: f64,
}

/// Weighted spectrum of the relative modular operator of (sigma, rho).
#[derive(Clone, Debug)]
pub struct RelativeModularSpectrum {
    /// (a_i / b_j, b_j Tr(P_i Q_j)) over positive eigenvalues of both states.
    pub lines: Vec<ModularLine>,
    /// Mass of supp rho lying in the kernel of sigma; picks up f(0).
    pub zero_block_weight: f64,
}

impl RelativeModularSpectrum {
    /// Total mass; equals Tr rho restricted to its support, so 1 for states.
    pub fn total_mass(&self) -> f64 {
        self.lines.iter().map(|l| l.weight).sum::<f64>() + self.zero_block_weight
    }

    /// Distinct ratios appearing with weight above `weight_tol`, merged when
    /// closer than `ratio_tol` relatively.
    pub fn distinct_ratios(&self, ratio_tol: f64, weight_tol: f64) -> Vec<f64> {
        let mut rs: Vec<f64> = self
            .lines
            .iter()
            .filter(|l| l.weight > weight_tol)
            .map(|l| l.ratio)
            .collect();
        rs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut out: Vec<f64> = Vec::new();
        for r in rs {
            match out.last() {
                Some(&last) if (r - last).abs() <= ratio_tol * last.max(1e-300) => {}
                _ => out.push(r),
            }
        }
        out
    }
}

fn support_leak(sigma: &DensityOperator, rho: &DensityOperator) -> f64 {
    let q = rho.support_projection();
    sigma.matrix().trace().re - (&q * &(sigma.matrix() * &q)).trace().re
}

/// Spectrum of the relative modular operator; requires supp sigma <= supp rho.
pub fn relative_modular_spectrum(
    sigma: &DensityOperator,
    rho: &DensityOperator,
) -> Result<RelativeModularSpectrum> {
    if sigma.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            context: "relative modular spectrum state dims",
            lhs: sigma.dim(),
            rhs: rho.dim(),
        });
    }
    let leak = support_leak(sigma, rho);
    if leak.abs() > 1e-9 * sigma.dim() as f64 {
        return Err(Error::SupportViolation(format!(
            "supp sigma leaks {leak:e} outside supp rho"
        )));
    }
    let sd = sigma.spectral();
    let rd = rho.spectral();
    let s_cut = sd.support_cutoff();
    let r_cut = rd.support_cutoff();

    let mut lines = Vec::new();
    let mut zero_block = 0.0f64;
    // kernel projection of sigma
    let mut p0 = crate::CMatrix::identity(sigma.dim());
    for (i, &a) in sd.eigenvalues.iter().enumerate() {
        if a > s_cut {
            p0 = &p0 - &sd.projections[i];
        }
    }
    for (j, &b) in rd.eigenvalues.iter().enumerate() {
        if b <= r_cut {
            continue;
        }
        let qj = &rd.projections[j];
        for (i, &a) in sd.eigenvalues.iter().enumerate() {
            if a <= s_cut {
                continue;
            }
            let overlap = (&sd.projections[i] * qj).trace().re.max(0.0);
            if overlap > 1e-14 {
                lines.push(ModularLine {
                    ratio: a / b,
                    weight: b * overlap,
                });
            }
        }
        let z = (&p0 * qj).trace().re.max(0.0);
        if z > 1e-14 {
            zero_block += b * z;
        }
    }
    Ok(RelativeModularSpectrum {
        lines,
        zero_block_weight: zero_block,
    })
}

/// How many points carry the representing measure.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum MeasureSupport {
    Infinite,
    Finite(usize),
}

impl MeasureSupport {
    /// Atom count when finite.
    pub fn count(&self) -> Option<usize> {
        match self {
            MeasureSupport::Infinite => None,
            MeasureSupport::Finite(n) => Some(*n),
        }
    }
}

/// Positive measure on (0, infinity) held as quadrature nodes (t, weight).
/// `infinite` distinguishes a genuinely continuous measure from a finite atom
/// list; the nodes of a continuous measure are a discretization, not its
/// support.
#[derive(Clone, Debug)]
pub struct Measure {
    pub nodes: Vec<(f64, f64)>,
    pub infinite: bool,
}

impl Measure {
    pub fn support_cardinality(&self) -> MeasureSupport {
        if self.infinite {
            MeasureSupport::Infinite
        } else {
            MeasureSupport::Finite(self.nodes.len())
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ConvexTag {
    XLogX,
    OneMinusPower(f64),
    InvOnePlus,
}

/// Operator convex function on [0, infinity) in the canonical form
/// f(x) = f0 + a x + b x^2 + int (x/(1+t) - x/(x+t)) dmu(t).
/// Closed-form evaluation comes from the tag; the measure is kept for
/// hypothesis checks and for cross-validating the representation.
#[derive(Clone, Debug)]
pub struct OperatorConvexFunction {
    pub tag: ConvexTag,
    pub f0: f64,
    pub a: f64,
    pub b: f64,
    pub measure: Measure,
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 1..=n {
        let mut x = (std::f64::consts::PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            // Legendre P_n and derivative via recurrence
            let (mut p0, mut p1) = (1.0f64, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (mut p0, mut p1) = (1.0f64, x);
        for k in 2..=n {
            let kf = k as f64;
            let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
            p0 = p1;
            p1 = p2;
        }
        let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

impl OperatorConvexFunction {
    /// x log x (natural log), the relative entropy generator. Lebesgue
    /// representing measure, discretized through t = u/(1-u).
    pub fn xlogx() -> Self {
        let nodes = gauss_legendre(40)
            .into_iter()
            .map(|(x, w)| {
                let u = 0.5 * (x + 1.0);
                let t = u / (1.0 - u);
                (t, 0.5 * w / ((1.0 - u) * (1.0 - u)))
            })
            .collect();
        Self {
            tag: ConvexTag::XLogX,
            f0: 0.0,
            a: 0.0,
            b: 0.0,
            measure: Measure {
                nodes,
                infinite: true,
            },
        }
    }

    /// 1 - x^s for 0 < s < 1; measure (sin(s pi)/pi) t^{s-1} dt, discretized
    /// through t = u^2 on u in [0, 40].
    pub fn one_minus_power(s: f64) -> Result<Self> {
        if !(0.0 < s && s < 1.0) {
            return Err(Error::DomainError(format!(
                "one_minus_power exponent {s} outside (0, 1)"
            )));
        }
        let c = (s * std::f64::consts::PI).sin() / std::f64::consts::PI;
        let nodes = gauss_legendre(40)
            .into_iter()
            .map(|(x, w)| {
                let u = 20.0 * (x + 1.0); // [0, 40]
                let t = u * u;
                (t, 20.0 * w * c * 2.0 * u.powf(2.0 * s - 1.0))
            })
            .collect();
        Ok(Self {
            tag: ConvexTag::OneMinusPower(s),
            f0: 1.0,
            a: -1.0,
            b: 0.0,
            measure: Measure {
                nodes,
                infinite: true,
            },
        })
    }

    /// 1/(1+x); a single atom at t = 1 with weight 1.
    pub fn inv_one_plus() -> Self {
        Self {
            tag: ConvexTag::InvOnePlus,
            f0: 1.0,
            a: -0.5,
            b: 0.0,
            measure: Measure {
                nodes: vec![(1.0, 1.0)],
                infinite: false,
            },
        }
    }

    /// Closed-form value; x must be >= 0.
    pub fn eval(&self, x: f64) -> f64 {
        debug_assert!(x >= 0.0, "operator convex catalog lives on [0, inf)");
        match self.tag {
            ConvexTag::XLogX => {
                if x == 0.0 {
                    0.0
                } else {
                    x * x.ln()
                }
            }
            ConvexTag::OneMinusPower(s) => 1.0 - x.powf(s),
            ConvexTag::InvOnePlus => 1.0 / (1.0 + x),
        }
    }

    /// Value of the canonical integral representation using the stored
    /// quadrature nodes; exact for atomic measures, approximate otherwise.
    pub fn eval_integral(&self, x: f64) -> f64 {
        let mut v = self.f0 + self.a * x + self.b * x * x;
        for &(t, w) in &self.measure.nodes {
            v += w * (x / (1.0 + t) - x / (x + t));
        }
        v
    }

    pub fn name(&self) -> String {
        match self.tag {
            ConvexTag::XLogX => "xlogx".into(),
            ConvexTag::OneMinusPower(s) => format!("one_minus_power:{s}"),
            ConvexTag::InvOnePlus => "inv_one_plus".into(),
        }
    }
}

/// S_f(sigma || rho) from the relative modular spectrum. Requires
/// supp sigma <= supp rho.
pub fn f_divergence(
    f: &OperatorConvexFunction,
    sigma: &DensityOperator,
    rho: &DensityOperator,
) -> Result<f64> {
    let spec = relative_modular_spectrum(sigma, rho)?;
    let mut v = 0.0;
    for l in &spec.lines {
        v += f.eval(l.ratio) * l.weight;
    }
    v += f.eval(0.0) * spec.zero_block_weight;
    Ok(v)
}

/// Umegaki relative entropy S(sigma || rho) = Tr sigma (log sigma - log rho),
/// +inf when supp sigma is not contained in supp rho. Natural log.
pub fn relative_entropy(sigma: &DensityOperator, rho: &DensityOperator) -> Result<ExtReal> {
    if sigma.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            context: "relative entropy state dims",
            lhs: sigma.dim(),
            rhs: rho.dim(),
        });
    }
    if support_leak(sigma, rho).abs() > 1e-9 * sigma.dim() as f64 {
        return Ok(ExtReal::PlusInfinity);
    }
    Ok(ExtReal::Finite(f_divergence(
        &OperatorConvexFunction::xlogx(),
        sigma,
        rho,
    )?))
}

/// Tr sigma^s rho^{1-s} with the support convention x^0 = supp x; defined for
/// any pair of states and s in [0, 1].
pub fn power_trace(sigma: &DensityOperator, rho: &DensityOperator, s: f64) -> Result<f64> {
    if sigma.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            context: "power trace state dims",
            lhs: sigma.dim(),
            rhs: rho.dim(),
        });
    }
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::DomainError(format!(
            "power trace exponent {s} outside [0, 1]"
        )));
    }
    let a = sigma.pow(s);
    let b = rho.pow(1.0 - s);
    Ok((&a * &b).trace().re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::Channel;
    use crate::sample::Sampler;
    use crate::CMatrix;

    #[test]
    fn spectrum_mass_and_support() {
        let mut s = Sampler::new(61);
        let sigma = DensityOperator::new(s.invertible_state(3, 0.05)).unwrap();
        let rho = DensityOperator::new(s.invertible_state(3, 0.05)).unwrap();
        let spec = relative_modular_spectrum(&sigma, &rho).unwrap();
        assert!((spec.total_mass() - 1.0).abs() < 1e-10);
        assert!(spec.zero_block_weight.abs() < 1e-12);
        assert!(spec.lines.iter().all(|l| l.ratio > 0.0 && l.weight > 0.0));

        // singular sigma inside full-support rho picks up zero-block mass
        let sing = DensityOperator::new(CMatrix::diag_real(&[0.5, 0.5, 0.0])).unwrap();
        let spec = relative_modular_spectrum(&sing, &rho).unwrap();
        assert!(spec.zero_block_weight > 1e-3);
        assert!((spec.total_mass() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn support_violation_detected() {
        let sigma = DensityOperator::new(CMatrix::diag_real(&[0.5, 0.0, 0.5])).unwrap();
        let rho = DensityOperator::new(CMatrix::diag_real(&[0.5, 0.5, 0.0])).unwrap();
        assert!(matches!(
            relative_modular_spectrum(&sigma, &rho),
            Err(Error::SupportViolation(_))
        ));
        assert_eq!(
            relative_entropy(&sigma, &rho).unwrap(),
            ExtReal::PlusInfinity
        );
    }

    #[test]
    fn commuting_case_matches_classical_formulas() {
        let p = [0.5, 0.3, 0.2];
        let q = [0.25, 0.25, 0.5];
        let sigma = DensityOperator::new(CMatrix::diag_real(&p)).unwrap();
        let rho = DensityOperator::new(CMatrix::diag_real(&q)).unwrap();

        let kl: f64 = p
            .iter()
            .zip(q.iter())
            .map(|(pi, qi)| pi * (pi / qi).ln())
            .sum();
        let got = relative_entropy(&sigma, &rho).unwrap().value().unwrap();
        assert!((got - kl).abs() < 1e-12);

        let f = OperatorConvexFunction::inv_one_plus();
        let classical: f64 = p
            .iter()
            .zip(q.iter())
            .map(|(pi, qi)| qi * f.eval(pi / qi))
            .sum();
        assert!((f_divergence(&f, &sigma, &rho).unwrap() - classical).abs() < 1e-12);

        for s in [0.25, 0.5, 0.75] {
            let want: f64 = p
                .iter()
                .zip(q.iter())
                .map(|(pi, qi)| pi.powf(s) * qi.powf(1.0 - s))
                .sum();
            assert!((power_trace(&sigma, &rho, s).unwrap() - want).abs() < 1e-12);
        }
    }

    #[test]
    fn catalog_closed_forms() {
        let xlx = OperatorConvexFunction::xlogx();
        assert_eq!(xlx.eval(1.0), 0.0);
        assert!((xlx.eval(std::f64::consts::E) - std::f64::consts::E).abs() < 1e-14);
        assert_eq!(xlx.eval(0.0), 0.0);

        let sq = OperatorConvexFunction::one_minus_power(0.5).unwrap();
        assert!((sq.eval(4.0) + 1.0).abs() < 1e-14);
        assert_eq!(sq.eval(0.0), 1.0);
        assert!(OperatorConvexFunction::one_minus_power(1.0).is_err());

        let inv = OperatorConvexFunction::inv_one_plus();
        assert!((inv.eval(1.0) - 0.5).abs() < 1e-15);
        assert_eq!(inv.eval(0.0), 1.0);
        assert_eq!(inv.measure.support_cardinality(), MeasureSupport::Finite(1));
        assert_eq!(
            xlx.measure.support_cardinality(),
            MeasureSupport::Infinite
        );
    }

    #[test]
    fn integral_representations_match_closed_forms() {
        let xlx = OperatorConvexFunction::xlogx();
        for k in 0..20 {
            let x = 0.25 + 3.75 * k as f64 / 19.0;
            let gap = (xlx.eval(x) - xlx.eval_integral(x)).abs();
            assert!(gap < 1e-5, "xlogx at {x}: gap {gap:e}");
        }

        let sq = OperatorConvexFunction::one_minus_power(0.5).unwrap();
        for k in 0..20 {
            let x = 0.2 + 3.8 * k as f64 / 19.0;
            let gap = (sq.eval(x) - sq.eval_integral(x)).abs();
            assert!(gap < 1e-3, "one_minus_power(1/2) at {x}: gap {gap:e}");
        }

        // atomic measure is exact
        let inv = OperatorConvexFunction::inv_one_plus();
        for k in 1..20 {
            let x = 0.2 * k as f64;
            assert!((inv.eval(x) - inv.eval_integral(x)).abs() < 1e-13);
        }
    }

    #[test]
    fn self_divergence_is_f_of_one() {
        let mut s = Sampler::new(67);
        let rho = DensityOperator::new(s.invertible_state(3, 0.05)).unwrap();
        for f in [
            OperatorConvexFunction::xlogx(),
            OperatorConvexFunction::one_minus_power(0.5).unwrap(),
            OperatorConvexFunction::inv_one_plus(),
        ] {
            let v = f_divergence(&f, &rho, &rho).unwrap();
            assert!((v - f.eval(1.0)).abs() < 1e-10, "{}", f.name());
        }
    }

    #[test]
    fn relative_entropy_contracts_under_channels() {
        let mut s = Sampler::new(71);
        let sigma = DensityOperator::new(s.invertible_state(3, 0.05)).unwrap();
        let rho = DensityOperator::new(s.invertible_state(3, 0.05)).unwrap();
        let t = Channel::from_kraus(s.kraus_channel(3, 3, 2)).unwrap();
        let before = relative_entropy(&sigma, &rho).unwrap().value().unwrap();
        let after = relative_entropy(
            &t.apply_to_state(&sigma).unwrap(),
            &t.apply_to_state(&rho).unwrap(),
        )
        .unwrap()
        .value()
        .unwrap();
        assert!(after <= before + 1e-10);
        assert!(before >= -1e-12);
    }

    #[test]
    fn power_trace_support_convention() {
        let sigma = DensityOperator::new(CMatrix::diag_real(&[0.6, 0.4, 0.0])).unwrap();
        let rho = DensityOperator::new(CMatrix::diag_real(&[0.2, 0.3, 0.5])).unwrap();
        // s = 0: Tr supp(sigma) rho
        let v = power_trace(&sigma, &rho, 0.0).unwrap();
        assert!((v - 0.5).abs() < 1e-12);
        // s = 1: Tr sigma supp(rho) = 1
        let v = power_trace(&sigma, &rho, 1.0).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        assert!(power_trace(&sigma, &rho, 1.5).is_err());
    }
}
