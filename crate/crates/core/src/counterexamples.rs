//! Engineered instances where one matched functional agrees across a channel
//! that is not reversible for the pair. They witness that equality of a
//! single divergence or metric certifies reversibility only when the
//! function behind it carries a measure with enough support, and they are
//! self-checking: construction fails if any engineered identity drifts.

use crate::channels::{Channel, DensityOperator};
use crate::divergences::{f_divergence, OperatorConvexFunction};
use crate::error::{Error, Result};
use crate::fisher::{fisher_metric, MonotoneFunction};
use crate::{c64, CMatrix};

/// A matched-but-irreversible instance.
#[derive(Clone, Debug)]
pub struct Counterexample {
    pub name: &'static str,
    /// What the instance demonstrates, in one sentence.
    pub statement: String,
    pub channel: Channel,
    pub sigma: DensityOperator,
    pub rho: DensityOperator,
    /// Engineered operator behind the coincidence: the resolvent solution
    /// for the divergence instance, the tangent direction for the metric one.
    pub witness: CMatrix,
    pub matched_name: &'static str,
    pub matched_in: f64,
    pub matched_out: f64,
    /// |matched_in - matched_out|; tiny by construction.
    pub matched_gap: f64,
    pub separating_name: &'static str,
    pub separating_in: f64,
    pub separating_out: f64,
    /// Gap of the separating functional; bounded away from zero.
    pub separating_gap: f64,
    /// Defect of the composed recovery on sigma; bounded away from zero.
    pub recovery_residual: f64,
    /// Support size of the measure behind the matched functional.
    pub support_atoms: usize,
    /// Distinct modular ratios across input and output, the support size a
    /// measure must reach before the matched equality certifies
    /// reversibility.
    pub required_atoms: usize,
}

fn pauli_x() -> CMatrix {
    let mut m = CMatrix::zeros(2, 2);
    m[(0, 1)] = c64(1.0, 0.0);
    m[(1, 0)] = c64(1.0, 0.0);
    m
}

/// Distinct eigenvalues of the relative modular operators of the given
/// pairs, taken on the whole matrix space: every ratio of a support
/// eigenvalue of the first state to one of the second.
fn distinct_ratio_count(pairs: &[(&DensityOperator, &DensityOperator)]) -> usize {
    let mut ratios: Vec<f64> = Vec::new();
    for (s, r) in pairs {
        let (sd, rd) = (s.spectral(), r.spectral());
        let (s_cut, r_cut) = (sd.support_cutoff(), rd.support_cutoff());
        for &a in sd.eigenvalues.iter().filter(|l| **l > s_cut) {
            for &b in rd.eigenvalues.iter().filter(|l| **l > r_cut) {
                ratios.push(a / b);
            }
        }
    }
    ratios.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ratios.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * b.abs().max(1.0));
    ratios.len()
}

fn recovery_defect(t: &Channel, sigma: &DensityOperator, rho: &DensityOperator) -> Result<f64> {
    let rec = t.petz_recovery(rho)?;
    let t_sigma = t.apply_to_state(sigma)?;
    Ok((&rec.apply(t_sigma.matrix()) - sigma.matrix()).frobenius_norm())
}

/// Equality of the f-divergence for f of 1/(1+x) type, whose measure is a
/// single atom, on a pinching that is not reversible for the pair.
///
/// The seed is any x with eigenvalues lambda and 1 - lambda, the roots of
/// t^2 - t + c with c = lambda (1 - lambda): then x^2 - x + c = 0 makes
/// sigma x + x rho = rho exact for rho = x sigma x / c, so x is the
/// resolvent solution whose pairing with rho is the divergence. Choosing
/// the eigenbasis of x as the pinching basis and lambda as the weight of
/// sigma in it lets the pinched problem solve to the pinched x, and the two
/// pairings agree while the states themselves are beyond recovery.
pub fn fdiv_instance() -> Result<Counterexample> {
    let theta = std::f64::consts::PI / 5.0;
    let (cs, sn) = (theta.cos(), theta.sin());
    let mut p = CMatrix::zeros(2, 2);
    p[(0, 0)] = c64(cs * cs, 0.0);
    p[(0, 1)] = c64(cs * sn, 0.0);
    p[(1, 0)] = c64(cs * sn, 0.0);
    p[(1, 1)] = c64(sn * sn, 0.0);
    let q = &CMatrix::identity(2) - &p;

    let sigma_mat = CMatrix::diag_real(&[0.7, 0.3]);
    let lambda = (&p * &sigma_mat).trace().re;
    let c = lambda * (1.0 - lambda);
    let x = &p.scale_re(1.0 - lambda) + &q.scale_re(lambda);
    let rho_mat = (&(&x * &sigma_mat) * &x).scale_re(1.0 / c);

    let sigma = DensityOperator::new(sigma_mat)?;
    let rho = DensityOperator::new(rho_mat.hermitize())?;
    let t = Channel::from_kraus(vec![p, q])?;

    let solve_defect =
        (&(&(sigma.matrix() * &x) + &(&x * rho.matrix())) - rho.matrix()).max_abs();
    if solve_defect > 1e-12 {
        return Err(Error::NumericalFailure(format!(
            "engineered resolvent identity drifted to {solve_defect:e}"
        )));
    }
    let commutator_size = sigma.matrix().commutator(&x).frobenius_norm();
    if commutator_size < 1e-6 {
        return Err(Error::NumericalFailure(
            "instance degenerated into a commuting pair".into(),
        ));
    }

    let t_sigma = t.apply_to_state(&sigma)?;
    let t_rho = t.apply_to_state(&rho)?;
    let f = OperatorConvexFunction::inv_one_plus();
    let matched_in = f_divergence(&f, &sigma, &rho)?;
    let matched_out = f_divergence(&f, &t_sigma, &t_rho)?;
    let matched_gap = (matched_in - matched_out).abs();
    if matched_gap > 1e-10 {
        return Err(Error::NumericalFailure(format!(
            "matched divergence gap drifted to {matched_gap:e}"
        )));
    }

    let g = OperatorConvexFunction::xlogx();
    let separating_in = f_divergence(&g, &sigma, &rho)?;
    let separating_out = f_divergence(&g, &t_sigma, &t_rho)?;
    let separating_gap = (separating_in - separating_out).abs();
    let recovery_residual = recovery_defect(&t, &sigma, &rho)?;
    if recovery_residual < 1e-3 || separating_gap < 1e-6 {
        return Err(Error::NumericalFailure(
            "instance is too close to reversible to separate".into(),
        ));
    }

    let required_atoms = distinct_ratio_count(&[(&sigma, &rho), (&t_sigma, &t_rho)]);
    Ok(Counterexample {
        name: "fdiv",
        statement: "an f-divergence whose measure is one atom is preserved by a pinching \
                    that cannot be undone for the pair"
            .into(),
        channel: t,
        sigma,
        rho,
        witness: x,
        matched_name: "f-divergence, f of 1/(1+x) type",
        matched_in,
        matched_out,
        matched_gap,
        separating_name: "relative entropy",
        separating_in,
        separating_out,
        separating_gap,
        recovery_residual,
        support_atoms: f.measure.support_cardinality().count().unwrap_or(usize::MAX),
        required_atoms,
    })
}

/// Equality of the Bures metric along one tangent direction on a pinching
/// that is not reversible for the pair.
///
/// With rho diagonal and y supported in the pinching algebra, the tangent
/// z = rho y + y rho has Bures form 2 Tr y z on the input side; pinching
/// maps rho to the flat state and z to itself, and the output form is the
/// same pairing. Metrics whose measure has more than one atom (Kubo-Mori
/// here) see the difference.
pub fn bures_instance() -> Result<Counterexample> {
    let rho_mat = CMatrix::diag_real(&[0.6, 0.4]);
    let y = pauli_x().scale_re(0.2);
    let z = &(&rho_mat * &y) + &(&y * &rho_mat);
    let sigma_mat = (&rho_mat + &z).hermitize();

    let rho = DensityOperator::new(rho_mat)?;
    let sigma = DensityOperator::new(sigma_mat)?;
    // pinching onto the eigenbasis of the Pauli X operator, the conditional
    // expectation onto the algebra generated by y
    let half = |sign: f64| {
        let mut m = CMatrix::identity(2).scale_re(0.5);
        m[(0, 1)] = c64(0.5 * sign, 0.0);
        m[(1, 0)] = c64(0.5 * sign, 0.0);
        m
    };
    let t = Channel::from_kraus(vec![half(1.0), half(-1.0)])?;

    let t_rho = t.apply_to_state(&rho)?;
    let tz = t.apply(&z);
    let bures = MonotoneFunction::bures();
    let matched_in = fisher_metric(&rho, &z, &z, &bures)?;
    let matched_out = fisher_metric(&t_rho, &tz, &tz, &bures)?;
    let matched_gap = (matched_in - matched_out).abs();
    if matched_gap > 1e-10 {
        return Err(Error::NumericalFailure(format!(
            "matched metric gap drifted to {matched_gap:e}"
        )));
    }

    let km = MonotoneFunction::kubo_mori();
    let separating_in = fisher_metric(&rho, &z, &z, &km)?;
    let separating_out = fisher_metric(&t_rho, &tz, &tz, &km)?;
    let separating_gap = (separating_in - separating_out).abs();
    let recovery_residual = recovery_defect(&t, &sigma, &rho)?;
    if recovery_residual < 1e-3 || separating_gap < 1e-6 {
        return Err(Error::NumericalFailure(
            "instance is too close to reversible to separate".into(),
        ));
    }

    let required_atoms = distinct_ratio_count(&[(&rho, &rho), (&t_rho, &t_rho)]);
    Ok(Counterexample {
        name: "bures",
        statement: "the Bures metric, whose measure is one atom, is preserved along a \
                    tangent direction by a pinching that cannot be undone for the pair"
            .into(),
        channel: t,
        sigma,
        rho,
        witness: z,
        matched_name: "Bures metric along sigma - rho",
        matched_in,
        matched_out,
        matched_gap,
        separating_name: "Kubo-Mori metric along sigma - rho",
        separating_in,
        separating_out,
        separating_gap,
        recovery_residual,
        support_atoms: bures.nu.support_cardinality().count().unwrap_or(usize::MAX),
        required_atoms,
    })
}
