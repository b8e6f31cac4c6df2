//! Conjugate, Maxwell and cut times; caustic sampling; Maxwell-point checks.
//!
//! All finite times have the form t = 2 τ(h̄3) I1 / |h| with τ depending only
//! on h̄3, so they scale as 1/|h|. The transcendental equations for τ are
//! solved by bisection on brackets that carry a proven sign change, in
//! pole-free form (the q3 combination rather than tan/tanh quotients).

use serde::Serialize;

use crate::dynamics::{
    classify, covector_flow, CausalClass, Covector, Regime, StructureParams,
};
use crate::error::{Error, Result};
use crate::geodesic::exp_map;
use crate::group::GroupPoint;
use crate::roots::{bisect, BISECT_TOL};
use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, PI};

/// A positive time, +∞, or "undefined" (the prolate cut time, where no
/// optimal solutions exist at all and the notion has no meaning).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedTime {
    Finite(f64),
    Infinite,
    Undefined,
}

impl Serialize for ExtendedTime {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtendedTime::Finite(v) => s.serialize_f64(*v),
            ExtendedTime::Infinite => s.serialize_str("inf"),
            ExtendedTime::Undefined => s.serialize_str("undefined"),
        }
    }
}

impl ExtendedTime {
    pub fn finite(&self) -> Option<f64> {
        match self {
            ExtendedTime::Finite(v) => Some(*v),
            _ => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtendedTime::Infinite)
    }

    pub fn is_undefined(&self) -> bool {
        matches!(self, ExtendedTime::Undefined)
    }

    fn min(self, other: ExtendedTime) -> ExtendedTime {
        match (self, other) {
            (ExtendedTime::Finite(a), ExtendedTime::Finite(b)) => ExtendedTime::Finite(a.min(b)),
            (ExtendedTime::Finite(a), _) => ExtendedTime::Finite(a),
            (_, ExtendedTime::Finite(b)) => ExtendedTime::Finite(b),
            (a, _) => a,
        }
    }

    /// Text form used by the CSV outputs: number, "inf" or "undefined".
    pub fn csv_cell(&self) -> String {
        match self {
            ExtendedTime::Finite(v) => format!("{v:.16e}"),
            ExtendedTime::Infinite => "inf".into(),
            ExtendedTime::Undefined => "undefined".into(),
        }
    }
}

fn require_not_symmetric(p: &StructureParams) -> Result<()> {
    if p.regime() == Regime::Symmetric {
        Err(Error::SymmetricRegime)
    } else {
        Ok(())
    }
}

fn check_h(h: &Covector, p: &StructureParams) -> Result<CausalClass> {
    if h.h1 >= 0.0 {
        return Err(Error::BadOrientation { h1: h.h1 });
    }
    crate::dynamics::validate_class(h, p)
}

/// First positive root in τ of the conjugate-point bracket
/// τ μ (δ − h̄3²) c(τ) + (δ + μ h̄3²) s(τ) for the prolate Kil < 0 branch,
/// in [π/2, π] (π/2 exactly on the light-like boundary h̄3² = 1/μ).
fn prolate_conj_tau(h3b: f64, mu: f64) -> Result<f64> {
    let e = |tau: f64| -tau * mu * (1.0 + h3b * h3b) * tau.cos() + (mu * h3b * h3b - 1.0) * tau.sin();
    // E(π/2) = μ h̄3² − 1 ≤ 0 and E(π) = π μ (1 + h̄3²) > 0.
    bisect(e, FRAC_PI_2, PI, BISECT_TOL)
}

/// First positive root in τ of q3(τ) = 0 past the trivial root at 0:
/// (π, 3π/2) for the oblate branch, (π/2, π) for the prolate branch.
fn reflection_tau(h3b: f64, mu: f64) -> Result<f64> {
    let q3 = |tau: f64| {
        let a = tau * mu * h3b;
        tau.cos() * a.sinh() + h3b * tau.sin() * a.cosh()
    };
    if mu < 0.0 {
        bisect(q3, PI, 1.5 * PI, BISECT_TOL)
    } else {
        bisect(q3, FRAC_PI_2 + 1e-12, PI, BISECT_TOL)
    }
}

/// First conjugate time along the geodesic with initial covector h.
///
/// Oblate and sub-Lorentzian: 2π I1/|h| for Kil < 0, +∞ for Kil ≥ 0.
/// Prolate: 2 τ* I1/|h| with τ* ∈ [π/2, π) the first root of the conjugate
/// bracket (π/2 exactly for the light-like h̄3 = ±1/√μ family); +∞ for
/// Kil = 0.
pub fn conjugate_time(h: &Covector, p: &StructureParams) -> Result<ExtendedTime> {
    require_not_symmetric(p)?;
    let class = check_h(h, p)?;
    match p.regime() {
        Regime::Oblate | Regime::SubLorentzian => Ok(match class {
            CausalClass::KilNegative => ExtendedTime::Finite(2.0 * PI * p.i1() / h.norm()),
            _ => ExtendedTime::Infinite,
        }),
        Regime::Prolate => match class {
            CausalClass::KilNegative => {
                let (_, _, h3b) = h.unit().ok_or(Error::KilZero)?;
                let tau = prolate_conj_tau(h3b, p.mu())?;
                Ok(ExtendedTime::Finite(2.0 * tau * p.i1() / h.norm()))
            }
            CausalClass::KilZero => Ok(ExtendedTime::Infinite),
            CausalClass::KilPositive => Err(Error::ClassRangeViolation(
                "prolate Kil > 0 covectors are not geodesics".into(),
            )),
        },
        Regime::Symmetric => unreachable!(),
    }
}

/// Per-family Maxwell times: hyperbolic rotations, the reflection across
/// h2 = 0, and the reflection across h3 = 0.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MaxwellDetail {
    pub rotation: ExtendedTime,
    pub h2_reflection: ExtendedTime,
    pub h3_reflection: ExtendedTime,
}

/// First Maxwell time for symmetries with the per-family breakdown.
///
/// For Kil < 0 the rotation family (and with it the h2-reflection, whose
/// first genuine coincidence is the same event q1 = q2 = 0) gives τ = π;
/// the h3-reflection gives the first root of q3(τ) = 0, which lies in
/// (π, 3π/2) when μ < 0 and in (π/2, π) when μ > 0, and is absent when
/// h̄3 = 0 (the geodesic lies in its own reflection plane). Kil ≥ 0: +∞.
pub fn maxwell_time_detailed(
    h: &Covector,
    p: &StructureParams,
) -> Result<(ExtendedTime, MaxwellDetail)> {
    require_not_symmetric(p)?;
    let class = check_h(h, p)?;
    if p.regime() == Regime::Prolate && class == CausalClass::KilPositive {
        return Err(Error::ClassRangeViolation(
            "prolate Kil > 0 covectors are not geodesics".into(),
        ));
    }
    if class != CausalClass::KilNegative {
        let d = MaxwellDetail {
            rotation: ExtendedTime::Infinite,
            h2_reflection: ExtendedTime::Infinite,
            h3_reflection: ExtendedTime::Infinite,
        };
        return Ok((ExtendedTime::Infinite, d));
    }
    let base = 2.0 * p.i1() / h.norm();
    let (_, _, h3b) = h.unit().ok_or(Error::KilZero)?;
    let rotation = ExtendedTime::Finite(base * PI);
    let h2_reflection = rotation;
    let h3_reflection = if h3b == 0.0 {
        ExtendedTime::Infinite
    } else {
        ExtendedTime::Finite(base * reflection_tau(h3b, p.mu())?)
    };
    let min = rotation.min(h2_reflection).min(h3_reflection);
    Ok((
        min,
        MaxwellDetail {
            rotation,
            h2_reflection,
            h3_reflection,
        },
    ))
}

/// First Maxwell time for symmetries (minimum over the three families).
pub fn maxwell_time(h: &Covector, p: &StructureParams) -> Result<ExtendedTime> {
    maxwell_time_detailed(h, p).map(|(t, _)| t)
}

/// Cut time. Oblate and sub-Lorentzian: equals the first conjugate time
/// (2π I1/|h| for Kil < 0, +∞ for light-like geodesics, which stay optimal
/// forever). Prolate: undefined — no longest arcs exist at all.
pub fn cut_time(h: &Covector, p: &StructureParams) -> Result<ExtendedTime> {
    require_not_symmetric(p)?;
    let class = check_h(h, p)?;
    match p.regime() {
        Regime::Oblate | Regime::SubLorentzian => Ok(match class {
            CausalClass::KilNegative => ExtendedTime::Finite(2.0 * PI * p.i1() / h.norm()),
            _ => ExtendedTime::Infinite,
        }),
        Regime::Prolate => Ok(ExtendedTime::Undefined),
        Regime::Symmetric => unreachable!(),
    }
}

/// Points of the first caustic {(π, −i sinh(π μ h̄3))} for the given h̄3
/// values. Oblate / sub-Lorentzian only: the prolate caustic is sampled via
/// `conjugate_time` + `exp_map` instead.
pub fn caustic_sample(p: &StructureParams, h3bar_grid: &[f64]) -> Result<Vec<GroupPoint>> {
    p.require(
        &[Regime::Oblate, Regime::SubLorentzian],
        "oblate or sub-Lorentzian",
    )?;
    Ok(h3bar_grid
        .iter()
        .map(|&h3b| GroupPoint::new(PI, Complex64::new(0.0, -(PI * p.mu() * h3b).sinh())))
        .collect())
}

/// Distance between Exp(h, t_max) and Exp(σh, t_max) for the regime's
/// reflection symmetry σ: the h2-reflection of the initial covector in the
/// oblate case (partners meet at the caustic point), the h3-reflection of
/// the time-t_max covector in the prolate case (partners meet on Im w = 0).
/// Fails when σ fixes the covector, i.e. there is no distinct partner.
pub fn maxwell_pair_check(h: &Covector, p: &StructureParams) -> Result<f64> {
    require_not_symmetric(p)?;
    if classify(h) != CausalClass::KilNegative {
        return Err(Error::ClassRangeViolation(
            "maxwell_pair_check needs Kil(h) < 0".into(),
        ));
    }
    let (t_max, _) = maxwell_time_detailed(h, p)?;
    let t = t_max
        .finite()
        .ok_or_else(|| Error::Internal("Kil < 0 must have finite Maxwell time".into()))?;
    let partner = match p.regime() {
        Regime::Prolate => {
            if h.h3 == 0.0 {
                return Err(Error::FixedCovector);
            }
            // Reflection symmetries pair h with the reflected endpoint
            // covector σ3(h(t)); the pure reflection of h alone is not a
            // symmetry of the flow.
            covector_flow(h, t, p).reflect_h3()
        }
        _ => {
            if h.h2 == 0.0 && h.h3 == 0.0 {
                return Err(Error::FixedCovector);
            }
            if h.h2 == 0.0 {
                // σ2 fixes h itself; use the reflected endpoint covector,
                // which is distinct whenever h3 ≠ 0.
                covector_flow(h, t, p).reflect_h2()
            } else {
                h.reflect_h2()
            }
        }
    };
    let a = exp_map(h, t, p)?.point;
    let b = exp_map(&partner, t, p)?.point;
    Ok(a.sup_dist(&b))
}

/// One row of the time tables: normalized times and Lorentzian times for the
/// H = −1/2 covector with the given h̄3 (and h̄2 = 0).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct OrderingRow {
    pub h3bar: f64,
    pub tau_conj: f64,
    pub tau_maxwell: f64,
    pub t_conj: ExtendedTime,
    pub t_maxwell: ExtendedTime,
    pub t_cut: ExtendedTime,
}

/// Conjugate/Maxwell ordering table for the prolate regime: for every h̄3 in
/// (−1/√μ, 1/√μ), τ_conj ∈ [π/2, π), τ3 ∈ (π/2, π) and τ_conj < τ3 strictly.
pub fn ordering_report(p: &StructureParams, h3bar_grid: &[f64]) -> Result<Vec<OrderingRow>> {
    p.require(&[Regime::Prolate], "prolate")?;
    let mut rows = Vec::with_capacity(h3bar_grid.len());
    for &h3b in h3bar_grid {
        let row = times_row(p, h3b)?;
        if !(row.tau_conj >= FRAC_PI_2 && row.tau_conj < PI) {
            return Err(Error::Internal(format!(
                "τ_conj({h3b}) = {} outside [π/2, π)",
                row.tau_conj
            )));
        }
        // At h̄3 = 0 the reflection family degenerates and both roots merge;
        // the strict inequality has a gap of order h̄3², so it is only
        // checkable above the solver resolution.
        if h3b.abs() > 1e-4 {
            let tau3 = reflection_tau(h3b, p.mu())?;
            if !(tau3 > FRAC_PI_2 && tau3 < PI) {
                return Err(Error::Internal(format!(
                    "τ3({h3b}) = {tau3} outside (π/2, π)"
                )));
            }
            if !(row.tau_conj < tau3) {
                return Err(Error::Internal(format!(
                    "ordering violated at h̄3 = {h3b}: τ_conj = {} ≥ τ3 = {tau3}",
                    row.tau_conj
                )));
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

/// One table row for any non-symmetric regime, from the H = −1/2 covector
/// with the given h̄3 and h̄2 = 0.
pub fn times_row(p: &StructureParams, h3bar: f64) -> Result<OrderingRow> {
    let h = crate::dynamics::timelike_from_h3bar(h3bar, 0.0, p)?;
    let t_conj = conjugate_time(&h, p)?;
    let (t_maxwell, _) = maxwell_time_detailed(&h, p)?;
    let t_cut = cut_time(&h, p)?;
    let to_tau = |t: ExtendedTime| match t {
        ExtendedTime::Finite(v) => v * h.norm() / (2.0 * p.i1()),
        _ => f64::INFINITY,
    };
    Ok(OrderingRow {
        h3bar,
        tau_conj: to_tau(t_conj),
        tau_maxwell: to_tau(t_maxwell),
        t_conj,
        t_maxwell,
        t_cut,
    })
}

/// Time table over an h̄3 grid, for the CLI and the μ-independence checks.
pub fn times_table(p: &StructureParams, h3bar_grid: &[f64]) -> Result<Vec<OrderingRow>> {
    require_not_symmetric(p)?;
    h3bar_grid.iter().map(|&b| times_row(p, b)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::timelike_from_h3bar;

    fn oblate() -> StructureParams {
        StructureParams::from_mu(1.0, -0.5).unwrap()
    }

    fn prolate() -> StructureParams {
        StructureParams::from_mu(1.0, 1.0).unwrap()
    }

    #[test]
    fn oblate_times() {
        let p = oblate();
        let h = Covector::new(-1.0, 0.0, 0.0);
        assert!((conjugate_time(&h, &p).unwrap().finite().unwrap() - 2.0 * PI).abs() < 1e-12);
        assert!((maxwell_time(&h, &p).unwrap().finite().unwrap() - 2.0 * PI).abs() < 1e-12);
        assert!((cut_time(&h, &p).unwrap().finite().unwrap() - 2.0 * PI).abs() < 1e-12);
        // Light-like (Kil > 0) geodesics: optimal forever.
        let fam = crate::dynamics::lightlike_h3bar(&p).unwrap();
        let h3b = fam.h3bar_plus;
        let h1b = -(0.3_f64.powi(2) + (p.mu() + 1.0) / (-p.mu())).sqrt();
        let hl = Covector::new(h1b, 0.3, h3b);
        assert!(cut_time(&hl, &p).unwrap().is_infinite());
        assert!(conjugate_time(&hl, &p).unwrap().is_infinite());
        // Oblate τ3 lies in (π, 3π/2): Maxwell detail keeps the rotation min.
        let h = timelike_from_h3bar(0.8, 0.0, &p).unwrap();
        let (tm, detail) = maxwell_time_detailed(&h, &p).unwrap();
        let tau3 = detail.h3_reflection.finite().unwrap() * h.norm() / (2.0 * p.i1());
        assert!(tau3 > PI && tau3 < 1.5 * PI, "tau3 = {tau3}");
        assert!((tm.finite().unwrap() - 2.0 * PI * p.i1() / h.norm()).abs() < 1e-12);
    }

    #[test]
    fn prolate_conjugate_roots() {
        let p = prolate();
        // h̄3 = 0: first root of tan τ = −τ, frozen from bisection.
        let h = timelike_from_h3bar(0.0, 0.0, &p).unwrap();
        let t = conjugate_time(&h, &p).unwrap().finite().unwrap();
        let tau = t * h.norm() / (2.0 * p.i1());
        assert!((tau - 2.028_757_838_110_434_2).abs() < 1e-11, "tau = {tau}");
        // Light-like boundary: τ* = π/2 exactly.
        let tau = prolate_conj_tau(1.0, 1.0).unwrap();
        assert!((tau - FRAC_PI_2).abs() < 1e-12);
        // Kil > 0 rejected.
        let bad = Covector::new(-1.0, 0.0, 2.0);
        assert!(conjugate_time(&bad, &p).is_err());
    }

    #[test]
    fn prolate_maxwell_and_cut() {
        let p = prolate();
        let h = timelike_from_h3bar(0.5, 0.0, &p).unwrap();
        let (tm, detail) = maxwell_time_detailed(&h, &p).unwrap();
        let tau3 = tm.finite().unwrap() * h.norm() / (2.0 * p.i1());
        // Frozen from bisection of tanh(0.5 τ) = −0.5 tan τ on (π/2, π).
        assert!((tau3 - 2.135_824_306_963_652_7).abs() < 1e-11, "tau3 = {tau3}");
        assert_eq!(detail.h3_reflection.finite().unwrap(), tm.finite().unwrap());
        // The planar geodesic h̄3 = 0: reflection family degenerate, the
        // rotation family still meets at τ = π.
        let h0 = timelike_from_h3bar(0.0, 0.0, &p).unwrap();
        let (tm0, d0) = maxwell_time_detailed(&h0, &p).unwrap();
        assert!(d0.h3_reflection.is_infinite());
        assert!((tm0.finite().unwrap() - 2.0 * PI * p.i1() / h0.norm()).abs() < 1e-12);
        // Cut time undefined in the prolate regime.
        assert!(cut_time(&h, &p).unwrap().is_undefined());
    }

    #[test]
    fn scaling_law() {
        let p = oblate();
        let h = timelike_from_h3bar(0.7, 0.3, &p).unwrap();
        let t1 = conjugate_time(&h, &p).unwrap().finite().unwrap();
        let t2 = conjugate_time(&h.scale(3.0), &p).unwrap().finite().unwrap();
        assert!((t1 / t2 - 3.0).abs() < 1e-12);
        let p = prolate();
        let h = timelike_from_h3bar(0.4, 0.0, &p).unwrap();
        let m1 = maxwell_time(&h, &p).unwrap().finite().unwrap();
        let m2 = maxwell_time(&h.scale(2.5), &p).unwrap().finite().unwrap();
        assert!((m1 / m2 - 2.5).abs() < 1e-12);
    }

    #[test]
    fn caustic_points() {
        let p = oblate();
        let pts = caustic_sample(&p, &[0.0, 0.4, -1.1]).unwrap();
        assert!(pts[0].sup_dist(&GroupPoint::new(PI, Complex64::new(0.0, 0.0))) < 1e-15);
        for pt in &pts {
            assert!((pt.c - PI).abs() < 1e-15 && pt.w.re.abs() < 1e-15);
        }
        // Cross-check against the exponential map at the conjugate time.
        for &h3b in &[0.0, 0.4, -1.1] {
            let h = timelike_from_h3bar(h3b, 0.25, &p).unwrap();
            let t = conjugate_time(&h, &p).unwrap().finite().unwrap();
            let end = exp_map(&h, t, &p).unwrap().point;
            let expected = GroupPoint::new(PI, Complex64::new(0.0, -(PI * p.mu() * h3b).sinh()));
            assert!(end.sup_dist(&expected) < 1e-9, "h3b = {h3b}");
        }
        assert!(caustic_sample(&prolate(), &[0.0]).is_err());
    }

    #[test]
    fn maxwell_pairs_meet() {
        let p = oblate();
        let h = crate::dynamics::normalize(
            &Covector::new(-1.0, 0.3, 0.4),
            &p,
            crate::dynamics::NormalizeTarget::Timelike,
        )
        .unwrap();
        assert!(maxwell_pair_check(&h, &p).unwrap() < 1e-9);
        let pr = prolate();
        for &h3b in &[0.5, -0.5] {
            let h = timelike_from_h3bar(h3b, 0.35, &pr).unwrap();
            assert!(maxwell_pair_check(&h, &pr).unwrap() < 1e-9, "h3b = {h3b}");
            // Meeting point lies on Im w = 0.
            let t = maxwell_time(&h, &pr).unwrap().finite().unwrap();
            let end = exp_map(&h, t, &pr).unwrap().point;
            assert!(end.w.im.abs() < 1e-9);
        }
        assert!(maxwell_pair_check(&Covector::new(-1.0, 0.0, 0.0), &p).is_err());
    }

    #[test]
    fn ordering_strict_in_prolate() {
        let p = prolate();
        let grid: Vec<f64> = (0..25)
            .map(|i| -0.95 + 1.9 * i as f64 / 24.0)
            .collect();
        let rows = ordering_report(&p, &grid).unwrap();
        for r in rows {
            assert!(r.tau_conj < r.tau_maxwell);
            assert!(r.t_cut.is_undefined());
        }
    }

    #[test]
    fn mu_independence_in_oblate_family() {
        let probe = |mu: f64| -> (f64, f64, f64) {
            let p = StructureParams::from_mu(1.0, mu).unwrap();
            // Matched (h̄3, |h|): unit-|h| covector, h̄2 = 0.4.
            let h3b = 0.6_f64;
            let h1b = -(1.0 + 0.16 + h3b * h3b).sqrt();
            let h = Covector::new(h1b, 0.4, h3b);
            (
                conjugate_time(&h, &p).unwrap().finite().unwrap(),
                maxwell_time(&h, &p).unwrap().finite().unwrap(),
                cut_time(&h, &p).unwrap().finite().unwrap(),
            )
        };
        let reference = probe(-0.3);
        for mu in [-0.6, -0.9, -1.0] {
            let v = probe(mu);
            assert!((v.0 - reference.0).abs() < 1e-12);
            assert!((v.1 - reference.1).abs() < 1e-12);
            assert!((v.2 - reference.2).abs() < 1e-12);
        }
    }
}
