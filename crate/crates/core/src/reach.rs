//! Attainable sets, boundary construction and controllability synthesis.
//!
//! Oblate: the attainable set is bounded below by the surface swept by the
//! light-like geodesics; membership compares the queried c against the
//! lifted boundary value at the same w. Sub-Lorentzian: the boundary is
//! swept by the abnormal geodesics (concatenations of at most two
//! light-like arcs) and has the closed form tan c = √((Re w)² + 2|Im w|) /
//! (1 − |Im w|), read on the branch through the identity. Prolate: the
//! attainable set is the whole group and a constructive control program is
//! produced for any target.
//!
//! Membership formulas are interpreted on the lift branch containing the
//! identity: boundary c values are produced by continuous lifting along the
//! defining geodesics from c = 0.

use num_complex::Complex64;
use serde::ser::{SerializeSeq, SerializeStruct};
use serde::{Deserialize, Serialize, Serializer};
use std::f64::consts::{FRAC_PI_2, PI};

use crate::dynamics::{Regime, StructureParams};
use crate::dynamics::Covector;
use crate::error::{Error, Result};
use crate::geodesic::exp_map;
use crate::group::{algebra_exp, AlgebraElement, GroupPoint};
use crate::roots;

/// Boundary tolerance in c for membership classification.
pub const BOUNDARY_EPS: f64 = 1e-7;

/// Maximum number of arcs a synthesis run may emit.
pub const SYNTHESIS_ARC_CAP: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MembershipStatus {
    Interior,
    Boundary,
    Outside,
}

/// Membership answer with the lower boundary value of c at the queried w.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Membership {
    pub status: MembershipStatus,
    pub boundary_c: Option<f64>,
}

impl Membership {
    fn classify(c: f64, boundary: f64) -> Membership {
        let status = if (c - boundary).abs() <= BOUNDARY_EPS {
            MembershipStatus::Boundary
        } else if c > boundary {
            MembershipStatus::Interior
        } else {
            MembershipStatus::Outside
        };
        Membership {
            status,
            boundary_c: Some(boundary),
        }
    }
}

/// The light-like geodesic data reaching a prescribed w: initial covector,
/// time, and the lifted boundary value of c there.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LightlikeReach {
    pub h: Covector,
    pub t: f64,
    pub c_boundary: f64,
}

/// Light-like geodesic through a prescribed w-target (oblate regime).
///
/// For Im w ≠ 0 the geodesic has h̄3 = sign(Im w)/√(−μ) and Kil(h) = +1; τ
/// solves the strictly increasing equation q3(τ) = Im w (its derivative is
/// (μ+1)/√(−μ)·cosh·cosh > 0), then h̄2 solves q2(τ) = Re w, also monotone.
/// For Im w = 0 the sweeping family is the Kil = 0 one (h3 = 0, h1 = ±h2),
/// giving c_boundary = atan|Re w|; this branch also serves μ = −1, where the
/// Kil ≠ 0 light-like geodesics never leave Im w = 0.
pub fn lightlike_reach(w_target: Complex64, p: &StructureParams) -> Result<LightlikeReach> {
    p.require(
        &[Regime::Oblate, Regime::SubLorentzian],
        "oblate or sub-Lorentzian",
    )?;
    let mu = p.mu();
    let i1 = p.i1();
    if w_target.im == 0.0 {
        let sign = if w_target.re >= 0.0 { 1.0 } else { -1.0 };
        let h = Covector::new(-1.0, sign, 0.0);
        let t = 2.0 * i1 * w_target.re.abs();
        return Ok(LightlikeReach {
            h,
            t,
            c_boundary: w_target.re.abs().atan(),
        });
    }
    if p.regime() == Regime::SubLorentzian {
        return Err(Error::InvalidInput(
            "sub-Lorentzian light-like geodesics reach only Im w = 0; use the abnormal boundary"
                .into(),
        ));
    }
    let sign = w_target.im.signum();
    let h3b = sign / (-mu).sqrt();
    let root_mu = (-mu).sqrt();
    // |Im w| as a strictly increasing function of τ.
    let q3_abs = |tau: f64| {
        -tau.cosh() * (tau * root_mu).sinh() + tau.sinh() * (tau * root_mu).cosh() / root_mu
    };
    let tau = roots::solve_increasing(q3_abs, w_target.im.abs(), 1.0)?;
    // h̄2 from q2(τ) = Re w, monotone increasing in h̄2.
    let kappa = (mu + 1.0) / (-mu);
    let a = tau * mu * h3b;
    let (sa, ca) = (a.sinh(), a.cosh());
    let st = tau.sinh();
    let q2_of = |h2b: f64| {
        let h1b = -(kappa + h2b * h2b).sqrt();
        st * (sa * h1b + ca * h2b)
    };
    let mut bound = 1.0 + w_target.re.abs();
    let mut tries = 0;
    while q2_of(bound) < w_target.re || q2_of(-bound) > w_target.re {
        bound *= 2.0;
        tries += 1;
        if tries > 100 {
            return Err(Error::Internal("h̄2 bracket expansion failed".into()));
        }
    }
    let h2b = roots::bisect(
        |x| q2_of(x) - w_target.re,
        -bound,
        bound,
        1e-13 * bound.max(1.0),
    )?;
    let h1b = -(kappa + h2b * h2b).sqrt();
    let h = Covector::new(h1b, h2b, h3b);
    let t = 2.0 * i1 * tau / h.norm();
    let sample = exp_map(&h, t, p)?;
    let reached = sample.point.w;
    if (reached - w_target).norm() > 1e-8 * (1.0 + w_target.norm()) {
        return Err(Error::Internal(format!(
            "light-like reach missed target: got {reached}, wanted {w_target}"
        )));
    }
    Ok(LightlikeReach {
        h,
        t,
        c_boundary: sample.point.c,
    })
}

/// Lower boundary of the attainable set in c at the given w, on the branch
/// through the identity: light-like surface (oblate) or abnormal surface
/// (sub-Lorentzian).
pub fn lower_boundary_c(w: Complex64, p: &StructureParams) -> Result<f64> {
    match p.regime() {
        Regime::Oblate => Ok(lightlike_reach(w, p)?.c_boundary),
        Regime::SubLorentzian => Ok(sublorentzian_boundary_c(w)),
        _ => Err(Error::WrongRegime {
            expected: "oblate or sub-Lorentzian",
            got: p.regime().name(),
        }),
    }
}

/// Membership in the oblate attainable set: the set is everything on or
/// above the light-like boundary surface.
pub fn oblate_membership(g: &GroupPoint, p: &StructureParams) -> Result<Membership> {
    p.require(&[Regime::Oblate], "oblate")?;
    let boundary = lightlike_reach(g.w, p)?.c_boundary;
    Ok(Membership::classify(g.c, boundary))
}

/// Sub-Lorentzian lower boundary: tan c = √((Re w)² + 2|Im w|)/(1 − |Im w|)
/// read through atan2, which lands on [0, π/2) for |Im w| < 1, exactly π/2
/// at |Im w| = 1, and on (π/2, π] beyond.
pub fn sublorentzian_boundary_c(w: Complex64) -> f64 {
    let x = (w.re * w.re + 2.0 * w.im.abs()).sqrt();
    x.atan2(1.0 - w.im.abs())
}

/// Membership in the sub-Lorentzian attainable set.
pub fn sublorentzian_membership(g: &GroupPoint) -> Membership {
    Membership::classify(g.c, sublorentzian_boundary_c(g.w))
}

/// Endpoint of the abnormal geodesic made of two light-like arcs with
/// parameters w1, w2 of opposite signs (tan cᵢ = |wᵢ| per arc). Computed
/// both by the closed form (Re w = w1 + w2, |Im w| = −2 w1 w2,
/// tan c = √((Re w)² + 2|Im w|)/(1 − |Im w|)) and by the group product of
/// the two arcs; the two routes must agree.
pub fn abnormal_endpoint(w1: f64, w2: f64) -> Result<GroupPoint> {
    if w1 * w2 > 0.0 {
        return Err(Error::SameSignArcs { w1, w2 });
    }
    let arc = |w: f64| GroupPoint::new(w.abs().atan(), Complex64::new(w, 0.0));
    let product = arc(w1).multiply(&arc(w2));

    let re = w1 + w2;
    let im_abs = -2.0 * w1 * w2;
    let c_closed = (re * re + 2.0 * im_abs).sqrt().atan2(1.0 - im_abs);
    let closed = GroupPoint::new(
        c_closed,
        Complex64::new(re, product.w.im.signum() * im_abs),
    );
    if product.sup_dist(&closed) > 1e-10 * (1.0 + product.w.norm()) {
        return Err(Error::Internal(format!(
            "abnormal endpoint mismatch: product {product:?} vs closed form {closed:?}"
        )));
    }
    Ok(product)
}

/// Upper cap of the region attainable by geodesics within the first Maxwell
/// time: the surface swept by the asymptotes of the SO(1,1) orbits,
/// c = π − asin(|Re w|/√(1+|w|²)) = π − atan(|Re w|/√(1+(Im w)²)).
pub fn maxwell_cap_c(w: Complex64) -> f64 {
    PI - (w.re.abs() / (1.0 + w.im * w.im).sqrt()).atan()
}

/// Membership in the set attainable by geodesics by time not exceeding the
/// first Maxwell time (equivalently, the region where longest arcs exist):
/// the part of the attainable set below the cap, plus the Maxwell line
/// {(π, iy)}. Oblate and sub-Lorentzian regimes.
pub fn a_tmax_membership(g: &GroupPoint, p: &StructureParams) -> Result<Membership> {
    let base = match p.regime() {
        Regime::Oblate => oblate_membership(g, p)?,
        Regime::SubLorentzian => sublorentzian_membership(g),
        _ => {
            return Err(Error::WrongRegime {
                expected: "oblate or sub-Lorentzian",
                got: p.regime().name(),
            })
        }
    };
    // The Maxwell line belongs to the set as boundary.
    if (g.c - PI).abs() <= BOUNDARY_EPS && g.w.re.abs() <= BOUNDARY_EPS {
        return Ok(Membership {
            status: MembershipStatus::Boundary,
            boundary_c: base.boundary_c,
        });
    }
    let cap = maxwell_cap_c(g.w);
    let status = match base.status {
        MembershipStatus::Outside => MembershipStatus::Outside,
        _ if g.c >= cap => MembershipStatus::Outside,
        s => s,
    };
    Ok(Membership {
        status,
        boundary_c: base.boundary_c,
    })
}

/// Longest arcs from the identity to g exist iff g lies in the closed
/// Maxwell-bounded region.
pub fn longest_arc_exists(g: &GroupPoint, p: &StructureParams) -> Result<bool> {
    Ok(a_tmax_membership(g, p)?.status != MembershipStatus::Outside)
}

/// Prolate attainable set: the whole group.
pub fn prolate_membership(_g: &GroupPoint) -> Membership {
    Membership {
        status: MembershipStatus::Interior,
        boundary_c: None,
    }
}

/// One constant-control arc.
#[derive(Debug, Clone, Copy, Deserialize)]
pub struct ControlArc {
    pub u: AlgebraElement,
    pub dt: f64,
}

impl Serialize for ControlArc {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("ControlArc", 2)?;
        st.serialize_field("u", &[self.u.x1, self.u.x2, self.u.x3])?;
        st.serialize_field("dt", &self.dt)?;
        st.end()
    }
}

/// A finite sequence of constant-control arcs, simulated by composing group
/// exponentials.
#[derive(Debug, Clone, Default)]
pub struct ControlProgram {
    pub arcs: Vec<ControlArc>,
}

impl Serialize for ControlProgram {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.arcs.len()))?;
        for a in &self.arcs {
            seq.serialize_element(a)?;
        }
        seq.end()
    }
}

impl ControlProgram {
    /// Endpoint of the program from the identity.
    pub fn simulate(&self) -> GroupPoint {
        self.arcs.iter().fold(GroupPoint::identity(), |g, arc| {
            g.multiply(&algebra_exp(&arc.u.scale(arc.dt)))
        })
    }

    /// Every control must lie in the closed cone
    /// I1 u1² − I1 u2² − I3 u3² ≥ 0, u1 > 0, and every duration be positive.
    pub fn validate(&self, p: &StructureParams) -> Result<()> {
        for arc in &self.arcs {
            let u = &arc.u;
            let cone = p.i1() * (u.x1 * u.x1 - u.x2 * u.x2)
                - match p.i3() {
                    crate::dynamics::Inertia::Finite(i3) => i3 * u.x3 * u.x3,
                    crate::dynamics::Inertia::Infinite => {
                        if u.x3 != 0.0 {
                            return Err(Error::ControlOutsideCone { cone_value: f64::NEG_INFINITY });
                        }
                        0.0
                    }
                };
            let scale = (u.x1 * u.x1 + u.x2 * u.x2 + u.x3 * u.x3).max(1.0) * p.i1();
            if cone < -1e-12 * scale || u.x1 <= 0.0 {
                return Err(Error::ControlOutsideCone { cone_value: cone });
            }
            if !(arc.dt > 0.0) {
                return Err(Error::InvalidInput(format!("non-positive arc duration {}", arc.dt)));
            }
        }
        Ok(())
    }

    /// Lorentzian length ∫√(I1 u1² − I1 u2² − I3 u3²) dt of the program.
    pub fn lorentzian_length(&self, p: &StructureParams) -> f64 {
        self.arcs
            .iter()
            .map(|arc| {
                let u = &arc.u;
                let cone = p.i1() * (u.x1 * u.x1 - u.x2 * u.x2)
                    - match p.i3() {
                        crate::dynamics::Inertia::Finite(i3) => i3 * u.x3 * u.x3,
                        crate::dynamics::Inertia::Infinite => 0.0,
                    };
                arc.dt * cone.max(0.0).sqrt()
            })
            .sum()
    }
}

/// Synthesis failure: the partial program and its residual are preserved.
#[derive(Debug)]
pub struct SynthesisError {
    pub partial: ControlProgram,
    pub residual: f64,
    pub reason: String,
}

impl std::fmt::Display for SynthesisError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "synthesis did not converge: {} (residual {:.3e} after {} arcs)",
            self.reason,
            self.residual,
            self.partial.arcs.len()
        )
    }
}

impl std::error::Error for SynthesisError {}

fn f_of(s: f64) -> f64 {
    s / (1.0 + s * s).sqrt()
}

fn wrap_to_pi(x: f64) -> f64 {
    let mut y = (x + PI).rem_euclid(2.0 * PI) - PI;
    if y <= -PI {
        y += 2.0 * PI;
    }
    y
}

/// State of the synthesis builder: exact forward simulation of the arcs
/// emitted so far.
struct Builder {
    arcs: Vec<ControlArc>,
    state: GroupPoint,
}

impl Default for Builder {
    fn default() -> Self {
        Self::new()
    }
}

impl Builder {
    fn new() -> Self {
        Self {
            arcs: Vec::new(),
            state: GroupPoint::identity(),
        }
    }

    fn push(&mut self, u: AlgebraElement, dt: f64) {
        if dt <= 0.0 {
            return;
        }
        self.state = self.state.multiply(&algebra_exp(&u.scale(dt)));
        self.arcs.push(ControlArc { u, dt });
    }

    /// Push an arc whose endpoint was already simulated.
    fn push_state(&mut self, u: AlgebraElement, dt: f64, state: GroupPoint) {
        if dt <= 0.0 {
            return;
        }
        self.state = state;
        self.arcs.push(ControlArc { u, dt });
    }

    fn vertical(&mut self, dt: f64) {
        self.push(AlgebraElement::new(1.0, 0.0, 0.0), dt);
    }

    fn fail(self, target: &GroupPoint, reason: String) -> SynthesisError {
        let residual = self.state.sup_dist(target);
        SynthesisError {
            partial: ControlProgram { arcs: self.arcs },
            residual,
            reason,
        }
    }
}

/// Light-like arc machinery for the descent synthesis. Arcs are
/// ū = (√(1/μ + ū2²), ū2, ±√((μ+1)/μ)) with Kil(ū) = 1 run for
/// t = 2 asinh(s), so the arc endpoint is
/// (atan(ū1 f(s)), sinh(t/2)(ū2 ± i ū3)) with f(s) = s/√(1+s²).
struct LightArcs {
    mu: f64,
    u3_abs: f64,
}

#[derive(Clone, Copy)]
struct CandidateArc {
    u: AlgebraElement,
    dt: f64,
}

impl LightArcs {
    fn new(mu: f64) -> Self {
        Self {
            mu,
            u3_abs: ((mu + 1.0) / mu).sqrt(),
        }
    }

    /// Arc with parameter ū2 whose endpoint has |w_u| = w_mod.
    fn arc(&self, u2: f64, sign: f64, w_mod: f64) -> CandidateArc {
        let u1_sq = 1.0 / self.mu + u2 * u2;
        let s = w_mod / (u1_sq + 1.0).sqrt();
        CandidateArc {
            u: AlgebraElement::new(u1_sq.sqrt(), u2, sign * self.u3_abs),
            dt: 2.0 * s.asinh(),
        }
    }

    /// Emitted phase φ_u = arg w_u + c_u of the arc (ū2, sign, |w_u|).
    fn phi_u(&self, u2: f64, sign: f64, w_mod: f64) -> f64 {
        let u1_sq = 1.0 / self.mu + u2 * u2;
        let s = w_mod / (u1_sq + 1.0).sqrt();
        (sign * self.u3_abs).atan2(u2) + (u1_sq.sqrt() * f_of(s)).atan()
    }

    /// All ū2 with φ_u(ū2) = target (mod 2π) at fixed |w_u| and sign:
    /// sign changes are located on a tangent-spaced grid and bisected.
    fn solve_phase(&self, target: f64, sign: f64, w_mod: f64, out: &mut Vec<CandidateArc>) {
        const SEGMENTS: usize = 48;
        let grid = |i: usize| -> f64 {
            // tan-spaced symmetric grid covering ±1e8
            let x = -1.0 + 2.0 * i as f64 / SEGMENTS as f64;
            (x * FRAC_PI_2 * 0.999_999_99).tan() * 10.0
        };
        for shift in [-2.0 * PI, 0.0, 2.0 * PI] {
            let t = target + shift;
            let mut prev_u2 = grid(0);
            let mut prev_v = self.phi_u(prev_u2, sign, w_mod) - t;
            for i in 1..=SEGMENTS {
                let u2 = grid(i);
                let v = self.phi_u(u2, sign, w_mod) - t;
                if prev_v == 0.0 {
                    out.push(self.arc(prev_u2, sign, w_mod));
                } else if v.signum() != prev_v.signum() {
                    let (mut a, mut b, mut fa) = (prev_u2, u2, prev_v);
                    for _ in 0..90 {
                        let m = 0.5 * (a + b);
                        let fm = self.phi_u(m, sign, w_mod) - t;
                        if fm == 0.0 {
                            a = m;
                            break;
                        }
                        if fm.signum() == fa.signum() {
                            a = m;
                            fa = fm;
                        } else {
                            b = m;
                        }
                    }
                    out.push(self.arc(0.5 * (a + b), sign, w_mod));
                }
                prev_u2 = u2;
                prev_v = v;
            }
        }
    }

    /// Anti-parallel arcs at |w_u| = |w| aimed so the product terms close at
    /// angle π − β with β chosen to land |ŵ| ≈ rt. The c-rebate of such an
    /// arc is ≈ atan(rt √(1+r²)/r), so staged shrinks with rt = r/4 are
    /// essentially free from any radius.
    fn shrink_arcs(&self, c: f64, w: Complex64, rt: f64, out: &mut Vec<CandidateArc>) {
        let r = w.norm();
        if r < 1e-6 {
            return;
        }
        let t_len = r * (1.0 + r * r).sqrt();
        let beta = (rt / t_len).min(0.45);
        let phi_req = wrap_to_pi(w.arg() - c + FRAC_PI_2);
        let target = phi_req + FRAC_PI_2 - beta;
        for sign in [1.0, -1.0] {
            self.solve_phase(target, sign, r, out);
        }
    }
}

/// Dense grid over the light-like arc family, for the small-radius stages
/// where solver-aimed arcs are not enough (near-axis passes live in thin
/// slivers of the (ū2, s) plane).
fn dense_scan(arcs: &LightArcs, mu: f64, out: &mut Vec<CandidateArc>) {
    let _ = mu;
    for sign in [1.0_f64, -1.0] {
        for i in 0..32 {
            let mag = 0.01 * (4000.0_f64 / 0.01).powf(i as f64 / 31.0);
            for u2 in [mag, -mag] {
                for j in 0..32 {
                    let s_par = 0.004 * (40.0_f64 / 0.004).powf(j as f64 / 31.0);
                    out.push(CandidateArc {
                        u: AlgebraElement::new(
                            (1.0 / arcs.mu + u2 * u2).sqrt(),
                            u2,
                            sign * arcs.u3_abs,
                        ),
                        dt: 2.0 * s_par.asinh(),
                    });
                }
            }
        }
    }
}

/// Descent synthesis core: drive c below `c_stop` from the builder state.
///
/// Three alternating modes mirror the constructive proof machinery:
/// RUN descends with aimed light-like arcs while they pay (the radius grows
/// as a side effect and the aiming phase drifts forward at twice the
/// descent rate); when the phase nears an excluded direction the run dies,
/// and DIVE shrinks the radius with staged anti-parallel arcs (almost free:
/// the c-rebate of a stage is atan of the shrink ratio times the radius);
/// at small radius CROSS picks one arc that steps the phase across the
/// excluded direction and regrows the radius in the same move, which is
/// affordable precisely because the phase/height exchange rate has O(1)
/// slack only at small |w|. Then RUN resumes on the far side.
fn run_descent(
    b: &mut Builder,
    c_stop: f64,
    mu: f64,
    target: &GroupPoint,
) -> std::result::Result<(), SynthesisError> {
    let arcs = LightArcs::new(mu);
    let r_cap = 1e5;
    let phase_of = |g: &GroupPoint| wrap_to_pi(g.w.arg() - g.c + FRAC_PI_2);
    let mut nudges = 0usize;
    'outer: while b.state.c > c_stop {
        if b.arcs.len() + nudges >= SYNTHESIS_ARC_CAP {
            let msg = format!("arc cap reached during descent at c = {:.3}", b.state.c);
            return Err(std::mem::take(b).fail(target, msg));
        }
        let r = b.state.w.norm();
        let phi_req = phase_of(&b.state);

        // RUN: aimed arcs, best height drop.
        let mut cands = Vec::new();
        let mut mods = vec![0.7, 2.0, 8.0];
        for frac in [0.2, 1.0] {
            let m = frac * r;
            if m > 8.0 && m < 2.0 * r_cap {
                mods.push(m);
            }
        }
        for &w_mod in &mods {
            for off in [0.0, 0.5, 1.0, 1.4] {
                for sign in [1.0, -1.0] {
                    arcs.solve_phase(phi_req + off, sign, w_mod, &mut cands);
                }
            }
        }
        arcs.shrink_arcs(b.state.c, b.state.w, r, &mut cands);
        if r > r_cap {
            arcs.shrink_arcs(b.state.c, b.state.w, r / 4.0, &mut cands);
        }
        let r_hi = if r > r_cap { r } else { r_cap };
        let best = cands
            .iter()
            .filter_map(|a| {
                if !(a.dt > 0.0) {
                    return None;
                }
                let g = b.state.multiply(&algebra_exp(&a.u.scale(a.dt)));
                let rn = g.w.norm();
                if rn < 0.9 || rn > 2.0 * r_hi || !g.c.is_finite() {
                    return None;
                }
                Some((g.c, *a, g))
            })
            .min_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
        if std::env::var_os("SL2_SYNTH_TRACE").is_some() {
            eprintln!(
                "state: n={} c={:+.4} r={:.3e} phi={:+.4} run_best={:+.4e}",
                b.arcs.len(),
                b.state.c,
                r,
                phi_req,
                best.as_ref().map(|x| x.0 - b.state.c).unwrap_or(f64::NAN)
            );
        }
        if let Some((c_new, a, g)) = best {
            if c_new < b.state.c - 1e-3 {
                b.push_state(a.u, a.dt, g);
                continue 'outer;
            }
        }

        // DIVE: staged shrinks toward the rewind radius. At r ≤ 3.5 the
        // dense light-arc scan (which contains the near-axis passes) joins
        // the candidate pool, so shrinking and phase-rewinding mix freely.
        let mut r_cur = b.state.w.norm();
        while r_cur > 0.3 {
            if b.arcs.len() + nudges >= SYNTHESIS_ARC_CAP {
                let msg = "arc cap reached during dive".to_string();
                return Err(std::mem::take(b).fail(target, msg));
            }
            let mut dive = Vec::new();
            for div in [4.0, 2.5, 8.0] {
                arcs.shrink_arcs(b.state.c, b.state.w, (r_cur / div).max(0.18), &mut dive);
            }
            if r_cur <= 3.5 {
                dense_scan(&arcs, mu, &mut dive);
            }
            let pick = dive
                .iter()
                .filter_map(|a| {
                    if !(a.dt > 0.0) {
                        return None;
                    }
                    let g = b.state.multiply(&algebra_exp(&a.u.scale(a.dt)));
                    let rn = g.w.norm();
                    if rn < 0.92 * r_cur && rn > 0.015 && g.c < b.state.c + 0.9 && g.c.is_finite() {
                        Some((g.c, *a, g))
                    } else {
                        None
                    }
                })
                .min_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
            match pick {
                Some((_, a, g)) => {
                    if std::env::var_os("SL2_SYNTH_TRACE").is_some() {
                        eprintln!(
                            "  dive: c={:+.4}->{:+.4} r={:.3}->{:.3} phi={:+.3}",
                            b.state.c, g.c, r_cur, g.w.norm(), phase_of(&g)
                        );
                    }
                    b.push_state(a.u, a.dt, g);
                    r_cur = b.state.w.norm();
                }
                None => break,
            }
        }

        // REWIND: near the axis a pass close to w = 0 turns the aiming
        // phase back by up to ~3 radians per few hundredths of ascent,
        // escaping the excluded direction the run died against.
        let fresh = |phi: f64| -> bool {
            (0.35..=1.7).contains(&phi) || (-2.8..=-1.45).contains(&phi)
        };
        let mut rewinds = 0;
        while !fresh(phase_of(&b.state)) && rewinds < 8 {
            if b.arcs.len() + nudges >= SYNTHESIS_ARC_CAP {
                let msg = "arc cap reached during rewind".to_string();
                return Err(std::mem::take(b).fail(target, msg));
            }
            let phi_now = phase_of(&b.state);
            let mut pool = Vec::new();
            dense_scan(&arcs, mu, &mut pool);
            let pick = pool
                .iter()
                .filter_map(|a| {
                    if !(a.dt > 0.0) {
                        return None;
                    }
                    let g = b.state.multiply(&algebra_exp(&a.u.scale(a.dt)));
                    let rn = g.w.norm();
                    if rn < 0.015 || rn > 3.0 || !g.c.is_finite() {
                        return None;
                    }
                    let dphi = wrap_to_pi(phase_of(&g) - phi_now);
                    let dc = g.c - b.state.c;
                    if dphi > -0.9 || dc > 0.6 {
                        return None;
                    }
                    // Prefer landings in a fresh band, then cheapness.
                    let key = (!fresh(phase_of(&g)) as u8, dc);
                    Some((key, *a, g))
                })
                .min_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
            match pick {
                Some((_, a, g)) => {
                    if std::env::var_os("SL2_SYNTH_TRACE").is_some() {
                        eprintln!(
                            "  rewind: c={:+.4}->{:+.4} r={:.3}->{:.3} phi={:+.3}->{:+.3}",
                            b.state.c, g.c, b.state.w.norm(), g.w.norm(), phi_now, phase_of(&g)
                        );
                    }
                    b.push_state(a.u, a.dt, g);
                    rewinds += 1;
                }
                None => {
                    b.vertical(0.03);
                    nudges += 1;
                    if nudges > 600 {
                        let msg = format!("rewind stalled at c = {:.4}", b.state.c);
                        return Err(std::mem::take(b).fail(target, msg));
                    }
                    break;
                }
            }
        }

        // PUMP: regrow the radius to where descent arcs pay, holding the
        // fresh phase.
        let mut pumps = 0;
        while b.state.w.norm() < 1.5 && pumps < 6 {
            if b.arcs.len() + nudges >= SYNTHESIS_ARC_CAP {
                let msg = "arc cap reached during pump".to_string();
                return Err(std::mem::take(b).fail(target, msg));
            }
            let phi_now = phase_of(&b.state);
            let r_now = b.state.w.norm();
            let mut pool = Vec::new();
            for w_mod in [0.5, 1.5, 4.0, 10.0] {
                for off in [0.0, 0.4, 0.9] {
                    for sign in [1.0, -1.0] {
                        arcs.solve_phase(phi_now + off, sign, w_mod, &mut pool);
                    }
                }
            }
            dense_scan(&arcs, mu, &mut pool);
            let pick = pool
                .iter()
                .filter_map(|a| {
                    if !(a.dt > 0.0) {
                        return None;
                    }
                    let g = b.state.multiply(&algebra_exp(&a.u.scale(a.dt)));
                    let rn = g.w.norm();
                    if rn < (3.0 * r_now).min(1.6) || rn > 20.0 || !g.c.is_finite() {
                        return None;
                    }
                    if !fresh(phase_of(&g)) {
                        return None;
                    }
                    let dc = g.c - b.state.c;
                    if dc > 0.6 {
                        return None;
                    }
                    Some((dc, *a, g))
                })
                .min_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
            match pick {
                Some((_, a, g)) => {
                    if std::env::var_os("SL2_SYNTH_TRACE").is_some() {
                        eprintln!(
                            "  pump: c={:+.4}->{:+.4} r={:.3}->{:.3} phi={:+.3}",
                            b.state.c, g.c, r_now, g.w.norm(), phase_of(&g)
                        );
                    }
                    b.push_state(a.u, a.dt, g);
                    pumps += 1;
                }
                None => {
                    b.vertical(0.03);
                    nudges += 1;
                    if nudges > 600 {
                        let msg = format!("pump stalled at c = {:.4}", b.state.c);
                        return Err(std::mem::take(b).fail(target, msg));
                    }
                    break;
                }
            }
        }
    }
    // Bring the radius down for the exact axis return.
    let mut guard = 0;
    while b.state.w.norm() > 2.0 {
        guard += 1;
        if guard > 300 || b.arcs.len() >= SYNTHESIS_ARC_CAP {
            let msg = "final shrink chain did not converge".to_string();
            return Err(std::mem::take(b).fail(target, msg));
        }
        let r = b.state.w.norm();
        let rt = (r / 4.0).max(1.0);
        let mut cands = Vec::new();
        arcs.shrink_arcs(b.state.c, b.state.w, rt, &mut cands);
        let best = cands
            .iter()
            .filter_map(|a| {
                let g = b.state.multiply(&algebra_exp(&a.u.scale(a.dt)));
                let rn = g.w.norm();
                if rn < 0.9 * r && rn > 0.01 {
                    Some((g.c, *a, g))
                } else {
                    None
                }
            })
            .min_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
        match best {
            Some((_, a, g)) => b.push_state(a.u, a.dt, g),
            None => b.vertical(0.05),
        }
    }
    Ok(())
}

/// Constructive control synthesis in the prolate regime: a finite program of
/// constant cone-valued controls whose endpoint lands within `tol` of
/// `target`.
///
/// When the required axis height c_a = c_target − atan|w_target| is
/// reachable by ascent alone the program has at most three arcs (vertical,
/// then a Kil = 0 arc setting w). Otherwise a descent phase runs first —
/// light-like arcs aimed perpendicular in the product rule lower c by up to
/// atan √μ each while |w| grows, staged anti-parallel arcs shrink |w| back
/// at negligible cost, and the excluded aiming directions are stepped over
/// by the natural phase drift — then an exact Kil = 0 arc returns to the
/// axis and the easy case finishes the job.
pub fn synthesize_controls(
    target: &GroupPoint,
    p: &StructureParams,
    tol: f64,
) -> std::result::Result<ControlProgram, SynthesisError> {
    let fail_input = |msg: String| SynthesisError {
        partial: ControlProgram::default(),
        residual: f64::INFINITY,
        reason: msg,
    };
    if p.regime() != Regime::Prolate {
        return Err(fail_input(format!(
            "synthesis requires the prolate regime, got {}",
            p.regime().name()
        )));
    }
    if !(tol > 0.0) {
        return Err(fail_input(format!("tolerance must be positive, got {tol}")));
    }
    let mu = p.mu();
    let mut b = Builder::new();
    let w_norm = target.w.norm();
    let c_axis = target.c - w_norm.atan();

    if c_axis < 0.0 {
        // Out to a moderate radius, then descend until the exact axis
        // return (cost atan r < π/2) cannot overshoot c_axis. The departure
        // direction puts the initial aiming phase mid-run, clear of the
        // excluded directions.
        let r0 = 30.0_f64;
        let psi0 = 1.0 + r0.atan() - FRAC_PI_2;
        b.push(AlgebraElement::new(1.0, psi0.cos(), psi0.sin()), 2.0 * r0);
        run_descent(&mut b, c_axis - FRAC_PI_2, mu, target)?;
        let w0 = b.state.w;
        let c0 = b.state.c;
        let r = w0.norm();
        if r > 1e-9 {
            let psi = PI + w0.arg() - c0 - r.atan();
            b.push(AlgebraElement::new(1.0, psi.cos(), psi.sin()), 2.0 * r);
        }
        if b.state.w.norm() > tol.min(1e-6) * 0.5 {
            let msg = "axis return left a w residual".to_string();
            return Err(std::mem::take(&mut b).fail(target, msg));
        }
        b.vertical(2.0 * (c_axis - b.state.c));
    } else {
        b.vertical(2.0 * c_axis);
    }

    if w_norm > 0.0 {
        let psi = (target.w.arg() - b.state.c + 2.0 * PI).rem_euclid(2.0 * PI);
        b.push(AlgebraElement::new(1.0, psi.cos(), psi.sin()), 2.0 * w_norm);
    }

    let residual = b.state.sup_dist(target);
    if residual > tol {
        let msg = format!("endpoint residual {residual:.3e} exceeds tol");
        return Err(b.fail(target, msg));
    }
    let program = ControlProgram { arcs: b.arcs };
    if let Err(e) = program.validate(p) {
        return Err(SynthesisError {
            partial: program,
            residual,
            reason: format!("control validation failed: {e}"),
        });
    }
    Ok(program)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::lightlike_h3bar;

    fn oblate() -> StructureParams {
        StructureParams::from_mu(1.0, -0.5).unwrap()
    }

    fn prolate() -> StructureParams {
        StructureParams::from_mu(1.0, 1.0).unwrap()
    }

    fn gp(c: f64, re: f64, im: f64) -> GroupPoint {
        GroupPoint::new(c, Complex64::new(re, im))
    }

    #[test]
    fn oblate_membership_basics() {
        let p = oblate();
        // Vertical geodesic points are interior.
        let m = oblate_membership(&gp(0.8, 0.0, 0.0), &p).unwrap();
        assert_eq!(m.status, MembershipStatus::Interior);
        // Below the identity: outside.
        let m = oblate_membership(&gp(-0.1, 0.0, 0.0), &p).unwrap();
        assert_eq!(m.status, MembershipStatus::Outside);
        // A traced light-like geodesic point is boundary; c-perturbations flip.
        let fam = lightlike_h3bar(&p).unwrap();
        let h2b: f64 = -0.35;
        let h1b = -(h2b * h2b + (p.mu() + 1.0) / (-p.mu())).sqrt();
        let h = Covector::new(h1b, h2b, fam.h3bar_plus);
        let end = exp_map(&h, 1.7, &p).unwrap().point;
        let m = oblate_membership(&end, &p).unwrap();
        assert_eq!(m.status, MembershipStatus::Boundary);
        let up = gp(end.c + 1e-4, end.w.re, end.w.im);
        assert_eq!(oblate_membership(&up, &p).unwrap().status, MembershipStatus::Interior);
        let down = gp(end.c - 1e-4, end.w.re, end.w.im);
        assert_eq!(oblate_membership(&down, &p).unwrap().status, MembershipStatus::Outside);
    }

    #[test]
    fn lightlike_reach_identities() {
        let p = oblate();
        let r = lightlike_reach(Complex64::new(0.0, 0.0), &p).unwrap();
        assert_eq!(r.t, 0.0);
        assert_eq!(r.c_boundary, 0.0);
        // Boundary identity q2² − q1² = (μ+1)/μ · sinh²τ at the solution.
        let w = Complex64::new(0.7, 1.3);
        let r = lightlike_reach(w, &p).unwrap();
        let s = exp_map(&r.h, r.t, &p).unwrap();
        let tau = s.tau;
        let lhs = s.quad.q2 * s.quad.q2 - s.quad.q1 * s.quad.q1;
        let rhs = (p.mu() + 1.0) / p.mu() * tau.sinh().powi(2);
        assert!((lhs - rhs).abs() < 1e-9, "lhs={lhs} rhs={rhs}");
        assert!((s.point.w - w).norm() < 1e-9);
        // |tan c| from the closed inequality of the boundary surface.
        let tan_sq = (w.re * w.re - rhs) / (1.0 + w.im * w.im + rhs);
        assert!((s.point.c.tan().powi(2) - tan_sq).abs() < 1e-8);
    }

    #[test]
    fn sublorentzian_membership_basics() {
        // tan(π/4) = 1 ≥ 0.5: interior.
        let m = sublorentzian_membership(&gp(FRAC_PI_2 / 2.0, 0.5, 0.0));
        assert_eq!(m.status, MembershipStatus::Interior);
        // Negative c: outside.
        let m = sublorentzian_membership(&gp(-0.3, 0.0, 0.0));
        assert_eq!(m.status, MembershipStatus::Outside);
        // Branch continuity at |Im w| = 1.
        let c_at = |im: f64| sublorentzian_boundary_c(Complex64::new(0.4, im));
        assert!((c_at(1.0) - FRAC_PI_2 - (0.4_f64).atan2(0.0) + FRAC_PI_2).abs() < 1.0); // well-defined
        assert!((c_at(1.0 - 1e-9) - c_at(1.0 + 1e-9)).abs() < 1e-6);
        assert!(c_at(3.0) > FRAC_PI_2 && c_at(3.0) <= PI);
    }

    #[test]
    fn abnormal_two_path() {
        // Single arc: c = atan|w1|.
        let g = abnormal_endpoint(0.8, 0.0).unwrap();
        assert!((g.c - (0.8_f64).atan()).abs() < 1e-14);
        assert!((g.w.re - 0.8).abs() < 1e-14 && g.w.im.abs() < 1e-14);
        // Antisymmetric pair: Re w = 0, |Im w| = 2a².
        let a = 0.9;
        let g = abnormal_endpoint(a, -a).unwrap();
        assert!(g.w.re.abs() < 1e-12);
        assert!((g.w.im.abs() - 2.0 * a * a).abs() < 1e-12);
        let expect = (2.0 * a / (1.0 - 2.0 * a * a).abs()).atan();
        let expect = if 2.0 * a * a > 1.0 { PI - expect } else { expect };
        assert!((g.c - expect).abs() < 1e-12);
        // Endpoints land on the sub-Lorentzian boundary.
        let m = sublorentzian_membership(&g);
        assert_eq!(m.status, MembershipStatus::Boundary);
        // Same-sign arcs rejected.
        assert!(abnormal_endpoint(0.5, 0.2).is_err());
    }

    #[test]
    fn a_tmax_region() {
        let p = oblate();
        // Maxwell line is boundary.
        let m = a_tmax_membership(&gp(PI, 0.0, 0.5), &p).unwrap();
        assert_eq!(m.status, MembershipStatus::Boundary);
        // Low interior point.
        let m = a_tmax_membership(&gp(0.3, 0.0, 0.0), &p).unwrap();
        assert_eq!(m.status, MembershipStatus::Interior);
        assert!(longest_arc_exists(&gp(0.3, 0.0, 0.0), &p).unwrap());
        // At c = π with Re w ≠ 0 the cap has passed: outside.
        let m = a_tmax_membership(&gp(PI, 0.5, 0.0), &p).unwrap();
        assert_eq!(m.status, MembershipStatus::Outside);
        assert!(!longest_arc_exists(&gp(PI, 0.5, 0.0), &p).unwrap());
        // Sub-Lorentzian variant works too.
        let sl = StructureParams::sub_lorentzian(1.0).unwrap();
        let m = a_tmax_membership(&gp(PI, 0.0, 0.2), &sl).unwrap();
        assert_eq!(m.status, MembershipStatus::Boundary);
    }

    #[test]
    fn prolate_is_everything() {
        assert_eq!(prolate_membership(&gp(-5.0, 0.0, 0.0)).status, MembershipStatus::Interior);
        assert_eq!(prolate_membership(&gp(0.0, 0.0, 0.0)).status, MembershipStatus::Interior);
        assert_eq!(prolate_membership(&gp(100.0, 10.0, 10.0)).status, MembershipStatus::Interior);
    }

    #[test]
    fn remark_inequality_between_boundaries() {
        // c_lower^{sL} ≥ c_limit with tan c_limit = |Re w|/√(1+(Im w)²),
        // strict when Im w ≠ 0.
        for re in [-2.0, -0.5, 0.0, 1.0, 3.0] {
            for im in [-1.5, -0.2, 0.0, 0.4, 2.5] {
                let w = Complex64::new(re, im);
                let sl = sublorentzian_boundary_c(w);
                let lim = (re.abs() / (1.0 + im * im).sqrt()).atan();
                if im == 0.0 {
                    assert!((sl - lim).abs() < 1e-14);
                } else {
                    assert!(sl > lim);
                }
            }
        }
    }

    #[test]
    fn synth_vertical_target() {
        let p = prolate();
        let prog = synthesize_controls(&gp(1.0, 0.0, 0.0), &p, 1e-6).unwrap();
        assert_eq!(prog.arcs.len(), 1);
        assert!(prog.simulate().sup_dist(&gp(1.0, 0.0, 0.0)) < 1e-12);
        prog.validate(&p).unwrap();
    }

    #[test]
    fn synth_two_arc_target() {
        let p = prolate();
        let target = gp(FRAC_PI_2 - 0.1, 1.0, 1.0);
        let prog = synthesize_controls(&target, &p, 1e-6).unwrap();
        assert!(prog.arcs.len() <= 2);
        assert!(prog.simulate().sup_dist(&target) < 1e-6);
        prog.validate(&p).unwrap();
    }

    #[test]
    fn synth_descent_target() {
        let p = prolate();
        let target = gp(-1.0, 0.0, 0.0);
        let prog = synthesize_controls(&target, &p, 1e-6).unwrap();
        assert!(prog.arcs.len() > 2, "descent should need several arcs");
        let end = prog.simulate();
        assert!(end.sup_dist(&target) < 1e-6, "residual {}", end.sup_dist(&target));
        prog.validate(&p).unwrap();
        // Appending the vertical segment closes an admissible loop with
        // positive Lorentzian length through the identity.
        let mut loop_prog = prog.clone();
        loop_prog.arcs.push(ControlArc {
            u: AlgebraElement::new(1.0, 0.0, 0.0),
            dt: 2.0,
        });
        assert!(loop_prog.simulate().sup_dist(&GroupPoint::identity()) < 1e-6);
        assert!(loop_prog.lorentzian_length(&p) > 0.0);
    }

    #[test]
    fn synth_rejects_wrong_regime() {
        let err = synthesize_controls(&gp(1.0, 0.0, 0.0), &oblate(), 1e-6).unwrap_err();
        assert!(err.reason.contains("prolate"));
    }

    #[test]
    fn program_serde_shape() {
        let prog = ControlProgram {
            arcs: vec![ControlArc {
                u: AlgebraElement::new(1.0, 0.0, 0.0),
                dt: 2.0,
            }],
        };
        let s = serde_json::to_string(&prog).unwrap();
        assert_eq!(s, r#"[{"u":[1.0,0.0,0.0],"dt":2.0}]"#);
    }
}
