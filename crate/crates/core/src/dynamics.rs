//! Pontryagin covector dynamics for the left-invariant problem.
//!
//! The maximized Hamiltonian is H = ½(−h1²/I1 + h2²/I1 + h3²/I3) and the
//! covector subsystem is
//!
//! ```text
//!   ḣ1 = (μ/I1) h2 h3,   ḣ2 = (μ/I1) h1 h3,   ḣ3 = 0,
//! ```
//!
//! solved in closed form by the hyperbolic rotation R^h_{tμh3/I1} of
//! (h1, h2). The group part ġ = L_{g*}(−h1/I1 e1 + h2/I1 e2 + h3/I3 e3)
//! gets a fixed-step RK–Munthe-Kaas integrator which serves as the numerical
//! oracle for every closed form downstream.
//!
//! The deformation parameter is μ = I1/I3 − 1 ∈ [−1, ∞); the sub-Lorentzian
//! limit I3 = ∞ is a first-class regime with μ = −1 exactly, not a large-I3
//! approximation.

use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{algebra_exp, killing_form, AlgebraElement, GroupPoint};

/// Third moment of inertia: finite, or the sub-Lorentzian marker I3 = ∞.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Inertia {
    Finite(f64),
    Infinite,
}

/// Regime classification by μ = I1/I3 − 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Oblate,
    Symmetric,
    Prolate,
    SubLorentzian,
}

impl Regime {
    pub fn name(&self) -> &'static str {
        match self {
            Regime::Oblate => "oblate",
            Regime::Symmetric => "symmetric",
            Regime::Prolate => "prolate",
            Regime::SubLorentzian => "sub-Lorentzian",
        }
    }
}

/// Structure parameters (I1 = I2, I3) of the Lorentzian metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructureParams {
    i1: f64,
    i3: Inertia,
}

impl StructureParams {
    /// Lorentzian parameters with finite I3.
    pub fn new(i1: f64, i3: f64) -> Result<Self> {
        if !(i1 > 0.0) || !(i3 > 0.0) {
            return Err(Error::InvalidInput(format!(
                "moments of inertia must be positive, got I1 = {i1}, I3 = {i3}"
            )));
        }
        Ok(Self {
            i1,
            i3: Inertia::Finite(i3),
        })
    }

    /// The sub-Lorentzian limit I3 = ∞ (μ = −1 exactly).
    pub fn sub_lorentzian(i1: f64) -> Result<Self> {
        if !(i1 > 0.0) {
            return Err(Error::InvalidInput(format!("I1 must be positive, got {i1}")));
        }
        Ok(Self {
            i1,
            i3: Inertia::Infinite,
        })
    }

    /// Parameters from (I1, μ); μ = −1 selects the sub-Lorentzian regime.
    pub fn from_mu(i1: f64, mu: f64) -> Result<Self> {
        if mu < -1.0 {
            return Err(Error::InvalidInput(format!("mu must be >= -1, got {mu}")));
        }
        if mu == -1.0 {
            Self::sub_lorentzian(i1)
        } else {
            Self::new(i1, i1 / (1.0 + mu))
        }
    }

    pub fn i1(&self) -> f64 {
        self.i1
    }

    pub fn i3(&self) -> Inertia {
        self.i3
    }

    /// μ = I1/I3 − 1, exactly −1 in the sub-Lorentzian regime.
    pub fn mu(&self) -> f64 {
        match self.i3 {
            Inertia::Finite(i3) => self.i1 / i3 - 1.0,
            Inertia::Infinite => -1.0,
        }
    }

    /// 1/I3, zero in the sub-Lorentzian regime.
    pub fn inv_i3(&self) -> f64 {
        match self.i3 {
            Inertia::Finite(i3) => 1.0 / i3,
            Inertia::Infinite => 0.0,
        }
    }

    pub fn regime(&self) -> Regime {
        match self.i3 {
            Inertia::Infinite => Regime::SubLorentzian,
            Inertia::Finite(_) => {
                let mu = self.mu();
                if mu < 0.0 {
                    Regime::Oblate
                } else if mu > 0.0 {
                    Regime::Prolate
                } else {
                    Regime::Symmetric
                }
            }
        }
    }

    pub(crate) fn require(&self, allowed: &[Regime], expected: &'static str) -> Result<()> {
        let r = self.regime();
        if allowed.contains(&r) {
            Ok(())
        } else {
            Err(Error::WrongRegime {
                expected,
                got: r.name(),
            })
        }
    }
}

impl Serialize for StructureParams {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Raw<'a> {
            #[serde(rename = "I1")]
            i1: f64,
            #[serde(rename = "I3")]
            i3: I3Repr<'a>,
        }
        #[derive(Serialize)]
        #[serde(untagged)]
        enum I3Repr<'a> {
            Num(f64),
            Str(&'a str),
        }
        let i3 = match self.i3 {
            Inertia::Finite(v) => I3Repr::Num(v),
            Inertia::Infinite => I3Repr::Str("inf"),
        };
        Raw { i1: self.i1, i3 }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for StructureParams {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            #[serde(rename = "I1")]
            i1: f64,
            #[serde(rename = "I3")]
            i3: I3Repr,
        }
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum I3Repr {
            Num(f64),
            Str(String),
        }
        let raw = Raw::deserialize(d)?;
        match raw.i3 {
            I3Repr::Num(v) => StructureParams::new(raw.i1, v).map_err(de::Error::custom),
            I3Repr::Str(s) if s == "inf" => {
                StructureParams::sub_lorentzian(raw.i1).map_err(de::Error::custom)
            }
            I3Repr::Str(s) => Err(de::Error::custom(format!("bad I3 value: {s:?}"))),
        }
    }
}

/// Momentum covector (h1, h2, h3) in the dual Lie algebra.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Covector {
    pub h1: f64,
    pub h2: f64,
    pub h3: f64,
}

/// Causal class of a covector by the sign of Kil(h) = −h1² + h2² + h3².
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CausalClass {
    KilNegative,
    KilZero,
    KilPositive,
}

/// Normality flag of a Pontryagin extremal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Normality {
    Normal,
    Abnormal,
}

/// Target for [`normalize`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormalizeTarget {
    Timelike,
    Lightlike,
}

/// An initial covector together with its normality and causal class.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GeodesicDescriptor {
    pub h: Covector,
    pub normality: Normality,
    pub causal_class: CausalClass,
}

impl Covector {
    pub fn new(h1: f64, h2: f64, h3: f64) -> Self {
        Self { h1, h2, h3 }
    }

    /// Kil(h) = −h1² + h2² + h3².
    pub fn killing(&self) -> f64 {
        killing_form(self.h1, self.h2, self.h3)
    }

    /// |h| = √|Kil(h)|.
    pub fn norm(&self) -> f64 {
        self.killing().abs().sqrt()
    }

    /// Kil-normalized components h̄ = h/|h|; `None` when Kil(h) ≈ 0.
    pub fn unit(&self) -> Option<(f64, f64, f64)> {
        if classify(self) == CausalClass::KilZero {
            return None;
        }
        let n = self.norm();
        Some((self.h1 / n, self.h2 / n, self.h3 / n))
    }

    pub fn scale(&self, s: f64) -> Covector {
        Covector::new(s * self.h1, s * self.h2, s * self.h3)
    }

    /// Reflection across the plane h2 = 0.
    pub fn reflect_h2(&self) -> Covector {
        Covector::new(self.h1, -self.h2, self.h3)
    }

    /// Reflection across the plane h3 = 0.
    pub fn reflect_h3(&self) -> Covector {
        Covector::new(self.h1, self.h2, -self.h3)
    }

    pub fn dot(&self, o: &Covector) -> f64 {
        self.h1 * o.h1 + self.h2 * o.h2 + self.h3 * o.h3
    }

    fn norm_sqr_euclid(&self) -> f64 {
        self.dot(self)
    }
}

impl GeodesicDescriptor {
    /// Build a descriptor, checking normalization, orientation and the
    /// regime range constraints.
    pub fn new(h: Covector, p: &StructureParams) -> Result<Self> {
        let ham = hamiltonian(&h, p);
        let scale = h.norm_sqr_euclid().max(1.0);
        let normality = if (ham + 0.5).abs() <= 1e-9 * scale {
            Normality::Normal
        } else if ham.abs() <= 1e-9 * scale {
            Normality::Abnormal
        } else {
            return Err(Error::NotNormalized { hamiltonian: ham });
        };
        if h.h1 >= 0.0 {
            return Err(Error::BadOrientation { h1: h.h1 });
        }
        let causal_class = validate_class(&h, p)?;
        Ok(Self {
            h,
            normality,
            causal_class,
        })
    }
}

/// Scale-relative zero threshold for Kil classification.
fn kil_epsilon(h: &Covector) -> f64 {
    1e-12 * h.norm_sqr_euclid().max(1.0)
}

/// Causal class by the sign of Kil(h), with scale-relative tolerance.
pub fn classify(h: &Covector) -> CausalClass {
    let k = h.killing();
    if k.abs() <= kil_epsilon(h) {
        CausalClass::KilZero
    } else if k < 0.0 {
        CausalClass::KilNegative
    } else {
        CausalClass::KilPositive
    }
}

/// Causal class checked against the admissible h̄3 ranges of the regime:
/// oblate covectors with Kil > 0 need h̄3² ≥ 1/(−μ), prolate covectors with
/// Kil < 0 need h̄3² ≤ 1/μ (equality is the light-like family).
pub fn validate_class(h: &Covector, p: &StructureParams) -> Result<CausalClass> {
    let class = classify(h);
    let mu = p.mu();
    if mu == 0.0 {
        return Ok(class);
    }
    let tol = 1e-9;
    if let Some((_, _, h3b)) = h.unit() {
        match (p.regime(), class) {
            (Regime::Oblate | Regime::SubLorentzian, CausalClass::KilPositive) => {
                if h3b * h3b < 1.0 / (-mu) - tol {
                    return Err(Error::ClassRangeViolation(format!(
                        "oblate Kil > 0 requires h̄3² ≥ 1/(−μ) = {}, got {}",
                        1.0 / (-mu),
                        h3b * h3b
                    )));
                }
            }
            (Regime::Prolate, CausalClass::KilNegative) => {
                if h3b * h3b > 1.0 / mu + tol {
                    return Err(Error::ClassRangeViolation(format!(
                        "prolate Kil < 0 requires h̄3² ≤ 1/μ = {}, got {}",
                        1.0 / mu,
                        h3b * h3b
                    )));
                }
            }
            (Regime::Prolate, CausalClass::KilPositive) => {
                return Err(Error::ClassRangeViolation(
                    "prolate covectors with Kil > 0 are not geodesic initial covectors".into(),
                ));
            }
            _ => {}
        }
    }
    Ok(class)
}

/// Maximized Hamiltonian H = ½(−h1²/I1 + h2²/I1 + h3²/I3).
/// In the sub-Lorentzian regime the h3 term vanishes.
pub fn hamiltonian(h: &Covector, p: &StructureParams) -> f64 {
    0.5 * ((-h.h1 * h.h1 + h.h2 * h.h2) / p.i1() + h.h3 * h.h3 * p.inv_i3())
}

/// Sub-Lorentzian Hamiltonian H = ½(−h1² + h2²)/I1; equals the μ → −1
/// limit of [`hamiltonian`].
pub fn hamiltonian_sub(h: &Covector, i1: f64) -> f64 {
    0.5 * (-h.h1 * h.h1 + h.h2 * h.h2) / i1
}

/// Extremal control u = (−h1/I1, h2/I1, h3/I3) from the maximum condition.
/// Fails if the resulting control leaves the closed cone
/// I1 u1² − I1 u2² − I3 u3² ≥ 0, u1 > 0.
pub fn control_from_covector(h: &Covector, p: &StructureParams) -> Result<AlgebraElement> {
    let u = AlgebraElement::new(-h.h1 / p.i1(), h.h2 / p.i1(), h.h3 * p.inv_i3());
    // I1 u1² − I1 u2² − I3 u3² = −2 H(h).
    let cone_value = -2.0 * hamiltonian(h, p);
    let scale = h.norm_sqr_euclid().max(1.0) / p.i1();
    if cone_value < -1e-12 * scale || u.x1 <= 0.0 {
        return Err(Error::ControlOutsideCone { cone_value });
    }
    Ok(u)
}

/// Hyperbolic rotation R^h_a = [[cosh a, sinh a], [sinh a, cosh a]] applied
/// to the (h1, h2) components.
pub fn hyperbolic_rotation(h: &Covector, a: f64) -> Covector {
    Covector::new(
        a.cosh() * h.h1 + a.sinh() * h.h2,
        a.sinh() * h.h1 + a.cosh() * h.h2,
        h.h3,
    )
}

/// Closed-form covector flow: (h1, h2)(t) = R^h_{tμh3/I1}(h1, h2)(0),
/// h3 constant.
pub fn covector_flow(h0: &Covector, t: f64, p: &StructureParams) -> Covector {
    hyperbolic_rotation(h0, t * p.mu() * h0.h3 / p.i1())
}

/// Rescale / orient a covector onto its normalized locus:
/// time-like → s·h with s > 0 and H = −1/2 (h1 < 0 representative);
/// light-like → orientation h1 < 0 only (scaling preserves H = 0).
pub fn normalize(h: &Covector, p: &StructureParams, target: NormalizeTarget) -> Result<Covector> {
    if h.h1 == 0.0 {
        return Err(Error::BadOrientation { h1: 0.0 });
    }
    let oriented = if h.h1 < 0.0 { *h } else { h.scale(-1.0) };
    match target {
        NormalizeTarget::Timelike => {
            let ham = hamiltonian(&oriented, p);
            if ham >= 0.0 {
                return Err(Error::NotTimelike { hamiltonian: ham });
            }
            Ok(oriented.scale(1.0 / (-2.0 * ham).sqrt()))
        }
        NormalizeTarget::Lightlike => {
            let ham = hamiltonian(&oriented, p);
            let scale = oriented.norm_sqr_euclid().max(1.0);
            if ham.abs() > 1e-9 * scale {
                return Err(Error::NotNormalized { hamiltonian: ham });
            }
            Ok(oriented)
        }
    }
}

/// The h̄3 values of light-like geodesic covectors with Kil ≠ 0, plus a flag
/// for the extra Kil = 0 family (h3 = 0, h1² = h2²) on which h̄3 is undefined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LightlikeFamilies {
    pub h3bar_plus: f64,
    pub h3bar_minus: f64,
    /// The Kil = 0 light-like family h3 = 0, h1 = ±h2 always exists too.
    pub kil_zero_family: bool,
}

/// h̄3 = ±1/√|μ| for light-like geodesics (Kil ≠ 0). Fails for μ = 0.
pub fn lightlike_h3bar(p: &StructureParams) -> Result<LightlikeFamilies> {
    let mu = p.mu();
    if mu == 0.0 {
        return Err(Error::SymmetricRegime);
    }
    let v = 1.0 / mu.abs().sqrt();
    Ok(LightlikeFamilies {
        h3bar_plus: v,
        h3bar_minus: -v,
        kil_zero_family: true,
    })
}

/// Build the H = −1/2 normalized covector with prescribed h̄3 and h̄2
/// (h̄1 = −√(1 + h̄2² + h̄3²), |h|² = I1/(1 − μ h̄3²)). Usable for any h̄3
/// in the oblate regimes and for h̄3² < 1/μ in the prolate regime.
pub fn timelike_from_h3bar(h3bar: f64, h2bar: f64, p: &StructureParams) -> Result<Covector> {
    let mu = p.mu();
    let denom = 1.0 - mu * h3bar * h3bar;
    if denom <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "no time-like covector with h̄3 = {h3bar} when μ = {mu}"
        )));
    }
    let norm = (p.i1() / denom).sqrt();
    let h1bar = -(1.0 + h2bar * h2bar + h3bar * h3bar).sqrt();
    Ok(Covector::new(norm * h1bar, norm * h2bar, norm * h3bar))
}

/// Right-hand side of the covector subsystem.
fn covector_rhs(h: &Covector, p: &StructureParams) -> Covector {
    let k = p.mu() / p.i1();
    Covector::new(k * h.h2 * h.h3, k * h.h1 * h.h3, 0.0)
}

/// Truncated dexp⁻¹ for the left-invariant update ġ = g·u:
/// σ̇ = u + ½[σ, u] + (1/12)[σ, [σ, u]] + O(σ⁴).
fn dexpinv(sigma: &AlgebraElement, u: &AlgebraElement) -> AlgebraElement {
    let b1 = sigma.bracket(u);
    let b2 = sigma.bracket(&b1);
    u.add(&b1.scale(0.5)).add(&b2.scale(1.0 / 12.0))
}

fn add_h(a: &Covector, b: &Covector, s: f64) -> Covector {
    Covector::new(a.h1 + s * b.h1, a.h2 + s * b.h2, a.h3 + s * b.h3)
}

/// Fixed-step RK4 / RK–Munthe-Kaas integration of the full Hamiltonian
/// system from the identity: the covector by classical RK4, the group point
/// by per-step exponentials composed with the group product, which keeps the
/// c coordinate on the correct sheet of the cover automatically.
///
/// This is the numerical oracle the closed-form exponential map is tested
/// against; the error decreases at fourth order in the step size.
pub fn integrate_full_system(
    h0: &Covector,
    t: f64,
    p: &StructureParams,
    steps: usize,
) -> Result<(Covector, GroupPoint)> {
    if steps == 0 {
        return Err(Error::InvalidInput("steps must be >= 1".into()));
    }
    let dt = t / steps as f64;
    let mut h = *h0;
    let mut g = GroupPoint::identity();
    let u_of = |h: &Covector| -> AlgebraElement {
        AlgebraElement::new(-h.h1 / p.i1(), h.h2 / p.i1(), h.h3 * p.inv_i3())
    };
    for _ in 0..steps {
        // Covector stages.
        let k1 = covector_rhs(&h, p);
        let ha = add_h(&h, &k1, dt / 2.0);
        let k2 = covector_rhs(&ha, p);
        let hb = add_h(&h, &k2, dt / 2.0);
        let k3 = covector_rhs(&hb, p);
        let hc = add_h(&h, &k3, dt);
        let k4 = covector_rhs(&hc, p);

        // Group stages (RKMK with the same stage covectors).
        let v1 = u_of(&h);
        let s2 = v1.scale(dt / 2.0);
        let v2 = dexpinv(&s2, &u_of(&ha));
        let s3 = v2.scale(dt / 2.0);
        let v3 = dexpinv(&s3, &u_of(&hb));
        let s4 = v3.scale(dt);
        let v4 = dexpinv(&s4, &u_of(&hc));

        let sigma = v1
            .add(&v2.scale(2.0))
            .add(&v3.scale(2.0))
            .add(&v4)
            .scale(dt / 6.0);
        g = g.multiply(&algebra_exp(&sigma));

        h = Covector::new(
            h.h1 + dt / 6.0 * (k1.h1 + 2.0 * k2.h1 + 2.0 * k3.h1 + k4.h1),
            h.h2 + dt / 6.0 * (k1.h2 + 2.0 * k2.h2 + 2.0 * k3.h2 + k4.h2),
            h.h3,
        );
    }
    Ok((h, g))
}

/// Default oracle resolution: 10⁴ RK4 steps per unit time.
pub const ORACLE_STEPS_PER_UNIT_TIME: f64 = 1e4;

/// [`integrate_full_system`] at the default step density.
pub fn integrate_default(h0: &Covector, t: f64, p: &StructureParams) -> Result<(Covector, GroupPoint)> {
    let steps = ((t.abs() * ORACLE_STEPS_PER_UNIT_TIME).ceil() as usize).max(1);
    integrate_full_system(h0, t, p, steps)
}
