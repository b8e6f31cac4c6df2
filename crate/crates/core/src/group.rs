//! Arithmetic on the universal cover G of SU(1,1) ≅ SL(2,ℝ).
//!
//! A point of G is a pair (c, w) ∈ ℝ × ℂ. The covering projection sends it
//! to the SU(1,1) matrix
//!
//! ```text
//!     [ e^{ic}√(1+|w|²)        w          ]
//!     [      w̄           e^{-ic}√(1+|w|²) ]
//! ```
//!
//! so with z = q0 + i q1 = e^{ic}√(1+|w|²) and w = q2 + i q3 the quadruple
//! (q0, q1, q2, q3) satisfies q0² + q1² − q2² − q3² = 1.
//!
//! The group law on the cover is
//!
//! ```text
//!   c = c1 + c2 + atan( Im(w1 w̄2 e^{-i(c1+c2)}) /
//!                       (√(1+|w1|²)√(1+|w2|²) + Re(w1 w̄2 e^{-i(c1+c2)})) )
//!   w = w2 √(1+|w1|²) e^{i c1} + w1 √(1+|w2|²) e^{-i c2}
//! ```
//!
//! The correction term is the argument of 1 + ζ with |ζ| < 1 (Cauchy–Schwarz
//! on the matrix entries), so its principal value is always the right branch
//! and the formula is exact on the cover, not just modulo 2π.

use num_complex::Complex64;
use serde::de::{self, Deserializer, MapAccess, SeqAccess, Visitor};
use serde::ser::{SerializeStruct, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lift;

/// A point (c, w) on the universal cover. `c` is unbounded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupPoint {
    pub c: f64,
    pub w: Complex64,
}

/// SU(1,1) matrix coordinates (q0, q1, q2, q3), on the quadric
/// q0² + q1² − q2² − q3² = 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadCoords {
    pub q0: f64,
    pub q1: f64,
    pub q2: f64,
    pub q3: f64,
}

/// Element x1·e1 + x2·e2 + x3·e3 of the Lie algebra, with bracket table
/// [e1,e2] = e3, [e1,e3] = −e2, [e2,e3] = −e1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlgebraElement {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
}

/// An SU(1,1) matrix [[z, w], [w̄, z̄]], |z|² − |w|² = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Su11 {
    pub z: Complex64,
    pub w: Complex64,
}

/// The invariant quadratic form Kil = −a² + b² + c² on coefficient triples.
#[inline]
pub fn killing_form(a: f64, b: f64, c: f64) -> f64 {
    -a * a + b * b + c * c
}

impl GroupPoint {
    pub fn new(c: f64, w: Complex64) -> Self {
        Self { c, w }
    }

    /// The identity element (0, 0).
    pub fn identity() -> Self {
        Self {
            c: 0.0,
            w: Complex64::new(0.0, 0.0),
        }
    }

    /// Group multiplication on the universal cover.
    pub fn multiply(&self, rhs: &GroupPoint) -> GroupPoint {
        let (c1, w1) = (self.c, self.w);
        let (c2, w2) = (rhs.c, rhs.w);
        let r1 = (1.0 + w1.norm_sqr()).sqrt();
        let r2 = (1.0 + w2.norm_sqr()).sqrt();

        if w1.norm_sqr() == 0.0 && w2.norm_sqr() == 0.0 {
            return GroupPoint::new(c1 + c2, Complex64::new(0.0, 0.0));
        }

        let cross = w1 * w2.conj() * Complex64::from_polar(1.0, -(c1 + c2));
        let den = r1 * r2 + cross.re;
        // |w1 w̄2| < r1 r2 strictly, so den > 0; anything else is corrupt input.
        debug_assert!(den > 0.0, "multiply denominator must be positive");
        let c = c1 + c2 + cross.im.atan2(den);
        let w = w2 * r1 * Complex64::from_polar(1.0, c1) + w1 * r2 * Complex64::from_polar(1.0, -c2);
        GroupPoint::new(c, w)
    }

    /// Group inverse, (c, w) ↦ (−c, −w).
    pub fn inverse(&self) -> GroupPoint {
        GroupPoint::new(-self.c, -self.w)
    }

    /// Covering projection to SU(1,1) quadric coordinates.
    pub fn to_quad(&self) -> QuadCoords {
        let r = (1.0 + self.w.norm_sqr()).sqrt();
        QuadCoords {
            q0: self.c.cos() * r,
            q1: self.c.sin() * r,
            q2: self.w.re,
            q3: self.w.im,
        }
    }

    /// Covering projection to the SU(1,1) matrix.
    pub fn to_matrix(&self) -> Su11 {
        let r = (1.0 + self.w.norm_sqr()).sqrt();
        Su11 {
            z: Complex64::from_polar(r, self.c),
            w: self.w,
        }
    }

    /// Largest absolute coordinate difference in (c, Re w, Im w).
    pub fn sup_dist(&self, other: &GroupPoint) -> f64 {
        (self.c - other.c)
            .abs()
            .max((self.w.re - other.w.re).abs())
            .max((self.w.im - other.w.im).abs())
    }
}

impl QuadCoords {
    /// Residual of the SU(1,1) quadric constraint.
    pub fn constraint_residual(&self) -> f64 {
        self.q0 * self.q0 + self.q1 * self.q1 - self.q2 * self.q2 - self.q3 * self.q3 - 1.0
    }

    pub fn w(&self) -> Complex64 {
        Complex64::new(self.q2, self.q3)
    }
}

impl Su11 {
    pub fn identity() -> Self {
        Self {
            z: Complex64::new(1.0, 0.0),
            w: Complex64::new(0.0, 0.0),
        }
    }

    /// Matrix product; stays in SU(1,1).
    pub fn mul(&self, rhs: &Su11) -> Su11 {
        Su11 {
            z: self.z * rhs.z + self.w * rhs.w.conj(),
            w: self.z * rhs.w + self.w * rhs.z.conj(),
        }
    }

    /// det = |z|² − |w|².
    pub fn det(&self) -> f64 {
        self.z.norm_sqr() - self.w.norm_sqr()
    }

    pub fn to_quad(&self) -> QuadCoords {
        QuadCoords {
            q0: self.z.re,
            q1: self.z.im,
            q2: self.w.re,
            q3: self.w.im,
        }
    }
}

impl AlgebraElement {
    pub fn new(x1: f64, x2: f64, x3: f64) -> Self {
        Self { x1, x2, x3 }
    }

    pub fn zero() -> Self {
        Self::new(0.0, 0.0, 0.0)
    }

    /// Kil(x) = −x1² + x2² + x3².
    pub fn killing(&self) -> f64 {
        killing_form(self.x1, self.x2, self.x3)
    }

    /// Lie bracket from the structure constants.
    pub fn bracket(&self, y: &AlgebraElement) -> AlgebraElement {
        AlgebraElement::new(
            -(self.x2 * y.x3 - self.x3 * y.x2),
            -(self.x1 * y.x3 - self.x3 * y.x1),
            self.x1 * y.x2 - self.x2 * y.x1,
        )
    }

    pub fn scale(&self, s: f64) -> AlgebraElement {
        AlgebraElement::new(s * self.x1, s * self.x2, s * self.x3)
    }

    pub fn add(&self, y: &AlgebraElement) -> AlgebraElement {
        AlgebraElement::new(self.x1 + y.x1, self.x2 + y.x2, self.x3 + y.x3)
    }
}

/// Group exponential exp: 𝔤 → G, branching on the sign of Kil(x).
///
/// For Kil(x) < 0 the one-parameter subgroup winds around the compact
/// direction; c is the continuous lift of arg(q0 + i q1) along s ↦ exp(s·x),
/// which for this branch has the closed form worked out below (the lifted
/// argument of the ellipse s ↦ (cos sθ, x̄1 sin sθ) passes kπ exactly when
/// sθ does).
pub fn algebra_exp(x: &AlgebraElement) -> GroupPoint {
    let kil = x.killing();
    let norm = kil.abs().sqrt();
    // Below this scale cos/cosh and sin/sinh agree with the Kil = 0 forms
    // to machine precision in the quantities actually computed.
    if norm < 1e-12 {
        let w = Complex64::new(x.x2 / 2.0, x.x3 / 2.0);
        let c = (x.x1 / 2.0).atan();
        return GroupPoint::new(c, w);
    }
    let (b1, b2, b3) = (x.x1 / norm, x.x2 / norm, x.x3 / norm);
    let half = norm / 2.0;
    if kil < 0.0 {
        // q0 + i q1 = cos θ + i x̄1 sin θ, θ = |x|/2, |x̄1| >= 1.
        let k = (half / std::f64::consts::PI).round();
        let rem = half - k * std::f64::consts::PI;
        let c = b1.signum() * k * std::f64::consts::PI + (b1 * rem.sin()).atan2(rem.cos());
        let s = half.sin();
        GroupPoint::new(c, Complex64::new(s * b2, s * b3))
    } else {
        // q0 > 0, no winding.
        let c = (b1 * half.tanh()).atan();
        let s = half.sinh();
        GroupPoint::new(c, Complex64::new(s * b2, s * b3))
    }
}

/// Action of exp(a) ∈ SO(1,1) on G by conjugation: the hyperbolic rotation
/// R^h_a on (q1, q2), fixing (q0, q3). The c-branch is transported
/// continuously in a from a = 0.
pub fn so11_conjugate(a: f64, g: &GroupPoint) -> GroupPoint {
    let q = g.to_quad();
    let rot = |t: f64| (q.q0, t.cosh() * q.q1 + t.sinh() * q.q2);
    let c = lift::continuous_arg(rot, a, g.c);
    let q2 = a.sinh() * q.q1 + a.cosh() * q.q2;
    GroupPoint::new(c, Complex64::new(q2, q.q3))
}

/// Lift a quadric point to the cover given the already-lifted c of a
/// reference point known to lie within half a turn (used by tests and by
/// the matrix cross-checks; the main code paths lift along paths instead).
pub fn lift_near(q: &QuadCoords, c_reference: f64) -> Result<GroupPoint> {
    let principal = q.q1.atan2(q.q0);
    let k = ((c_reference - principal) / (2.0 * std::f64::consts::PI)).round();
    let c = principal + 2.0 * std::f64::consts::PI * k;
    if (c - c_reference).abs() > std::f64::consts::PI {
        return Err(Error::Internal(
            "reference c is not within half a turn of the quadric point".into(),
        ));
    }
    Ok(GroupPoint::new(c, Complex64::new(q.q2, q.q3)))
}

impl Serialize for GroupPoint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("GroupPoint", 2)?;
        st.serialize_field("c", &self.c)?;
        st.serialize_field("w", &[self.w.re, self.w.im])?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for GroupPoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = GroupPoint;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("an object {\"c\": float, \"w\": [re, im]}")
            }
            fn visit_map<A: MapAccess<'de>>(
                self,
                mut map: A,
            ) -> std::result::Result<GroupPoint, A::Error> {
                let mut c: Option<f64> = None;
                let mut w: Option<[f64; 2]> = None;
                while let Some(key) = map.next_key::<String>()? {
                    match key.as_str() {
                        "c" => c = Some(map.next_value()?),
                        "w" => w = Some(map.next_value()?),
                        other => return Err(de::Error::unknown_field(other, &["c", "w"])),
                    }
                }
                let c = c.ok_or_else(|| de::Error::missing_field("c"))?;
                let w = w.ok_or_else(|| de::Error::missing_field("w"))?;
                Ok(GroupPoint::new(c, Complex64::new(w[0], w[1])))
            }
            fn visit_seq<A: SeqAccess<'de>>(
                self,
                mut seq: A,
            ) -> std::result::Result<GroupPoint, A::Error> {
                let c: f64 = seq
                    .next_element()?
                    .ok_or_else(|| de::Error::invalid_length(0, &self))?;
                let w: [f64; 2] = seq
                    .next_element()?
                    .ok_or_else(|| de::Error::invalid_length(1, &self))?;
                Ok(GroupPoint::new(c, Complex64::new(w[0], w[1])))
            }
        }
        d.deserialize_struct("GroupPoint", &["c", "w"], V)
    }
}
