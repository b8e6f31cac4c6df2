//! Bracketed bisection for the transcendental time equations.
//!
//! All root brackets used by the solvers come from monotonicity statements
//! proved alongside the time formulas, so bisection is the right tool: it is
//! unconditionally convergent on a sign change. The bracket endpoints are
//! checked before iterating.

use crate::error::{Error, Result};

/// Absolute tolerance in the abscissa used by the time solvers.
pub const BISECT_TOL: f64 = 1e-13;

/// Bisect `f` on `[lo, hi]`. The endpoints must straddle a sign change
/// (an exact zero at an endpoint is returned immediately).
pub fn bisect<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() || !flo.is_finite() || !fhi.is_finite() {
        return Err(Error::NoBracket { lo, hi, flo, fhi });
    }
    let (mut a, mut b, mut fa) = (lo, hi, flo);
    while (b - a).abs() > tol {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Solve `f(x) = target` for a strictly increasing `f` on `[0, ∞)`,
/// growing the bracket from `[0, first_guess]` until it contains the target.
pub fn solve_increasing<F: Fn(f64) -> f64>(f: F, target: f64, first_guess: f64) -> Result<f64> {
    if target == 0.0 && f(0.0) == 0.0 {
        return Ok(0.0);
    }
    let mut hi = first_guess.max(1e-8);
    let mut tries = 0;
    while f(hi) < target {
        hi *= 2.0;
        tries += 1;
        if tries > 200 {
            return Err(Error::Internal(format!(
                "monotone bracket expansion failed at target {target}"
            )));
        }
    }
    bisect(|x| f(x) - target, 0.0, hi, BISECT_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn finds_tan_root() {
        // tan τ = -τ on (π/2, π), pole-free form sin τ + τ cos τ = 0.
        let r = bisect(|t| t.sin() + t * t.cos(), PI / 2.0, PI, BISECT_TOL).unwrap();
        assert!((r - 2.028_757_838_110_434_2).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_bracket() {
        assert!(bisect(|t| t * t + 1.0, -1.0, 1.0, 1e-12).is_err());
    }

    #[test]
    fn monotone_solve() {
        let r = solve_increasing(|x| x.sinh(), 2.5, 0.1).unwrap();
        assert!((r.sinh() - 2.5).abs() < 1e-10);
    }
}
