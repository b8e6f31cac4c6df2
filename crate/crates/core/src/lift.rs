//! Continuous lifting of the argument function along paths.
//!
//! The angle coordinate c on the universal cover is `arg(q0 + i q1)` only
//! locally; a globally correct value must be transported along a path from a
//! point where the lift is known. The helper here walks the path, summing
//! exact angle increments between consecutive samples, and halves the step
//! until every increment is below π/2, so no winding can be missed.

/// Exact angle from `(x0, y0)` to `(x1, y1)`, in (-π, π].
#[inline]
pub fn arg_increment(x0: f64, y0: f64, x1: f64, y1: f64) -> f64 {
    let cross = x0 * y1 - y0 * x1;
    let dot = x0 * x1 + y0 * y1;
    cross.atan2(dot)
}

/// Continuous argument of `s ↦ f(s)` at `s_end`, given the lifted argument
/// `arg0` at `s = 0`. `f` must never pass through the origin.
///
/// Increments telescope exactly, so the result does not lose accuracy with
/// the number of steps; the step control only guards against missed windings.
pub fn continuous_arg<F: Fn(f64) -> (f64, f64)>(f: F, s_end: f64, arg0: f64) -> f64 {
    let n = ((s_end.abs() / 0.4).ceil() as usize).max(4);
    continuous_arg_steps(f, s_end, arg0, n)
}

/// [`continuous_arg`] with an explicit initial sample count, for paths whose
/// winding rate the caller can bound a priori.
pub fn continuous_arg_steps<F: Fn(f64) -> (f64, f64)>(
    f: F,
    s_end: f64,
    arg0: f64,
    initial_steps: usize,
) -> f64 {
    if s_end == 0.0 {
        return arg0;
    }
    let n = initial_steps.max(1);
    let mut total = arg0;
    let (mut x, mut y) = f(0.0);
    let base = s_end / n as f64;
    let mut s = 0.0_f64;
    for i in 0..n {
        let s1 = if i + 1 == n { s_end } else { base * (i + 1) as f64 };
        let (x1, y1) = f(s1);
        total += segment_arg(&f, s, s1, (x, y), (x1, y1), 0);
        x = x1;
        y = y1;
        s = s1;
    }
    total
}

/// Lifted argument increment over one segment: the principal increment is
/// trusted only when it survives a midpoint split (which catches both
/// increments at or beyond π/2 and aliased full turns).
fn segment_arg<F: Fn(f64) -> (f64, f64)>(
    f: &F,
    s0: f64,
    s1: f64,
    p0: (f64, f64),
    p1: (f64, f64),
    depth: usize,
) -> f64 {
    let d = arg_increment(p0.0, p0.1, p1.0, p1.1);
    if depth >= 48 {
        return d;
    }
    let sm = 0.5 * (s0 + s1);
    let pm = f(sm);
    let d0 = arg_increment(p0.0, p0.1, pm.0, pm.1);
    let d1 = arg_increment(pm.0, pm.1, p1.0, p1.1);
    if d.abs() < std::f64::consts::FRAC_PI_2 && (d0 + d1 - d).abs() < 1e-9 {
        d
    } else {
        segment_arg(f, s0, sm, p0, pm, depth + 1) + segment_arg(f, sm, s1, pm, p1, depth + 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn winds_past_pi() {
        // Circle traversed 3.25 times.
        let c = continuous_arg(|s| ((s * 6.5 * PI).cos(), (s * 6.5 * PI).sin()), 1.0, 0.0);
        assert!((c - 6.5 * PI).abs() < 1e-10, "c = {c}");
    }

    #[test]
    fn backwards_path() {
        let c = continuous_arg(|s| ((-s).cos(), (-s).sin()), 7.0, 0.0);
        assert!((c + 7.0).abs() < 1e-10);
    }

    #[test]
    fn elliptical_path_matches_endpoints() {
        // Ellipse (cos θ, 3 sin θ): lift at θ = kπ must be exactly kπ.
        let c = continuous_arg(|s| (s.cos(), 3.0 * s.sin()), 5.0 * PI, 0.0);
        assert!((c - 5.0 * PI).abs() < 1e-9);
    }
}
