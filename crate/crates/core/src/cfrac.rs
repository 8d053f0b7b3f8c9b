//! Continued-fraction convergents of positive reals.

/// Convergents `p/q` of `x > 0`, stopping once `q` would exceed `max_den`.
pub fn convergents(x: f64, max_den: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    if !(x > 0.0) || !x.is_finite() {
        return out;
    }
    let (mut p0, mut q0, mut p1, mut q1) = (0u64, 1u64, 1u64, 0u64);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        if a > u32::MAX as f64 {
            break;
        }
        let a = a as u64;
        let (p2, q2) = match (
            a.checked_mul(p1).and_then(|v| v.checked_add(p0)),
            a.checked_mul(q1).and_then(|v| v.checked_add(q0)),
        ) {
            (Some(p), Some(q)) => (p, q),
            _ => break,
        };
        if q2 > max_den {
            break;
        }
        out.push((p2, q2));
        let frac = r - a as f64;
        if frac < 1e-12 {
            break;
        }
        r = 1.0 / frac;
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
    }
    out
}

/// First convergent within relative error `tol` of `x`, or the last one
/// available if none is.
pub fn approximate(x: f64, tol: f64, max_den: u64) -> Option<(u64, u64, f64)> {
    let mut last = None;
    for (p, q) in convergents(x, max_den) {
        if p == 0 {
            continue;
        }
        let err = ((p as f64 / q as f64) - x).abs() / x;
        last = Some((p, q, err));
        if err <= tol {
            break;
        }
    }
    last
}
