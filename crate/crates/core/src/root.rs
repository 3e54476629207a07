//! Derivative-free bracketed root finding.

const MAX_ITERATIONS: usize = 400;

/// Bisects `f` on `[lo, hi]` down to floating-point resolution and returns
/// the endpoint with the smaller residual.
///
/// `f(lo)` and `f(hi)` must not have the same strict sign.
pub(crate) fn bisect<F>(mut f: F, mut lo: f64, mut hi: f64) -> f64
where
    F: FnMut(f64) -> f64,
{
    let mut f_lo = f(lo);
    let mut f_hi = f(hi);
    debug_assert!(f_lo * f_hi <= 0.0, "bracket [{lo}, {hi}] holds no sign change");
    if f_lo == 0.0 {
        return lo;
    }
    if f_hi == 0.0 {
        return hi;
    }
    for _ in 0..MAX_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
            f_hi = f_mid;
        }
    }
    if f_lo.abs() <= f_hi.abs() {
        lo
    } else {
        hi
    }
}

/// Smallest point of `[lo, hi]` where a monotone predicate switches from
/// `false` to `true`, within relative width `rel_tol`. Requires
/// `pred(hi) == true`; the returned point always satisfies the predicate.
pub(crate) fn bisect_threshold<P>(mut pred: P, mut lo: f64, mut hi: f64, rel_tol: f64) -> f64
where
    P: FnMut(f64) -> bool,
{
    for _ in 0..MAX_ITERATIONS {
        if hi - lo <= rel_tol * hi.abs() {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}
