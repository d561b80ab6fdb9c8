use crate::error::{Error, Result};

pub const MAX_BISECTION_STEPS: usize = 200;

/// Bisection on a bracket `[a, b]` with `f(a)` and `f(b)` of opposite sign.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    let (mut lo, mut hi) = if a <= b { (a, b) } else { (b, a) };
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() || flo.is_nan() || fhi.is_nan() {
        return Err(Error::NotBracketed { lo, hi });
    }
    for _ in 0..MAX_BISECTION_STEPS {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Largest root of `f` in `[lo, hi]`.
///
/// Samples `scan_points` equally spaced values from `hi` downward, stops at
/// the first sign change and refines it by bisection to `tol`.
pub fn bisect_largest_root<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    tol: f64,
    scan_points: usize,
) -> Result<f64> {
    if !(lo < hi) || scan_points < 2 {
        return Err(Error::Invalid(format!(
            "root scan needs lo < hi and at least 2 points (got [{lo}, {hi}], {scan_points})"
        )));
    }
    let step = (hi - lo) / (scan_points - 1) as f64;
    let mut upper = hi;
    let mut f_upper = f(hi);
    if f_upper == 0.0 {
        return Ok(hi);
    }
    for i in 1..scan_points {
        let x = if i == scan_points - 1 {
            lo
        } else {
            hi - step * i as f64
        };
        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if fx.signum() != f_upper.signum() && !fx.is_nan() && !f_upper.is_nan() {
            return bisect(&mut f, x, upper, tol);
        }
        upper = x;
        f_upper = fx;
    }
    Err(Error::NotBracketed { lo, hi })
}
