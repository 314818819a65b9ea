//! Bracketed scalar root finding.

use crate::error::{Error, Result};

const MAX_ITER: usize = 400;

/// Finds a root of `f` in `[lo, hi]`, which must bracket a sign change.
///
/// Bisection shrinks the bracket until it is narrower than `1e3 * tol`, then
/// secant steps refine the root. A secant step that leaves the bracket is
/// replaced by a bisection step, so the bracket always holds a sign change.
pub fn bisect_secant(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa.is_finite() && fb.is_finite()) || fa.signum() == fb.signum() {
        return Err(Error::NoRealSolution(format!(
            "no sign change on [{lo}, {hi}] (f = {fa}, {fb})"
        )));
    }

    let coarse = tol * 1e3;
    let mut iter = 0;
    while b - a > coarse && iter < MAX_ITER {
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
            fb = fm;
        }
        iter += 1;
    }

    while b - a > tol && iter < MAX_ITER {
        let mut x = b - fb * (b - a) / (fb - fa);
        if !(x > a && x < b) {
            x = 0.5 * (a + b);
        }
        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        // Keep the bracket shrinking geometrically even when the secant
        // stalls on one side.
        let before = b - a;
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
        if b - a > 0.5 * before {
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
                fb = fm;
            }
        }
        iter += 1;
    }
    Ok(if fa.abs() < fb.abs() { a } else { b })
}

/// Doubles `hi` until `f(hi)` has the opposite sign of `f(lo)` or `limit` is
/// passed. Returns the expanded upper bound.
pub fn expand_upper(f: impl Fn(f64) -> f64, lo: f64, mut hi: f64, limit: f64) -> Result<f64> {
    let flo = f(lo);
    loop {
        let fhi = f(hi);
        if fhi.is_finite() && (fhi == 0.0 || fhi.signum() != flo.signum()) {
            return Ok(hi);
        }
        if hi >= limit {
            return Err(Error::NoRealSolution(format!("no sign change on [{lo}, {hi}]")));
        }
        hi = (hi * 2.0).min(limit);
    }
}
