//! Bracketed root finding.

use crate::error::{Error, Result};
use crate::real::Real;

/// A closed search interval together with the function values at its ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket<T> {
    pub lo: T,
    pub hi: T,
}

impl<T: Real> Bracket<T> {
    pub fn new(lo: T, hi: T) -> Self {
        if lo <= hi {
            Self { lo, hi }
        } else {
            Self { lo: hi, hi: lo }
        }
    }
}

const MAX_ITER: usize = 400;

/// Brent's method on a sign-changing bracket.
///
/// Terminates when the bracket is narrower than `xtol` (plus a few ulps of
/// the iterate) or an exact zero is hit. Fails loudly when the end values do
/// not straddle zero.
pub fn brent<T: Real, F: FnMut(T) -> T>(mut f: F, bracket: Bracket<T>, xtol: T, context: &str) -> Result<T> {
    let two = T::lit(2.0);
    let half = T::lit(0.5);
    let three = T::lit(3.0);
    let (mut a, mut b) = (bracket.lo, bracket.hi);
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == T::zero() {
        return Ok(a);
    }
    if fb == T::zero() {
        return Ok(b);
    }
    if fa.is_nan() || fb.is_nan() || (fa > T::zero()) == (fb > T::zero()) {
        return Err(Error::NoBracket {
            lo: a.to_f64_lossy(),
            hi: b.to_f64_lossy(),
            f_lo: fa.to_f64_lossy(),
            f_hi: fb.to_f64_lossy(),
            context: context.to_string(),
        });
    }
    let mut c = b;
    let mut fc = fb;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..MAX_ITER {
        if (fb > T::zero()) == (fc > T::zero()) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = two * T::epsilon() * b.abs() + half * xtol;
        let xm = half * (c - b);
        if xm.abs() <= tol1 || fb == T::zero() {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = two * xm * s;
                q = T::one() - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (two * xm * qa * (qa - r) - (b - a) * (r - T::one()));
                q = (qa - T::one()) * (r - T::one()) * (s - T::one());
            }
            if p > T::zero() {
                q = -q;
            }
            p = p.abs();
            let min1 = three * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if two * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        if d.abs() > tol1 {
            b = b + d;
        } else {
            b = b + if xm > T::zero() { tol1 } else { -tol1 };
        }
        fb = f(b);
        if fb.is_nan() {
            return Err(Error::NoConvergence {
                iterations: MAX_ITER,
                context: format!("{context} (NaN at {})", b.to_f64_lossy()),
            });
        }
    }
    Err(Error::NoConvergence {
        iterations: MAX_ITER,
        context: context.to_string(),
    })
}

/// Infimum of `{x in [lo, hi] : pred(x)}` for a predicate that switches
/// from false to true at most once. Returns `None` when `pred(hi)` is false.
pub fn first_true<T: Real, P: FnMut(T) -> bool>(mut pred: P, bracket: Bracket<T>, xtol: T) -> Option<T> {
    let (mut lo, mut hi) = (bracket.lo, bracket.hi);
    if pred(lo) {
        return Some(lo);
    }
    if !pred(hi) {
        return None;
    }
    let half = T::lit(0.5);
    while hi - lo > xtol + T::epsilon() * hi.abs() * T::lit(4.0) {
        let mid = lo + (hi - lo) * half;
        if mid <= lo || mid >= hi {
            break;
        }
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}
