//! Adaptive Gauss–Kronrod (7, 15) quadrature.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::real::Real;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions<T> {
    pub abs_tol: T,
    pub rel_tol: T,
    pub max_intervals: usize,
}

impl<T: Real> Default for QuadOptions<T> {
    fn default() -> Self {
        Self {
            abs_tol: T::lit(1e-12).max(T::epsilon() * T::lit(16.0)),
            rel_tol: T::rel_tol(),
            max_intervals: 1 << 15,
        }
    }
}

struct Segment<T> {
    lo: T,
    hi: T,
    value: T,
    error: T,
}

impl<T: Real> PartialEq for Segment<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl<T: Real> Eq for Segment<T> {}

impl<T: Real> PartialOrd for Segment<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Real> Ord for Segment<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.partial_cmp(&other.error).unwrap_or(Ordering::Equal)
    }
}

fn kronrod<T: Real, F: Fn(T) -> T>(f: &F, lo: T, hi: T) -> Segment<T> {
    let half = (hi - lo) * T::lit(0.5);
    let mid = lo + half;
    let fc = f(mid);
    let mut k = fc * T::lit(WGK[7]);
    let mut g = fc * T::lit(WG[3]);
    for j in 0..7 {
        let dx = half * T::lit(XGK[j]);
        let s = f(mid - dx) + f(mid + dx);
        k = k + s * T::lit(WGK[j]);
        if j % 2 == 1 {
            g = g + s * T::lit(WG[j / 2]);
        }
    }
    Segment {
        lo,
        hi,
        value: k * half,
        error: ((k - g) * half).abs(),
    }
}

/// Integrates `f` over `[lo, hi]` by globally adaptive bisection of the
/// segment with the largest error estimate.
pub fn integrate<T: Real, F: Fn(T) -> T>(f: F, lo: T, hi: T, opts: &QuadOptions<T>) -> Result<T> {
    if lo == hi {
        return Ok(T::zero());
    }
    if hi < lo {
        return integrate(f, hi, lo, opts).map(|v| -v);
    }
    let fail = |err: T| Error::Quadrature {
        lo: lo.to_f64_lossy(),
        hi: hi.to_f64_lossy(),
        estimate: err.to_f64_lossy(),
    };
    let first = kronrod(&f, lo, hi);
    let (mut total, mut err) = (first.value, first.error);
    let mut heap = BinaryHeap::from(vec![first]);
    loop {
        if !(total.is_finite() && err.is_finite()) {
            return Err(fail(err));
        }
        let target = opts.abs_tol.max(opts.rel_tol * total.abs());
        if err <= target {
            return Ok(heap.iter().fold(T::zero(), |v, s| v + s.value));
        }
        if heap.len() >= opts.max_intervals {
            return Err(fail(err));
        }
        let s = heap.pop().expect("heap is never empty");
        let mid = s.lo + (s.hi - s.lo) * T::lit(0.5);
        if mid <= s.lo || mid >= s.hi {
            // Interval collapsed to adjacent floats; accept what we have.
            err = err - s.error;
            heap.push(Segment { error: T::zero(), ..s });
            continue;
        }
        let (l, r) = (kronrod(&f, s.lo, mid), kronrod(&f, mid, s.hi));
        total = total - s.value + l.value + r.value;
        err = (err - s.error + l.error + r.error).max(T::zero());
        heap.push(l);
        heap.push(r);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let v = integrate(|x: f64| 3.0 * x * x, 0.0, 2.0, &QuadOptions::default()).unwrap();
        assert!((v - 8.0).abs() < 1e-13);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let v = integrate(|x: f64| x.exp(), 1.0, 0.0, &QuadOptions::default()).unwrap();
        assert!((v + (1f64.exp() - 1.0)).abs() < 1e-13);
    }

    #[test]
    fn kink_is_resolved_adaptively() {
        let v = integrate(|x: f64| (x - 0.3).abs(), 0.0, 1.0, &QuadOptions::default()).unwrap();
        assert!((v - (0.045 + 0.245)).abs() < 1e-12);
    }

    #[test]
    fn single_precision_runs() {
        let v = integrate(|x: f32| x.cos(), 0.0, 1.0, &QuadOptions::default()).unwrap();
        assert!((v - 1f32.sin()).abs() < 1e-5);
    }
}
