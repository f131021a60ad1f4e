//! Value function of a two-barrier strategy and numerical checks of the
//! sufficient optimality conditions.

use std::fmt;

use crate::real::Real;
use crate::scale::{ScaleContext, Side};
use crate::solver::BarrierPair;

#[derive(Debug, Clone, Copy)]
pub struct ValueFunction<T> {
    pub ctx: ScaleContext<T>,
    pub pair: BarrierPair<T>,
    /// `1 / g'(z2)`.
    pub normalization: T,
    /// Whether the pair satisfies `g(z2) - g(z1) = (z2 - z1 - beta) g'(z2)`.
    pub first_order: bool,
}

impl<T: Real> ValueFunction<T> {
    pub fn new(ctx: &ScaleContext<T>, z1: T, z2: T) -> Self {
        let pair = BarrierPair {
            z1,
            z2,
            zeta: crate::solver::zeta(ctx, z1, z2),
        };
        Self::from_pair(ctx, pair)
    }

    pub fn from_pair(ctx: &ScaleContext<T>, pair: BarrierPair<T>) -> Self {
        let gp2 = ctx.g_prime(pair.z2);
        let lhs = ctx.g(pair.z2) - ctx.g(pair.z1);
        let rhs = (pair.z2 - pair.z1 - ctx.beta()) * gp2;
        let first_order = (lhs - rhs).abs() <= T::lit(1e-8) * lhs.abs().max(rhs.abs());
        Self {
            ctx: *ctx,
            pair,
            normalization: T::one() / gp2,
            first_order,
        }
    }

    /// Slope of the value function below the upper barrier, per unit of g.
    #[inline]
    fn slope(&self) -> T {
        if self.first_order {
            self.normalization
        } else {
            self.pair.zeta
        }
    }

    /// Value at the upper barrier.
    pub fn at_upper(&self) -> T {
        let BarrierPair { z1, z2, .. } = self.pair;
        if self.first_order {
            self.ctx.g(z2) * self.normalization
        } else {
            self.ctx.g(z1) * self.pair.zeta + z2 - z1 - self.ctx.beta()
        }
    }

    pub fn value(&self, x: T) -> T {
        if x < T::zero() {
            return T::zero();
        }
        if x < self.pair.z2 {
            self.ctx.g(x) * self.slope()
        } else {
            self.at_upper() + x - self.pair.z2
        }
    }

    pub fn derivative(&self, x: T) -> T {
        if x < self.pair.z2 {
            self.ctx.g_prime(x) * self.slope()
        } else {
            T::one()
        }
    }

    /// Second derivative using the regime formula of the requested side.
    pub fn second_derivative(&self, x: T, side: Side) -> T {
        if x < self.pair.z2 {
            self.ctx.g_double_prime_sided(x, side) * self.slope()
        } else {
            T::zero()
        }
    }

    /// `(A - q) V` at a point away from `a` and `z2`.
    pub fn generator(&self, x: T) -> T {
        let side = if x > self.ctx.a() { Side::Right } else { Side::Left };
        self.ctx
            .generator_residual(x, self.value(x), self.derivative(x), self.second_derivative(x, side))
    }
}

/// Sorted check grid on `[lo, hi]` with points clustered geometrically around
/// `focus` and kept at least `gap` away from every point in `avoid`.
pub fn check_grid<T: Real>(lo: T, hi: T, n: usize, focus: &[T], avoid: &[T], gap: T) -> Vec<T> {
    let mut pts = Vec::with_capacity(n + focus.len() * 40);
    let n_uniform = (n / 2).max(2);
    let step = (hi - lo) / T::from_usize(n_uniform - 1).unwrap();
    for i in 0..n_uniform {
        pts.push(lo + step * T::from_usize(i).unwrap());
    }
    let per_focus = (n - n_uniform.min(n)) / (2 * focus.len().max(1));
    let width = (hi - lo) * T::lit(0.05);
    for &f in focus {
        for k in 0..per_focus {
            let frac = T::from_usize(k).unwrap() / T::from_usize(per_focus.max(2) - 1).unwrap();
            let off = T::lit(1e-6) * (width / T::lit(1e-6)).powf(frac);
            pts.push(f - off);
            pts.push(f + off);
        }
    }
    let mut pts: Vec<T> = pts
        .into_iter()
        .filter(|&x| x >= lo && x <= hi && avoid.iter().all(|&a| (x - a).abs() >= gap))
        .collect();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    pts
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    OptimalProven,
    NotProven,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::OptimalProven => "optimal-proven",
            Self::NotProven => "not-proven",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerificationReport<T> {
    pub condition_a: bool,
    pub condition_b: bool,
    /// `mu_+ - q (a - z2 + g(z2) / g'(z2))`.
    pub condition_b_residual: T,
    pub condition_c: bool,
    /// `g''(a+)` in the rescaled normalisation (only its sign matters).
    pub g2_at_a_plus: T,
    /// Maximum of `(A - q) V` over the tail grid on `(z2, X_max]`.
    pub qvi_max_residual: T,
    /// Maximum of `|(A - q) V|` over the interior grid on `(0, z2) \ {a}`.
    pub interior_residual: T,
    /// Bound the interior residual is held to: `1e-8 q V(z2)`.
    pub interior_tolerance: T,
    pub increment_min_slack: T,
    pub verdict: Verdict,
}

impl<T: Real> VerificationReport<T> {
    pub fn any_condition(&self) -> bool {
        self.condition_a || self.condition_b || self.condition_c
    }

    /// Names of the satisfied conditions, e.g. `"a,c"`.
    pub fn satisfied(&self) -> String {
        let mut v = Vec::new();
        if self.condition_a {
            v.push("a");
        }
        if self.condition_b {
            v.push("b");
        }
        if self.condition_c {
            v.push("c");
        }
        v.join(",")
    }

    /// Flat key/value rendering.
    pub fn to_record(&self) -> Vec<(&'static str, String)> {
        vec![
            ("condition_a", self.condition_a.to_string()),
            ("condition_b", self.condition_b.to_string()),
            ("condition_b_residual", format!("{:e}", self.condition_b_residual)),
            ("condition_c", self.condition_c.to_string()),
            ("g2_at_a_plus", format!("{:e}", self.g2_at_a_plus)),
            ("qvi_max_residual", format!("{:e}", self.qvi_max_residual)),
            ("interior_residual", format!("{:e}", self.interior_residual)),
            ("interior_tolerance", format!("{:e}", self.interior_tolerance)),
            ("increment_min_slack", format!("{:e}", self.increment_min_slack)),
            ("verdict", self.verdict.to_string()),
        ]
    }
}

impl<T: Real> fmt::Display for VerificationReport<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.to_record() {
            writeln!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

const GRID_GAP: f64 = 1e-7;

/// Minimum of `V(x) - V(y) - (x - y - beta)` over ordered pairs of a uniform
/// grid on `[0, 2 z2]`.
pub fn check_increment_inequality<T: Real>(vf: &ValueFunction<T>, grid_size: usize) -> T {
    let n = grid_size.max(2);
    let hi = vf.pair.z2 + vf.pair.z2;
    let step = hi / T::from_usize(n - 1).unwrap();
    let xs: Vec<T> = (0..n).map(|i| step * T::from_usize(i).unwrap()).collect();
    let vs: Vec<T> = xs.iter().map(|&x| vf.value(x)).collect();
    let beta = vf.ctx.beta();
    let mut worst = T::infinity();
    for i in 0..n {
        for j in 0..=i {
            let s = vs[i] - vs[j] - (xs[i] - xs[j] - beta);
            worst = worst.min(s);
        }
    }
    worst
}

/// Returns `(interior max |(A - q) V|, tail max (A - q) V)`.
pub fn check_qvi<T: Real>(vf: &ValueFunction<T>, n: usize) -> (T, T) {
    let a = vf.ctx.a();
    let z2 = vf.pair.z2;
    let gap = T::lit(GRID_GAP);
    let interior = check_grid(gap, z2 - gap, n, &[T::zero(), a, vf.pair.z1, z2], &[a, z2], gap);
    let x_max = vf.ctx.x_max();
    let tail_hi = x_max.min(z2 + (z2 + a) * T::lit(50.0));
    let mut tail = check_grid(z2 + gap, tail_hi, n, &[a, z2], &[a, z2], gap);
    tail.push(x_max);
    let interior_max = interior
        .iter()
        .map(|&x| vf.generator(x).abs())
        .fold(T::zero(), T::max);
    let tail_max = tail
        .iter()
        .filter(|&&x| x > z2)
        .map(|&x| vf.generator(x))
        .fold(T::neg_infinity(), T::max);
    (interior_max, tail_max)
}

pub fn check_conditions<T: Real>(vf: &ValueFunction<T>) -> VerificationReport<T> {
    check_conditions_with(vf, 1000, 400)
}

pub fn check_conditions_with<T: Real>(vf: &ValueFunction<T>, qvi_points: usize, increment_points: usize) -> VerificationReport<T> {
    let p = &vf.ctx.params;
    let z2 = vf.pair.z2;
    let condition_a = z2 > p.a;
    let condition_b_residual = p.mu_plus - p.q * (p.a - z2 + vf.ctx.g(z2) / vf.ctx.g_prime(z2));
    let condition_b = z2 <= p.a && condition_b_residual <= T::zero();
    let g2_at_a_plus = vf.ctx.g_double_prime_sided(p.a, Side::Right);
    let condition_c = g2_at_a_plus >= T::zero();
    let (interior_residual, qvi_max_residual) = check_qvi(vf, qvi_points);
    let interior_tolerance = T::lit(1e-8) * p.q * vf.value(z2);
    let increment_min_slack = check_increment_inequality(vf, increment_points);
    let numerics_ok = interior_residual <= interior_tolerance
        && qvi_max_residual <= T::lit(1e-9)
        && increment_min_slack >= -T::lit(1e-9);
    let verdict = if (condition_a || condition_b || condition_c) && numerics_ok {
        Verdict::OptimalProven
    } else {
        Verdict::NotProven
    };
    VerificationReport {
        condition_a,
        condition_b,
        condition_b_residual,
        condition_c,
        g2_at_a_plus,
        qvi_max_residual,
        interior_residual,
        interior_tolerance,
        increment_min_slack,
        verdict,
    }
}
