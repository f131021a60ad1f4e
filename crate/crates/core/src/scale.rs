//! Scale-type functions of the threshold diffusion and the two-sided exit
//! functionals built from them.
//!
//! `g` is stored divided by the positive constant `(1 - c_-) e^{theta1_minus a}`.
//! Barrier pairs, the value function and every sign or monotonicity statement
//! are unaffected by that factor, and the rescaled form stays finite for
//! thresholds and exponents where the unscaled one would overflow.

use crate::error::{Error, Result};
use crate::model::{DerivedConstants, ModelParams};
use crate::real::Real;

/// Which one-sided limit to take at the threshold `a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy)]
pub struct ScaleContext<T> {
    pub params: ModelParams<T>,
    pub consts: DerivedConstants<T>,
    upper_p: T,
    upper_h: T,
    g_minus_0: T,
    g_plus_0: T,
}

impl<T: Real> ScaleContext<T> {
    pub fn new(params: ModelParams<T>) -> Result<Self> {
        let consts = DerivedConstants::derive(&params)?;
        Self::from_parts(params, consts)
    }

    /// Builds the context from precomputed constants. Fails when g varies by
    /// more than the floating point range between the origin and `a`.
    pub fn from_parts(params: ModelParams<T>, consts: DerivedConstants<T>) -> Result<Self> {
        let span = (consts.theta1_minus + consts.theta2_minus) * params.a;
        let limit = T::max_value().ln() * T::lit(0.85);
        if !(span <= limit) {
            return Err(Error::InvalidParameter {
                name: "a",
                reason: format!(
                    "g changes by a factor exp({span}) between 0 and a, beyond the representable exp({limit})"
                ),
            });
        }
        let (upper_p, upper_h) = consts.upper_mix(params.a);
        let mut ctx = Self {
            params,
            consts,
            upper_p,
            upper_h,
            g_minus_0: T::zero(),
            g_plus_0: T::zero(),
        };
        ctx.g_minus_0 = ctx.g_minus(T::zero());
        ctx.g_plus_0 = ctx.g_plus(T::zero());
        Ok(ctx)
    }

    /// Same model with a different transaction cost (g does not depend on it).
    pub fn with_beta(&self, beta: T) -> Result<Self> {
        let mut c = *self;
        c.params = self.params.with_beta(beta)?;
        Ok(c)
    }

    #[inline]
    pub fn a(&self) -> T {
        self.params.a
    }

    #[inline]
    pub fn beta(&self) -> T {
        self.params.beta
    }

    /// Cached `g^-(0)` and `g^+(0)`.
    pub fn g_pm_at_zero(&self) -> (T, T) {
        (self.g_minus_0, self.g_plus_0)
    }

    /// Natural log of the factor relating the unscaled g to the one returned here.
    pub fn log_normalization(&self) -> T {
        (T::one() - self.consts.c_minus).ln() + self.consts.theta1_minus * self.params.a
    }

    /// Largest level at which g and its derivatives stay finite: the growing
    /// exponential above `a` has rate `theta2_plus`.
    pub fn x_max(&self) -> T {
        let limit = T::max_value().ln() * T::lit(0.95);
        let scale = (self.consts.theta2_plus * self.upper_p.abs().max(T::one())).ln().max(T::zero());
        self.params.a + (limit - scale) / self.consts.theta2_plus
    }

    pub fn g_minus(&self, x: T) -> T {
        let k = &self.consts;
        let d = x - self.params.a;
        if x > self.params.a {
            (-k.theta1_plus * d).exp()
        } else {
            k.c_minus * (k.theta2_minus * d).exp() + (T::one() - k.c_minus) * (-k.theta1_minus * d).exp()
        }
    }

    pub fn g_minus_prime(&self, x: T) -> T {
        let k = &self.consts;
        let d = x - self.params.a;
        if x > self.params.a {
            -k.theta1_plus * (-k.theta1_plus * d).exp()
        } else {
            k.c_minus * k.theta2_minus * (k.theta2_minus * d).exp()
                - (T::one() - k.c_minus) * k.theta1_minus * (-k.theta1_minus * d).exp()
        }
    }

    pub fn g_plus(&self, x: T) -> T {
        let k = &self.consts;
        let d = x - self.params.a;
        if x > self.params.a {
            (T::one() - k.c_plus) * (k.theta2_plus * d).exp() + k.c_plus * (-k.theta1_plus * d).exp()
        } else {
            (k.theta2_minus * d).exp()
        }
    }

    pub fn g_plus_prime(&self, x: T) -> T {
        let k = &self.consts;
        let d = x - self.params.a;
        if x > self.params.a {
            (T::one() - k.c_plus) * k.theta2_plus * (k.theta2_plus * d).exp()
                - k.c_plus * k.theta1_plus * (-k.theta1_plus * d).exp()
        } else {
            k.theta2_minus * (k.theta2_minus * d).exp()
        }
    }

    /// The two exponentials making up g on the requested side of `a`, with
    /// their rates: `g = u - v`, `g' = r u + s v`, `g'' = r^2 u - s^2 v`.
    #[inline]
    fn terms(&self, x: T, side: Side) -> (T, T, T, T) {
        let k = &self.consts;
        let a = self.params.a;
        match side {
            Side::Left => (
                (k.theta2_minus * (x - a)).exp(),
                (-k.theta1_minus * x - k.theta2_minus * a).exp(),
                k.theta2_minus,
                k.theta1_minus,
            ),
            Side::Right => {
                let d = x - a;
                (
                    self.upper_p * (k.theta2_plus * d).exp(),
                    self.upper_h * (-k.theta1_plus * d).exp(),
                    k.theta2_plus,
                    k.theta1_plus,
                )
            }
        }
    }

    #[inline]
    fn side_of(&self, x: T) -> Side {
        if x > self.params.a {
            Side::Right
        } else {
            Side::Left
        }
    }

    /// g(x); exactly zero at the origin.
    #[inline]
    pub fn g(&self, x: T) -> T {
        let (u, v, _, _) = self.terms(x, self.side_of(x));
        u - v
    }

    #[inline]
    pub fn g_prime(&self, x: T) -> T {
        let (u, v, r, s) = self.terms(x, self.side_of(x));
        r * u + s * v
    }

    /// `ln g'(x)`, finite even where g' itself under- or overflows.
    pub fn ln_g_prime(&self, x: T) -> T {
        let k = &self.consts;
        let a = self.params.a;
        let (cu, eu, cv, ev) = match self.side_of(x) {
            Side::Left => (
                k.theta2_minus,
                k.theta2_minus * (x - a),
                k.theta1_minus,
                -k.theta1_minus * x - k.theta2_minus * a,
            ),
            Side::Right => {
                let d = x - a;
                (
                    k.theta2_plus * self.upper_p,
                    k.theta2_plus * d,
                    k.theta1_plus * self.upper_h,
                    -k.theta1_plus * d,
                )
            }
        };
        let m = eu.max(ev);
        m + (cu * (eu - m).exp() + cv * (ev - m).exp()).ln()
    }

    /// g'' away from the threshold; errors at exactly `x = a`.
    pub fn g_double_prime(&self, x: T) -> Result<T> {
        if x == self.params.a {
            return Err(Error::Discontinuity {
                a: self.params.a.to_f64_lossy(),
            });
        }
        Ok(self.g_double_prime_sided(x, self.side_of(x)))
    }

    /// g'' using the formula of the requested side (one-sided limit at `a`).
    #[inline]
    pub fn g_double_prime_sided(&self, x: T, side: Side) -> T {
        let (u, v, r, s) = self.terms(x, side);
        r * r * u - s * s * v
    }

    /// One-sided first derivative, used for pasting checks at `a`.
    #[inline]
    pub fn g_prime_sided(&self, x: T, side: Side) -> T {
        let (u, v, r, s) = self.terms(x, side);
        r * u + s * v
    }

    /// One-sided value of g from the formula of the requested side.
    #[inline]
    pub fn g_sided(&self, x: T, side: Side) -> T {
        let (u, v, _, _) = self.terms(x, side);
        u - v
    }

    /// Discounted probability of reaching `y` before `z`, started from `x`.
    pub fn exit_down(&self, x: T, y: T, z: T) -> Result<T> {
        check_exit_order(x, y, z)?;
        let (gmx, gpx) = (self.g_minus(x), self.g_plus(x));
        let (gmy, gpy) = (self.g_minus(y), self.g_plus(y));
        let (gmz, gpz) = (self.g_minus(z), self.g_plus(z));
        Ok((gpz * gmx - gmz * gpx) / (gmy * gpz - gmz * gpy))
    }

    /// Discounted probability of reaching `z` before `y`, started from `x`.
    pub fn exit_up(&self, x: T, y: T, z: T) -> Result<T> {
        check_exit_order(x, y, z)?;
        let (gmx, gpx) = (self.g_minus(x), self.g_plus(x));
        let (gmy, gpy) = (self.g_minus(y), self.g_plus(y));
        let (gmz, gpz) = (self.g_minus(z), self.g_plus(z));
        Ok((gpy * gmx - gmy * gpx) / (gmz * gpy - gmy * gpz))
    }

    /// `(A - q) f` at `x` for a function given by its value and derivatives,
    /// using the coefficients of the regime owning `x`.
    #[inline]
    pub fn generator_residual(&self, x: T, f: T, df: T, d2f: T) -> T {
        let s = self.params.volatility(x);
        T::lit(0.5) * s * s * d2f + self.params.drift(x) * df - self.params.q * f
    }
}

fn check_exit_order<T: Real>(x: T, y: T, z: T) -> Result<()> {
    if !(y <= x && x <= z) || y == z {
        return Err(Error::Ordering(format!(
            "exit functionals need y <= x <= z with y != z, got y = {y}, x = {x}, z = {z}"
        )));
    }
    Ok(())
}

/// Analytic upper bound on the optimal value function at surplus `x`.
pub fn value_upper_bound<T: Real>(params: &ModelParams<T>, x: T) -> T {
    let two = T::lit(2.0);
    let part = |mu: T, s: T| ((mu * mu + two * params.q * s * s).sqrt() + mu) / (two * params.q);
    x + part(params.mu_plus, params.sigma_plus) + part(params.mu_minus, params.sigma_minus)
}
