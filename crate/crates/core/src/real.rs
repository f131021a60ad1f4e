use std::fmt::{Debug, Display, LowerExp};

use num_traits::{Float, FloatConst, FromPrimitive, NumCast};

/// Floating point scalar accepted by the analytic core: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumCast + Debug + Display + LowerExp + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal into this scalar type.
    #[inline]
    fn lit(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).expect("literal representable in scalar type")
    }

    /// Lossy conversion to `f64` for reporting.
    #[inline]
    fn to_f64_lossy(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    /// Absolute tolerance for root arguments: 1e-12 in double precision,
    /// a few hundred ulps otherwise.
    #[inline]
    fn arg_tol() -> Self {
        Self::lit(1e-12).max(Self::epsilon() * Self::lit(256.0))
    }

    /// Relative tolerance for quadrature and identity checks.
    #[inline]
    fn rel_tol() -> Self {
        Self::lit(1e-13).max(Self::epsilon() * Self::lit(64.0))
    }
}

impl Real for f32 {}
impl Real for f64 {}
