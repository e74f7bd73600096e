//! Scalar abstractions shared by the numerical kernels.
//!
//! Floating-point kernels (confidence radii, AdaHedge, demand forecasts) are
//! generic over [`Real`]; the LP benchmark is generic over [`LpField`], which
//! also admits exact rationals.

use std::fmt::Debug;
use std::ops::Neg;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{Float, FromPrimitive, Num, Signed, ToPrimitive, Zero};

/// f32 or f64.
pub trait Real: Float + FromPrimitive + Debug + Default + Send + Sync + 'static {
    /// Lossless-enough conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// An ordered field the dense simplex can pivot in.
pub trait LpField: Clone + Debug + PartialOrd + Num + Neg<Output = Self> + Signed {
    /// Magnitudes at or below this are treated as zero during pivoting.
    fn pivot_tolerance() -> Self;

    fn from_f64_value(x: f64) -> Option<Self>;

    fn to_f64_value(&self) -> f64;

    fn is_negligible(&self) -> bool {
        self.abs() <= Self::pivot_tolerance()
    }
}

impl LpField for f64 {
    fn pivot_tolerance() -> Self {
        1e-9
    }
    fn from_f64_value(x: f64) -> Option<Self> {
        x.is_finite().then_some(x)
    }
    fn to_f64_value(&self) -> f64 {
        *self
    }
}

impl LpField for f32 {
    fn pivot_tolerance() -> Self {
        1e-5
    }
    fn from_f64_value(x: f64) -> Option<Self> {
        x.is_finite().then_some(x as f32)
    }
    fn to_f64_value(&self) -> f64 {
        f64::from(*self)
    }
}

impl LpField for BigRational {
    fn pivot_tolerance() -> Self {
        Self::zero()
    }
    fn from_f64_value(x: f64) -> Option<Self> {
        BigRational::from_float(x)
    }
    fn to_f64_value(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl LpField for Ratio<i64> {
    fn pivot_tolerance() -> Self {
        Self::zero()
    }
    fn from_f64_value(x: f64) -> Option<Self> {
        Ratio::<i64>::approximate_float(x)
    }
    fn to_f64_value(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

/// Exact rational from a numerator and denominator.
pub fn rational(numer: i64, denom: i64) -> BigRational {
    BigRational::new(BigInt::from(numer), BigInt::from(denom))
}
