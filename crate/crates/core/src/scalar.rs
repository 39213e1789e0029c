//! Scalar abstractions.
//!
//! Closed-form expressions (profiles, Laplacian components, mismatch terms,
//! limit ratios) only need field arithmetic, so they are written against
//! [`Scalar`] and can be evaluated in `f32`, `f64` or exact rationals.
//! Anything that needs square roots or trigonometry is written against
//! [`Real`].

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, FloatConst, FromPrimitive, Num, Signed, ToPrimitive};

/// Ordered field scalar: `f32`, `f64` or [`BigRational`].
pub trait Scalar: Clone + Debug + PartialOrd + Num + Signed + FromPrimitive {
    fn two() -> Self {
        Self::one() + Self::one()
    }

    fn half() -> Self {
        Self::one() / Self::two()
    }

    /// Lossy conversion used when reporting exact results.
    fn approx_f64(&self) -> f64;
}

impl Scalar for f32 {
    fn approx_f64(&self) -> f64 {
        f64::from(*self)
    }
}

impl Scalar for f64 {
    fn approx_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for BigRational {
    fn approx_f64(&self) -> f64 {
        // numer/denom can overflow f64 individually; scale first.
        let n = self.numer();
        let d = self.denom();
        match (n.to_f64(), d.to_f64()) {
            (Some(a), Some(b)) if a.is_finite() && b.is_finite() => a / b,
            _ => {
                let shift = n.bits().max(d.bits()).saturating_sub(1000) as usize;
                let a = (n >> shift).to_f64().unwrap_or(f64::NAN);
                let b = (d >> shift).to_f64().unwrap_or(f64::NAN);
                a / b
            }
        }
    }
}

/// Floating-point scalar (`f32` or `f64`).
pub trait Real: Scalar + Float + FloatConst + Copy + Send + Sync + 'static {
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Exact copy of a finite `f64` as a rational.
pub fn exact(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite value")
}

/// `n / d` as an exact rational.
pub fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}
