//! Scalar abstractions shared by every tensor routine.
//!
//! All geometry in this crate is written against [`Scalar`], which covers
//! both plain floating point numbers and (arbitrarily nested) dual numbers.
//! A routine evaluated at `Dual<f64>` returns its value together with a
//! directional derivative, at `Dual<Dual<f64>>` a mixed second derivative,
//! and so on. [`Real`] is the subset of scalars that are ordinary floats.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use num_traits::{FloatConst, FromPrimitive, One, ToPrimitive, Zero};

/// Field operations plus the smooth elementary functions used by metric
/// and vector-field expressions.
pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
{
    /// Underlying floating point type (the innermost real part).
    type Base: Real;

    fn from_base(v: Self::Base) -> Self;

    /// Innermost real part, discarding every infinitesimal.
    fn base(&self) -> Self::Base;

    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn powi(self, n: i32) -> Self;
    /// Power with a constant real exponent.
    fn powc(self, p: Self::Base) -> Self;

    /// Multiplication by a constant of the base type.
    fn scale(self, c: Self::Base) -> Self;

    /// Literal constant.
    fn lit(v: f64) -> Self {
        Self::from_base(Self::Base::from_f64(v).expect("literal representable in base type"))
    }

    fn recip(self) -> Self {
        Self::one() / self
    }
}

/// Plain floating point scalar: `f32` or `f64`.
pub trait Real:
    Scalar<Base = Self>
    + PartialOrd
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Default
    + Display
    + LowerExp
    + Sum
{
    fn abs(self) -> Self;
    fn floor(self) -> Self;
    fn atan2(self, other: Self) -> Self;
    fn is_finite(self) -> bool;
    fn epsilon() -> Self;
    fn max(self, other: Self) -> Self;
    fn min(self, other: Self) -> Self;

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

macro_rules! impl_real {
    ($t:ty) => {
        impl Scalar for $t {
            type Base = $t;

            #[inline]
            fn from_base(v: $t) -> Self {
                v
            }
            #[inline]
            fn base(&self) -> $t {
                *self
            }
            #[inline]
            fn sin(self) -> Self {
                <$t>::sin(self)
            }
            #[inline]
            fn cos(self) -> Self {
                <$t>::cos(self)
            }
            #[inline]
            fn exp(self) -> Self {
                <$t>::exp(self)
            }
            #[inline]
            fn ln(self) -> Self {
                <$t>::ln(self)
            }
            #[inline]
            fn sqrt(self) -> Self {
                <$t>::sqrt(self)
            }
            #[inline]
            fn powi(self, n: i32) -> Self {
                <$t>::powi(self, n)
            }
            #[inline]
            fn powc(self, p: $t) -> Self {
                <$t>::powf(self, p)
            }
            #[inline]
            fn scale(self, c: $t) -> Self {
                self * c
            }
        }

        impl Real for $t {
            #[inline]
            fn abs(self) -> Self {
                <$t>::abs(self)
            }
            #[inline]
            fn floor(self) -> Self {
                <$t>::floor(self)
            }
            #[inline]
            fn atan2(self, other: Self) -> Self {
                <$t>::atan2(self, other)
            }
            #[inline]
            fn is_finite(self) -> bool {
                <$t>::is_finite(self)
            }
            #[inline]
            fn epsilon() -> Self {
                <$t>::EPSILON
            }
            #[inline]
            fn max(self, other: Self) -> Self {
                <$t>::max(self, other)
            }
            #[inline]
            fn min(self, other: Self) -> Self {
                <$t>::min(self, other)
            }
        }
    };
}

impl_real!(f32);
impl_real!(f64);

/// Converts an `f64` constant into the working real type.
#[inline]
pub fn real<T: Real>(v: f64) -> T {
    T::lit(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hypot<S: Scalar>(a: S, b: S) -> S {
        (a * a + b * b).sqrt()
    }

    #[test]
    fn generic_code_runs_at_both_precisions() {
        assert_eq!(hypot(3.0f64, 4.0), 5.0);
        assert_eq!(hypot(3.0f32, 4.0), 5.0);
    }

    #[test]
    fn literals_round_trip() {
        assert_eq!(<f64 as Scalar>::lit(0.25), 0.25);
        assert_eq!(real::<f32>(-2.0), -2.0f32);
    }
}
