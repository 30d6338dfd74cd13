//! Scalar field abstraction over real and complex, single and double precision.

use core::fmt::{Debug, Display, LowerExp};
use core::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use core::str::FromStr;

use num_complex::Complex;
use num_traits::Float;

/// Working precision of a real type.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Precision {
    Single,
    Double,
}

/// Real working-precision floating point type (`f32` or `f64`).
pub trait RealScalar:
    Float + Debug + Display + LowerExp + FromStr + Default + Send + Sync + AddAssign + SubAssign + MulAssign + 'static
{
    const PRECISION: Precision;

    /// Machine epsilon of the working precision (`2^-23` or `2^-52`).
    fn eps() -> Self;

    /// Lossless widening to `f64`.
    fn widen(self) -> f64;

    /// Rounds an `f64` to the working precision.
    fn from_f64(x: f64) -> Self;

    /// `sqrt(self^2 + other^2)` without undue overflow, always from the
    /// `libm` crate so the result does not depend on enabled features.
    fn pythag(self, other: Self) -> Self;
}

impl RealScalar for f32 {
    const PRECISION: Precision = Precision::Single;

    #[inline]
    fn eps() -> Self {
        f32::EPSILON
    }

    #[inline]
    fn widen(self) -> f64 {
        self as f64
    }

    #[inline]
    fn from_f64(x: f64) -> Self {
        x as f32
    }

    #[inline]
    fn pythag(self, other: Self) -> Self {
        libm::hypotf(self, other)
    }
}

impl RealScalar for f64 {
    const PRECISION: Precision = Precision::Double;

    #[inline]
    fn eps() -> Self {
        f64::EPSILON
    }

    #[inline]
    fn widen(self) -> f64 {
        self
    }

    #[inline]
    fn from_f64(x: f64) -> Self {
        x
    }

    #[inline]
    fn pythag(self, other: Self) -> Self {
        libm::hypot(self, other)
    }
}

/// Element type of a [`Matrix`](crate::Matrix): a real or complex number.
pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + Default
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + 'static
{
    type Real: RealScalar;
    const IS_COMPLEX: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_real(r: Self::Real) -> Self;
    /// Builds a scalar from parts; `im` is ignored for real types.
    fn from_parts(re: Self::Real, im: Self::Real) -> Self;
    fn re(self) -> Self::Real;
    fn im(self) -> Self::Real;
    fn conj(self) -> Self;
    /// Modulus, overflow-safe for complex values.
    fn abs(self) -> Self::Real;
    /// Squared modulus (may overflow).
    fn abs_sq(self) -> Self::Real;
    fn scale(self, r: Self::Real) -> Self;
    /// Division by a real.
    fn unscale(self, r: Self::Real) -> Self;

    #[inline]
    fn eps() -> Self::Real {
        Self::Real::eps()
    }

    #[inline]
    fn is_finite(self) -> bool {
        self.re().is_finite() && self.im().is_finite()
    }
}

macro_rules! impl_real_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            type Real = $t;
            const IS_COMPLEX: bool = false;

            #[inline]
            fn zero() -> Self {
                0.0
            }
            #[inline]
            fn one() -> Self {
                1.0
            }
            #[inline]
            fn from_real(r: Self::Real) -> Self {
                r
            }
            #[inline]
            fn from_parts(re: Self::Real, _im: Self::Real) -> Self {
                re
            }
            #[inline]
            fn re(self) -> Self::Real {
                self
            }
            #[inline]
            fn im(self) -> Self::Real {
                0.0
            }
            #[inline]
            fn conj(self) -> Self {
                self
            }
            #[inline]
            fn abs(self) -> Self::Real {
                Float::abs(self)
            }
            #[inline]
            fn abs_sq(self) -> Self::Real {
                self * self
            }
            #[inline]
            fn scale(self, r: Self::Real) -> Self {
                self * r
            }
            #[inline]
            fn unscale(self, r: Self::Real) -> Self {
                self / r
            }
        }
    };
}

macro_rules! impl_complex_scalar {
    ($t:ty) => {
        impl Scalar for Complex<$t> {
            type Real = $t;
            const IS_COMPLEX: bool = true;

            #[inline]
            fn zero() -> Self {
                Complex::new(0.0, 0.0)
            }
            #[inline]
            fn one() -> Self {
                Complex::new(1.0, 0.0)
            }
            #[inline]
            fn from_real(r: Self::Real) -> Self {
                Complex::new(r, 0.0)
            }
            #[inline]
            fn from_parts(re: Self::Real, im: Self::Real) -> Self {
                Complex::new(re, im)
            }
            #[inline]
            fn re(self) -> Self::Real {
                self.re
            }
            #[inline]
            fn im(self) -> Self::Real {
                self.im
            }
            #[inline]
            fn conj(self) -> Self {
                Complex::new(self.re, -self.im)
            }
            #[inline]
            fn abs(self) -> Self::Real {
                self.re.pythag(self.im)
            }
            #[inline]
            fn abs_sq(self) -> Self::Real {
                self.re * self.re + self.im * self.im
            }
            #[inline]
            fn scale(self, r: Self::Real) -> Self {
                Complex::new(self.re * r, self.im * r)
            }
            #[inline]
            fn unscale(self, r: Self::Real) -> Self {
                Complex::new(self.re / r, self.im / r)
            }
        }
    };
}

impl_real_scalar!(f32);
impl_real_scalar!(f64);
impl_complex_scalar!(f32);
impl_complex_scalar!(f64);
