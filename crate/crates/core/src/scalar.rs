//! Real scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating-point type the linear algebra, objectives and optimizer are
/// written against. Implemented for `f32` and `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
    /// Converts an `f64` literal or parameter into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        // Every f64 maps to some f32/f64 (possibly rounded or infinite).
        Self::from_f64(x).expect("f64 is representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Tolerance used for the constant-modulus check: 1e-12 in double
    /// precision, a few ulps above the rounding floor in single precision.
    #[inline]
    fn modulus_tolerance() -> Self {
        Self::lit(1e-12).max(Self::epsilon() * Self::lit(64.0))
    }

    /// Largest Gram-matrix condition number accepted by the pseudo-inverse.
    #[inline]
    fn condition_limit() -> Self {
        Self::lit(1e12).min(Self::lit(0.01) / Self::epsilon())
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `|z|^2` without the square root.
#[inline]
pub fn norm_sqr<T: Real>(z: Complex<T>) -> T {
    z.re * z.re + z.im * z.im
}

/// `exp(j * phase)`.
#[inline]
pub fn cis<T: Real>(phase: T) -> Complex<T> {
    Complex::new(phase.cos(), phase.sin())
}
