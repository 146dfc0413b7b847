//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Real floating-point type usable by the operator algebra and by the dense
/// eigensolvers behind it. Implemented for `f32` and `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
    + faer::traits::RealField
{
    /// Converts an `f64` literal into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("f64 literal fits the scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    /// Tolerance `base` calibrated for `f64`, widened by the ratio of machine
    /// epsilons for lower-precision types.
    #[inline]
    fn tol(base: f64) -> Self {
        let ratio = <Self as Float>::epsilon().as_f64() / f64::EPSILON;
        Self::lit(base * ratio.max(1.0))
    }

    #[inline]
    fn of_usize(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("usize fits the scalar type")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex number over a [`Real`] scalar.
pub type C<T> = Complex<T>;

#[inline]
pub(crate) fn cr<T: Real>(re: T) -> C<T> {
    Complex::new(re, T::zero())
}

#[inline]
pub(crate) fn ci<T: Real>(im: T) -> C<T> {
    Complex::new(T::zero(), im)
}

#[inline]
pub(crate) fn czero<T: Real>() -> C<T> {
    Complex::new(T::zero(), T::zero())
}

#[inline]
pub(crate) fn cone<T: Real>() -> C<T> {
    Complex::new(T::one(), T::zero())
}

/// Modulus without going through `Complex::norm`, which needs `Float` method
/// resolution that is ambiguous once faer's traits are in scope.
#[inline]
pub(crate) fn cabs<T: Real>(z: C<T>) -> T {
    Float::hypot(z.re, z.im)
}

#[inline]
pub(crate) fn cabs2<T: Real>(z: C<T>) -> T {
    z.re * z.re + z.im * z.im
}

#[inline]
pub(crate) fn cexp<T: Real>(z: C<T>) -> C<T> {
    let m = Float::exp(z.re);
    Complex::new(m * Float::cos(z.im), m * Float::sin(z.im))
}
