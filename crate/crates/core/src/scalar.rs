//! Scalar abstraction shared by every numerical module.

use std::fmt::{Debug, Display};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive};

/// Real floating point type the simulator is generic over (`f32` or `f64`).
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal. Panics only if the value is not representable,
    /// which cannot happen for the finite constants used in this crate.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize converts to float")
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub type C<T> = Complex<T>;

#[inline]
pub(crate) fn czero<T: Real>() -> C<T> {
    C::new(T::zero(), T::zero())
}

#[inline]
pub(crate) fn cone<T: Real>() -> C<T> {
    C::new(T::one(), T::zero())
}

#[inline]
pub(crate) fn creal<T: Real>(x: T) -> C<T> {
    C::new(x, T::zero())
}

/// `ln n!` for small `n`, summed directly.
pub(crate) fn ln_factorial<T: Real>(n: usize) -> T {
    (2..=n).fold(T::zero(), |acc, k| acc + T::from_usize_lossy(k).ln())
}

/// `sqrt(n! / m!)` for `n >= m`, accumulated as a product to stay finite for `f32`.
pub(crate) fn sqrt_falling<T: Real>(n: usize, m: usize) -> T {
    (m + 1..=n).fold(T::one(), |acc, k| acc * T::from_usize_lossy(k).sqrt())
}
