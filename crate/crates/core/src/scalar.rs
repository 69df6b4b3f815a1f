//! Scalar abstraction shared by every numeric routine in the crate.
//!
//! All kernels are written against [`Real`] so the same code runs in `f32`
//! and `f64`. The acceptance tolerances (1e-10 and below) only hold in
//! `f64`; `f32` is useful for quick experiments and for checking that no
//! routine silently depends on double precision constants.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real floating-point scalar usable by the matrix kernel and the formula algebra.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable in scalar type")
    }

    /// Lossy conversion from a count.
    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex scalar over a [`Real`].
pub type C<T> = Complex<T>;

#[inline]
pub(crate) fn c<T: Real>(re: T, im: T) -> C<T> {
    Complex::new(re, im)
}

#[inline]
pub(crate) fn re<T: Real>(v: T) -> C<T> {
    Complex::new(v, T::zero())
}

#[inline]
pub(crate) fn im<T: Real>(v: T) -> C<T> {
    Complex::new(T::zero(), v)
}
