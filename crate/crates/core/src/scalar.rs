//! Scalar abstraction shared by the numerical modules.
//!
//! Everything that is pure formula evaluation is written against [`Real`], so
//! it runs in `f32` or `f64`. Routines that need a Hermitian eigensolver add
//! the nalgebra bound through [`MatrixReal`].

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
}

impl<T> Real for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + ToPrimitive
        + Debug
        + Display
        + Default
        + Send
        + Sync
        + 'static
{
}

/// A [`Real`] that nalgebra can also decompose.
///
/// Both `num_traits::Float` and `nalgebra::RealField` define `sqrt`, `exp`, ...
/// so code bounded by this trait calls those through `Float::` explicitly.
pub trait MatrixReal: Real + nalgebra::RealField {}

impl<T> MatrixReal for T where T: Real + nalgebra::RealField {}

/// Lossy conversion of an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable in scalar type")
}

/// Widen a scalar to `f64` (used for error payloads and output).
#[inline]
pub fn wide<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Convert a count into `T`.
#[inline]
pub fn count<T: Real>(n: usize) -> T {
    T::from_usize(n).expect("count representable in scalar type")
}
