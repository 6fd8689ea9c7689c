//! Scalar abstraction for the numeric kernels.
//!
//! All floating-point math in this crate (correlation, eigensolves, rotation,
//! sampling estimates, association measures) is generic over [`Real`], so the
//! same kernels run in `f32` or `f64`. The pipeline and CLI use the `f64`
//! aliases exported from the crate root.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar usable by every numeric kernel in this crate.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + 'static
{
}

impl<T> Real for T where
    T: Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + 'static
{
}

/// Lossless-enough conversion from a count. Counts in this crate stay far
/// below 2^53, so the unwrap cannot fire for f32/f64.
#[inline]
pub fn from_usize<T: Real>(n: usize) -> T {
    T::from_usize(n).expect("count representable in scalar type")
}

#[inline]
pub fn from_u64<T: Real>(n: u64) -> T {
    T::from_u64(n).expect("count representable in scalar type")
}

#[inline]
pub fn from_i64<T: Real>(n: i64) -> T {
    T::from_i64(n).expect("count representable in scalar type")
}

/// Convert a literal constant (tolerances, defaults) into the scalar type.
#[inline]
pub fn from_f64<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("constant representable in scalar type")
}
