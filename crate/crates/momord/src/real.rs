//! Scalar abstraction for the numeric core.
//!
//! Everything in the math modules is generic over [`Real`], a floating-point
//! scalar (`f32` or `f64`). The accuracy contracts quoted throughout the crate
//! are stated for `f64`; `f32` instantiations run the same algorithms and
//! degrade gracefully to single precision. Concrete `f64` aliases live at the
//! crate root.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar: `f32` or `f64`.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
}

impl<T> Real for T where
    T: Float + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
}

/// Shorthand for converting an `f64` literal into the working scalar.
#[inline]
pub(crate) fn real<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable in scalar type")
}

/// Lossy view of a scalar as `f64`, for error payloads and reports.
#[inline]
pub(crate) fn as_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}
