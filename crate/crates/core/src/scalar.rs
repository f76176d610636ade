//! Scalar abstraction shared by the algebraic modules.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating point type the coefficient algebra is written against: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts a literal. Every `f64` literal used in this crate is representable.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn half() -> Self {
        Self::of(0.5)
    }

    #[inline]
    fn two() -> Self {
        Self::of(2.0)
    }

    /// Relative error `|a - b| / max(1, |b|)`.
    #[inline]
    fn rel_err(a: Self, reference: Self) -> Self {
        (a - reference).abs() / Self::one().max(reference.abs())
    }
}

impl Real for f32 {}
impl Real for f64 {}
