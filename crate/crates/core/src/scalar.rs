use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FloatConst, FromPrimitive};

/// Scalar type accepted by the geometric core.
///
/// Implemented for `f32`, `f64` and [`crate::Dual`] over any `Real`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + 'static
{
    /// Innermost real part as `f64`.
    fn re(&self) -> f64;

    /// Constant from an `f64` literal.
    fn c(v: f64) -> Self {
        Self::from_f64(v).expect("f64 constant representable")
    }
}

impl Real for f64 {
    fn re(&self) -> f64 {
        *self
    }
}

impl Real for f32 {
    fn re(&self) -> f64 {
        *self as f64
    }
}
