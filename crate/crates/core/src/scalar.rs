//! Real scalar abstraction for the state-vector kernel.

use std::fmt::{Debug, Display, LowerExp};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point type usable as the real part of a probability amplitude: `f32` or `f64`.
///
/// Each implementation carries the absolute tolerance used for algebraic identities
/// (normalization, unitarity, phase-insensitive equality).
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + LowerExp + Default + Send + Sync + 'static
{
    /// Absolute tolerance for identities that hold exactly in real arithmetic.
    fn tolerance() -> Self;

    fn from_f64_lossy(value: f64) -> Self {
        Self::from_f64(value).expect("finite f64 is representable")
    }
}

impl Real for f64 {
    fn tolerance() -> Self {
        1e-9
    }
}

impl Real for f32 {
    fn tolerance() -> Self {
        1e-5
    }
}
