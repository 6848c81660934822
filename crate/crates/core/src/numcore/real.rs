use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};
use std::fmt::{Debug, Display};
use std::str::FromStr;

/// Scalar bound for the numeric kernel. Implemented by `f32` and `f64`;
/// the shipped pipelines instantiate `f64` (see `crate::Scalar`).
pub trait Real:
    Float
    + NumAssign
    + FromPrimitive
    + ToPrimitive
    + Display
    + Debug
    + FromStr
    + Default
    + Send
    + Sync
    + 'static
{
    /// Lossless-enough conversion from `f64`; used to inject constants.
    fn from_f64_lossy(x: f64) -> Self {
        Self::from(x).expect("f64 constant representable in scalar type")
    }
}

impl<T> Real for T where
    T: Float
        + NumAssign
        + FromPrimitive
        + ToPrimitive
        + Display
        + Debug
        + FromStr
        + Default
        + Send
        + Sync
        + 'static
{
}
