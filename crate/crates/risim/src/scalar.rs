//! Scalar abstraction: every numeric routine in the crate is generic over a
//! floating-point type implementing [`Scalar`] (`f32` or `f64`).

use std::fmt;
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating-point scalar usable throughout the toolkit.
///
/// The blanket impl covers `f32` and `f64`. Random draws are always made in
/// `f64` and converted, so seeded streams produce the same sequence of
/// values (up to rounding) for either instantiation.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + NumAssign
    + Sum
    + Default
    + fmt::Debug
    + fmt::Display
    + fmt::LowerExp
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` constant into this scalar type, rounding if needed.
    fn real(value: f64) -> Self {
        Self::from_f64(value).expect("f64 converts to any Scalar")
    }
}

impl<T> Scalar for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + NumAssign
        + Sum
        + Default
        + fmt::Debug
        + fmt::Display
        + fmt::LowerExp
        + Serialize
        + DeserializeOwned
        + Send
        + Sync
        + 'static
{
}
