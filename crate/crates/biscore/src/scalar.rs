//! Floating-point abstraction used by the numerical core.
//!
//! Every matrix routine in this crate is generic over [`Scalar`], which is
//! satisfied by `f32` and `f64` (the blanket impl below covers exactly the
//! types that implement both the `num_traits` arithmetic surface and
//! nalgebra's `RealField`). Random sampling is always performed in `f64` and
//! converted, so a fixed seed produces the same draw sequence regardless of
//! the scalar a caller instantiates.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Scalar type of all matrices and vectors in this crate.
///
/// Combines `num_traits::Float` (for portable `sqrt`/`ln`/`abs` and
/// infinity/NaN handling) with `nalgebra::RealField` (required by the dense
/// factorizations). Where the two traits define methods with the same name,
/// call sites disambiguate explicitly (`Float::sqrt(x)`).
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + nalgebra::RealField
    + Copy
    + Default
    + Display
    + Debug
    + Send
    + Sync
    + 'static
{
    /// Converts from `f64`, panicking only for types that cannot represent
    /// ordinary finite values (neither `f32` nor `f64` can fail here;
    /// overflowing `f32` conversions saturate to infinity, which is a faithful
    /// representation for threshold-style constants).
    fn from_f64_lossy(value: f64) -> Self {
        <Self as FromPrimitive>::from_f64(value).expect("scalar type cannot represent an f64 value")
    }

    /// Converts to `f64` (exact for `f32` inputs).
    fn to_f64_lossy(self) -> f64 {
        <Self as ToPrimitive>::to_f64(&self).expect("scalar type cannot convert to f64")
    }
}

impl<T> Scalar for T where
    T: Float
        + FromPrimitive
        + ToPrimitive
        + NumAssign
        + nalgebra::RealField
        + Copy
        + Default
        + Display
        + Debug
        + Send
        + Sync
        + 'static
{
}
