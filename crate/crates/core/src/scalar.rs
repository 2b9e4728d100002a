//! Scalar abstraction shared by the numerical modules.
//!
//! Every physics routine is written against [`Real`] so it can run in `f32`
//! for quick checks or `f64` for production runs. The crate root exposes
//! `f64` aliases for the common types.

use std::fmt;

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real floating-point scalar usable by the solvers.
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + fmt::Display + fmt::LowerExp + Send + Sync
{
}

impl<T> Real for T where
    T: RealField + Copy + FromPrimitive + ToPrimitive + fmt::Display + fmt::LowerExp + Send + Sync
{
}

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal not representable in scalar type")
}

/// Converts a scalar back to `f64`.
#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().expect("scalar not representable as f64")
}
