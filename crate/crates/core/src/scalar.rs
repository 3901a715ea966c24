//! Scalar abstraction so the numeric core runs on `f32` or `f64`.

use std::fmt::{Debug, Display, LowerExp};
use std::ops::AddAssign;
use std::str::FromStr;

use num_traits::{Float, FromPrimitive};
use rand::distr::uniform::SampleUniform;
use rand::Rng;
use rand_distr::StandardNormal;

/// Floating-point scalar used for weights, rule parameters and metrics.
pub trait Scalar:
    Float
    + FromPrimitive
    + SampleUniform
    + AddAssign
    + FromStr
    + Display
    + LowerExp
    + Debug
    + Default
    + Send
    + Sync
    + 'static
{
    /// Draws from the standard normal distribution N(0, 1).
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Lossy conversion from `f64`, panicking only on non-representable input.
    fn from_f64_lossy(v: f64) -> Self {
        Self::from_f64(v).expect("f64 value not representable in scalar type")
    }

    fn from_usize_lossy(v: usize) -> Self {
        Self::from_usize(v).expect("usize value not representable in scalar type")
    }
}

impl Scalar for f32 {
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }
}

impl Scalar for f64 {
    fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }
}
