//! Floating-point abstraction shared by the flow, codelength and metric code.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real scalar used throughout the library: `f32` or `f64`.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from `f64` for literal constants.
    #[inline]
    fn lit(value: f64) -> Self {
        Self::from_f64(value).expect("scalar conversion from f64")
    }

    #[inline]
    fn from_count(value: usize) -> Self {
        Self::from_usize(value).expect("scalar conversion from usize")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar conversion to f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// `x * log2(x)` with the convention `0 * log 0 = 0`.
#[inline]
pub fn plogp<F: Scalar>(x: F) -> F {
    if x > F::zero() {
        x * x.log2()
    } else {
        F::zero()
    }
}
