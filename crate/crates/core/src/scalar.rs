//! Scalar abstraction for the numeric kernels.

use std::fmt::{Debug, Display};
use std::iter::Sum;

/// Floating-point scalar the distribution, sieve and statistics kernels are
/// generic over. `f64` is the default everywhere (see [`crate::Real`]); `f32`
/// works but cannot meet the tightest tolerances.
pub trait Scalar:
    num_traits::Float + num_traits::FromPrimitive + Sum + Debug + Display + Send + Sync + 'static
{
    /// Shorthand for lossless-enough conversion from `usize` counts.
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Neumaier-compensated accumulator. Alternating inclusion-exclusion sums
/// cancel heavily; plain summation loses the low-order bits the sandwich
/// tolerances depend on.
#[derive(Clone, Copy, Debug)]
pub struct CompensatedSum<F> {
    sum: F,
    compensation: F,
}

impl<F: Scalar> Default for CompensatedSum<F> {
    fn default() -> Self {
        Self { sum: F::zero(), compensation: F::zero() }
    }
}

impl<F: Scalar> CompensatedSum<F> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, value: F) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation = self.compensation + ((self.sum - t) + value);
        } else {
            self.compensation = self.compensation + ((value - t) + self.sum);
        }
        self.sum = t;
    }

    pub fn value(&self) -> F {
        self.sum + self.compensation
    }
}
