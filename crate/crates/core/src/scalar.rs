use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, NumAssignOps};

/// Floating-point scalar the numeric core is generic over.
///
/// All layer math, losses and optimizers are written against this trait.
/// `f64` is the default carried by the crate-root aliases and keeps gradient
/// checks sharp; `f32` halves memory when that matters more.
pub trait Scalar: Float + NumAssignOps + Sum + Debug + Display + Send + Sync + 'static {
    /// Tolerance for asserting that a softmax output sums to one.
    const SUM_TOLERANCE: f64;

    fn from_f64(value: f64) -> Self;
    fn as_f64(self) -> f64;
}

impl Scalar for f64 {
    const SUM_TOLERANCE: f64 = 1e-12;

    fn from_f64(value: f64) -> Self {
        value
    }

    fn as_f64(self) -> f64 {
        self
    }
}

impl Scalar for f32 {
    const SUM_TOLERANCE: f64 = 1e-6;

    fn from_f64(value: f64) -> Self {
        value as f32
    }

    fn as_f64(self) -> f64 {
        self as f64
    }
}
