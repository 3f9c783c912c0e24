//! Scalar abstraction for probabilities, scores and likelihoods.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive};

/// Floating-point type usable for probability tables and scores.
///
/// Implemented for `f32` and `f64`. Data-side quantities (row weights,
/// configuration values such as pseudo-counts) stay `f64` and are converted
/// with [`Real::lit`] at the boundary.
pub trait Real:
    Float + FromPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
    /// Converts an `f64` constant into `Self`, rounding as the target type does.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 is representable in every Real type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("Real values convert to f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}
