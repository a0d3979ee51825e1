//! Scalar abstraction for probability tables.
//!
//! Every algorithm in the crate is written against [`Probability`], so the
//! same code runs on `f64`, `f32`, or exact [`BigRational`] arithmetic.

use std::fmt::Debug;

use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, ToPrimitive};

/// Numeric type usable as a probability: a field with ordering and lossy
/// conversion to `f64` for tolerance checks.
pub trait Probability:
    Num + Clone + Debug + PartialOrd + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// Lossy conversion used for every tolerance comparison.
    fn as_f64(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Conversion from a parsed decimal. Panics only if `T` cannot represent
    /// finite floats, which none of the supported types do.
    fn from_prob(x: f64) -> Self {
        Self::from_f64(x).expect("finite probability")
    }

    fn uniform(range: usize) -> Self {
        Self::one() / Self::from_usize(range).expect("range fits scalar")
    }

    /// Row-sum tolerance this type can honour.
    fn normalization_tol() -> f64 {
        NORMALIZATION_TOL
    }
}

impl Probability for f64 {}
impl Probability for f32 {
    fn normalization_tol() -> f64 {
        1e-5
    }
}
impl Probability for BigRational {}

/// Row-sum tolerance applied when a network is loaded or validated.
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// Probability mass at or below this counts as an impossible event.
pub const IMPOSSIBLE_TOL: f64 = 1e-12;

/// Sum of a slice of probabilities.
pub fn sum<T: Probability>(xs: &[T]) -> T {
    xs.iter().fold(T::zero(), |acc, x| acc + x.clone())
}

/// Largest absolute difference between two equally long slices.
pub fn max_abs_diff<T: Probability>(a: &[T], b: &[T]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x.as_f64() - y.as_f64()).abs())
        .fold(0.0, f64::max)
}
