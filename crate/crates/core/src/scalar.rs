//! Floating point scalar used by histograms, descriptors and scores.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumCast};

/// f32 or f64
pub trait Scalar:
    Float + FromPrimitive + NumCast + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from a count or fraction.
    #[inline]
    fn of(value: f64) -> Self {
        <Self as NumCast>::from(value).expect("finite f64 fits any Scalar")
    }

    #[inline]
    fn of_usize(value: usize) -> Self {
        <Self as FromPrimitive>::from_usize(value).expect("usize fits any Scalar")
    }

    #[inline]
    fn to_f64_lossless(self) -> f64 {
        <f64 as NumCast>::from(self).expect("Scalar widens to f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
