//! Generic scalar abstraction for the vector and statistics math.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar the similarity and statistics code is generic over.
///
/// Implemented for `f32` and `f64`; the pipeline itself runs on
/// [`crate::Scalar`].
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
}

impl<T> Real for T where
    T: Float + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_real<T: Real>() {}

    #[test]
    fn implemented_for_both_float_widths() {
        assert_real::<f32>();
        assert_real::<f64>();
    }
}
