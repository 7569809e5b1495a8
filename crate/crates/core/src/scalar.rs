use num_traits::{Float, FromPrimitive};

/// Floating-point scalar: f32 or f64.
///
/// The theory layer is generic over this trait; the simulation layer is fixed
/// to [`crate::Real`].
pub trait Scalar:
    Float + FromPrimitive + std::fmt::Debug + std::fmt::Display + Send + Sync + 'static
{
    /// Shorthand for lossy conversion from `f64`.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 converts to any Scalar")
    }

    /// Shorthand for conversion from an index.
    fn of_usize(x: usize) -> Self {
        Self::from_usize(x).expect("usize fits in any Scalar (lossy)")
    }

    fn to_f64_lossy(self) -> f64;
}

impl Scalar for f32 {
    fn to_f64_lossy(self) -> f64 {
        self as f64
    }
}

impl Scalar for f64 {
    fn to_f64_lossy(self) -> f64 {
        self
    }
}
