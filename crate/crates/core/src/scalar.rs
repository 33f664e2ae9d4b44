//! Scalar abstraction for the numeric kernels.
//!
//! Everything numeric in this crate is generic over [`Scalar`], which is any
//! real floating-point type usable both with `num-traits` conversions and
//! `nalgebra` factorizations. In practice this means `f32` and `f64`; the
//! crate root exports `f64`-backed aliases for callers that do not care.

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real scalar type for distances, gains, eigenvalues and scores.
pub trait Scalar: RealField + Copy + FromPrimitive + ToPrimitive + Default {
    /// Lossless-enough conversion from an `f64` constant.
    ///
    /// Panics if the value is not representable, which cannot happen for
    /// finite constants and the float types this crate is instantiated at.
    fn from_config(value: f64) -> Self {
        Self::from_f64(value).expect("finite constant must convert to scalar type")
    }

    /// Conversion from a count or index.
    fn from_count(value: usize) -> Self {
        Self::from_usize(value).expect("count must convert to scalar type")
    }

    /// Widening conversion used for reporting and serialization.
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("real scalar converts to f64")
    }
}

impl<T> Scalar for T where T: RealField + Copy + FromPrimitive + ToPrimitive + Default {}
