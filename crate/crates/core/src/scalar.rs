//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use serde::{de::DeserializeOwned, Serialize};

/// Floating point type the laboratory can run on. Implemented for `f32` and `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + LowerExp
    + Default
    + Sum
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Converts an `f64` literal. Values outside the range of `Self` saturate to ±∞.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).unwrap_or_else(|| if x > 0.0 { Self::infinity() } else { Self::neg_infinity() })
    }

    /// Converts an index or count.
    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).unwrap_or_else(Self::infinity)
    }

    /// Lossy conversion used for error payloads and serialization of diagnostics.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// The tightest tolerance that still makes sense for this precision.
    #[inline]
    fn tol_floor(requested: f64) -> Self {
        Self::lit(requested).max(Self::epsilon() * Self::lit(100.0))
    }

    /// Magnitude above which a value is treated as blown up.
    #[inline]
    fn overflow_guard() -> Self {
        Self::lit(1e300).min(Self::max_value() / Self::lit(1e4))
    }
}

impl Real for f32 {}
impl Real for f64 {}
