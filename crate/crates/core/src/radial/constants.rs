use serde::{Deserialize, Serialize};

use crate::scalar::Real;

/// Dimension-dependent constants that recur across the estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Constants<T: Real> {
    pub dimension: usize,
    /// Surface measure of the unit sphere in R^N.
    pub omega: T,
    /// `(N-2)²/4`, optimal constant of the Hardy inequality.
    pub hardy_constant: T,
    /// `-N/2 - √(N-1) + 2`, growth rate of the pointwise lower bound.
    pub sharp_exponent: T,
    /// `-N/2 - √(N-1) + 1`, growth rate of the gradient lower bound.
    pub gradient_exponent: T,
    /// `N + 2√(N-1) - 1`, power in the inverse-square integral bound.
    pub inverse_square_exponent: T,
}

impl<T: Real> Constants<T> {
    pub fn new(dimension: usize) -> Self {
        let n = T::from_usize_lossy(dimension);
        let two = T::lit(2.0);
        let root = (n - T::one()).sqrt();
        let half_gap = (n - two) / two;
        let sharp = -n / two - root + two;
        Constants {
            dimension,
            omega: sphere_measure(dimension),
            hardy_constant: half_gap * half_gap,
            sharp_exponent: sharp,
            gradient_exponent: sharp - T::one(),
            inverse_square_exponent: n + two * root - T::one(),
        }
    }

    /// `√(N-1)`, the exponent of the equality test function `t^{√(N-1)}`.
    pub fn root(&self) -> T {
        (T::from_usize_lossy(self.dimension) - T::one()).sqrt()
    }
}

/// `2π^{N/2}/Γ(N/2)`.
pub fn sphere_measure<T: Real>(dimension: usize) -> T {
    let pi = T::PI();
    // Γ(N/2) by recursion from Γ(1) or Γ(1/2)
    let mut gamma = if dimension.is_multiple_of(2) { T::one() } else { pi.sqrt() };
    let mut x = if dimension.is_multiple_of(2) { T::one() } else { T::lit(0.5) };
    let target = T::from_usize_lossy(dimension) / T::lit(2.0);
    while x < target {
        gamma = gamma * x;
        x = x + T::one();
    }
    T::lit(2.0) * pi.powf(target) / gamma
}
