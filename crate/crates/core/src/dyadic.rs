//! Dyadic-level machinery shared by the energy and integrability tests: blocks
//! `∫_{2^{-k-1}}^{2^{-k}} g dr`, their decay classification, log-log slopes and limit
//! extrapolation along `r_k = 2^{-k}`.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::radial::RadialProfile;
use crate::scalar::Real;
use crate::stability::eigen::linear_fit;

/// Blocks decay when consecutive ratios stay at or below `1 - DECAY_DELTA`.
pub const DECAY_DELTA: f64 = 1e-4;
/// Number of trailing ratios that must agree.
pub const DECAY_WINDOW: usize = 4;
/// Fewest dyadic levels a block test accepts.
pub const MIN_LEVELS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlockClass {
    Convergent,
    Divergent,
    Undetermined,
}

/// Levels `k ≥ k0` whose interval `[2^{-k-1}, 2^{-k}]` lies inside the grid.
pub fn levels<T: Real>(profile: &RadialProfile<T>, k0: usize) -> Vec<(T, T)> {
    let floor = profile.grid().r_min() * (T::one() - T::lit(1e-12));
    let mut out = Vec::new();
    let mut hi = T::lit(0.5).powi(k0 as i32);
    loop {
        let lo = hi * T::lit(0.5);
        if lo < floor {
            break;
        }
        out.push((lo, hi));
        hi = lo;
    }
    out
}

/// Block integrals of `g(r, u, u_r)` over [`levels`]; fails below [`MIN_LEVELS`].
pub fn blocks<T, G>(profile: &RadialProfile<T>, k0: usize, g: G) -> Result<Vec<T>>
where
    T: Real,
    G: Fn(T, T, T) -> T,
{
    let lv = levels(profile, k0);
    if lv.len() < MIN_LEVELS {
        return Err(LabError::InsufficientResolution(format!(
            "{} dyadic levels below 2^-{k0}, need {MIN_LEVELS}",
            lv.len()
        )));
    }
    lv.into_iter().map(|(lo, hi)| profile.integrate(lo, hi, &g)).collect()
}

/// Geometric decay test on the last [`DECAY_WINDOW`] ratios of nonnegative blocks.
pub fn classify<T: Real>(blocks: &[T]) -> BlockClass {
    let scale = blocks.iter().copied().fold(T::zero(), T::max);
    let n = blocks.len();
    if n < DECAY_WINDOW + 1 {
        return BlockClass::Undetermined;
    }
    let tail = &blocks[n - DECAY_WINDOW - 1..];
    let negligible = |b: T| b <= T::epsilon() * scale || b == T::zero();
    if tail.iter().all(|&b| negligible(b)) {
        return BlockClass::Convergent;
    }
    let cut = T::one() - T::lit(DECAY_DELTA);
    let mut decays = true;
    let mut persists = true;
    for w in tail.windows(2) {
        if negligible(w[1]) {
            persists = false;
            continue;
        }
        if negligible(w[0]) {
            decays = false;
            continue;
        }
        let ratio = w[1] / w[0];
        decays &= ratio <= cut;
        persists &= ratio >= cut;
    }
    match (decays, persists) {
        (true, false) => BlockClass::Convergent,
        (false, true) => BlockClass::Divergent,
        _ => BlockClass::Undetermined,
    }
}

/// Sum of the blocks plus the geometric tail implied by the last ratio.
pub fn extrapolated_sum<T: Real>(blocks: &[T]) -> T {
    let total: T = blocks.iter().copied().sum();
    let n = blocks.len();
    if n < 2 || blocks[n - 2] <= T::zero() {
        return total;
    }
    let rho = blocks[n - 1] / blocks[n - 2];
    if rho < T::one() {
        total + blocks[n - 1] * rho / (T::one() - rho)
    } else {
        T::infinity()
    }
}

/// Slope of `log b_k` against `log 2^{-k}` over the last `window` positive blocks.
pub fn tail_slope<T: Real>(blocks: &[T], window: usize) -> T {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (k, &b) in blocks.iter().enumerate().rev() {
        if xs.len() == window {
            break;
        }
        if b > T::zero() {
            xs.push(-T::from_usize_lossy(k) * T::LN_2());
            ys.push(b.ln());
        }
    }
    if xs.len() < 2 {
        return T::zero();
    }
    linear_fit(&xs, &ys).1
}

/// Radii `r0 2^{-j}` from `r0` down to the smallest one still on the grid.
pub fn radii<T: Real>(profile: &RadialProfile<T>, r0: T) -> Vec<T> {
    let floor = profile.grid().r_min() * (T::one() - T::lit(1e-12));
    let mut out = Vec::new();
    let mut r = r0;
    while r >= floor {
        out.push(r);
        r = r * T::lit(0.5);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Limit<T> {
    Finite(T),
    Divergent,
}

impl<T: Real> Limit<T> {
    pub fn finite(self) -> Option<T> {
        match self {
            Limit::Finite(v) => Some(v),
            Limit::Divergent => None,
        }
    }
}

/// Limit of a sequence sampled at `r_k = r0 2^{-k}`, by Aitken's Δ² on the last three
/// terms (exact for geometric convergence). Growing or stalled-but-moving sequences are
/// divergent.
pub fn extrapolate<T: Real>(seq: &[T]) -> Limit<T> {
    let n = seq.len();
    if seq.iter().any(|v| !v.is_finite()) {
        return Limit::Divergent;
    }
    if n < 3 {
        return match seq.last() {
            Some(&v) => Limit::Finite(v),
            None => Limit::Divergent,
        };
    }
    let scale = seq.iter().map(|v| v.abs()).fold(T::zero(), T::max);
    let d1 = seq[n - 2] - seq[n - 3];
    let d2 = seq[n - 1] - seq[n - 2];
    if d2.abs() <= T::lit(1e-9) * scale || d2 == T::zero() {
        return Limit::Finite(seq[n - 1]);
    }
    if d1 == T::zero() {
        return Limit::Divergent;
    }
    let rho = d2 / d1;
    if !(rho.abs() < T::one() - T::lit(1e-3)) {
        return Limit::Divergent;
    }
    Limit::Finite(seq[n - 1] + d2 * rho / (T::one() - rho))
}
