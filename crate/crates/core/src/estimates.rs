//! Energy classification and the quantitative estimates for semi-stable non-energy
//! profiles: the inverse-square integral of `u_r`, the doubling gap of `u`, the pointwise
//! lower bound on `|u|` and the two-sided gradient bounds, each checked as the
//! boundedness or non-decay of a benchmark ratio along dyadic radii `r0 2^{-j}`.

use serde::{Deserialize, Serialize};

use crate::dyadic::{self, BlockClass};
use crate::error::{invalid, LabError, Result};
use crate::radial::{Constants, Nonlinearity, RadialProfile};
use crate::scalar::Real;
use crate::stability::eigen::linear_fit;

/// Largest admissible log-log slope of a ratio that must not decay as `r → 0`.
pub const TREND_SLOPE: f64 = 0.05;
/// Dyadic levels entering a trend fit.
pub const TREND_WINDOW: usize = 5;
/// Default outer radius of the estimates.
pub const DEFAULT_R0: f64 = 0.1;
/// First dyadic level of the energy blocks, `[1/8, 1/4]`.
pub const ENERGY_K0: usize = 2;
/// `α_2d` counts as positive above this fraction of `max(-r u_r)`.
pub const ALPHA_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnergyClass {
    Energy,
    NonEnergy,
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct EnergyVerdict<T: Real> {
    pub blocks: Vec<T>,
    pub classification: EnergyClass,
    /// Exponent `s` of `b_k ~ 2^{-k s}` over the last levels.
    pub tail_slope: T,
}

/// Dyadic blocks of `∫ r^{N-1} u_r² dr` below `1/4`.
pub fn energy_blocks<T: Real>(profile: &RadialProfile<T>) -> Result<EnergyVerdict<T>> {
    let n = profile.dimension() as i32;
    let blocks = dyadic::blocks(profile, ENERGY_K0, |r, _, ur| r.powi(n - 1) * ur * ur)?;
    let classification = match dyadic::classify(&blocks) {
        BlockClass::Convergent => EnergyClass::Energy,
        BlockClass::Divergent => EnergyClass::NonEnergy,
        BlockClass::Undetermined => EnergyClass::Undetermined,
    };
    let tail_slope = dyadic::tail_slope(&blocks, dyadic::DECAY_WINDOW + 1);
    Ok(EnergyVerdict { blocks, classification, tail_slope })
}

/// Log-log slope of `values` against `rs` over the last [`TREND_WINDOW`] samples.
/// Nonpositive values give `+∞`, i.e. a ratio that collapsed.
pub fn trend_slope<T: Real>(rs: &[T], values: &[T]) -> T {
    let n = rs.len().min(values.len());
    let start = n.saturating_sub(TREND_WINDOW);
    if n - start < 2 {
        return T::zero();
    }
    if values[start..n].iter().any(|&v| !(v > T::zero())) {
        return T::infinity();
    }
    let xs: Vec<T> = rs[start..n].iter().map(|r| r.ln()).collect();
    let ys: Vec<T> = values[start..n].iter().map(|v| v.ln()).collect();
    linear_fit(&xs, &ys).1
}

fn nondecaying<T: Real>(rs: &[T], values: &[T]) -> bool {
    trend_slope(rs, values) <= T::lit(TREND_SLOPE)
}

fn nongrowing<T: Real>(rs: &[T], values: &[T]) -> bool {
    trend_slope(rs, values) >= -T::lit(TREND_SLOPE)
}

/// `0.1`, shrunk to the largest radius below which `u_r` keeps one sign.
pub fn default_r0<T: Real>(profile: &RadialProfile<T>) -> T {
    let cap = T::lit(DEFAULT_R0);
    profile.monotonicity_radius(cap).unwrap_or(cap)
}

fn check_r0<T: Real>(profile: &RadialProfile<T>, r0: T) -> Result<()> {
    if !(r0 > profile.grid().r_min() * T::lit(4.0) && r0 <= T::one()) {
        return Err(invalid(format!("r0 = {r0} outside (4 r_min, 1]")));
    }
    Ok(())
}

/// Dyadic radii `r0 2^{-j}` with `r/2` still on the grid.
fn doubling_radii<T: Real>(profile: &RadialProfile<T>, r0: T) -> Result<Vec<T>> {
    let floor = profile.grid().r_min() * T::lit(2.0) * (T::one() - T::lit(1e-12));
    let rs: Vec<T> = dyadic::radii(profile, r0).into_iter().filter(|&r| r >= floor).collect();
    if rs.len() < TREND_WINDOW {
        return Err(LabError::InsufficientResolution(format!(
            "{} dyadic radii below r0 = {r0}, need {TREND_WINDOW}",
            rs.len()
        )));
    }
    Ok(rs)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct InverseSquareCheck<T: Real> {
    pub k_fit: T,
    pub pass: bool,
}

/// `Q(r) = ∫_{r/2}^r u_r^{-2} ds / r^{N + 2√(N-1) - 1}`; passes when `Q` shows no growth
/// towards the origin.
pub fn check_inverse_square_integral<T: Real>(profile: &RadialProfile<T>, r0: T) -> Result<InverseSquareCheck<T>> {
    check_r0(profile, r0)?;
    let guard = T::min_positive_value().sqrt();
    for (&r, &d) in profile.nodes().iter().zip(profile.u_r()) {
        if r <= r0 && !(d.abs() > guard) {
            return Err(LabError::DerivativeVanishes { r: r.as_f64() });
        }
    }
    let e = Constants::<T>::new(profile.dimension()).inverse_square_exponent;
    let rs = doubling_radii(profile, r0)?;
    let q = rs
        .iter()
        .map(|&r| Ok(profile.integrate(r * T::lit(0.5), r, |_, _, ur| T::one() / (ur * ur))? / r.powf(e)))
        .collect::<Result<Vec<T>>>()?;
    let k_fit = q.iter().copied().fold(T::zero(), T::max);
    Ok(InverseSquareCheck { k_fit, pass: k_fit.is_finite() && nongrowing(&rs, &q) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct DoublingGapCheck<T: Real> {
    pub m_prime_fit: T,
    pub pass: bool,
}

/// `G(r) = |u(r) - u(r/2)| r^{N/2 + √(N-1) - 2}`; passes when `min G > 0` and `G` does
/// not decay towards the origin.
pub fn check_doubling_gap<T: Real>(profile: &RadialProfile<T>, r0: T) -> Result<DoublingGapCheck<T>> {
    check_r0(profile, r0)?;
    let s = Constants::<T>::new(profile.dimension()).sharp_exponent;
    let rs = doubling_radii(profile, r0)?;
    let g: Vec<T> = rs
        .iter()
        .map(|&r| (profile.u_at(r) - profile.u_at(r * T::lit(0.5))).abs() * r.powf(-s))
        .collect();
    let m = g.iter().copied().fold(T::infinity(), T::min);
    Ok(DoublingGapCheck { m_prime_fit: m, pass: m > T::zero() && nondecaying(&rs, &g) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct PointwiseCheck<T: Real> {
    pub m_fit: T,
    pub r0_used: T,
    pub pass: bool,
}

/// `B(r) = |u|/|log r|` for `N = 2`, `|u| r^{N/2 + √(N-1) - 2}` otherwise, over
/// `(2 r_min, r0)` with the default `r0`.
pub fn check_pointwise_lower_bound<T: Real>(profile: &RadialProfile<T>) -> PointwiseCheck<T> {
    let r0 = default_r0(profile);
    let failed = PointwiseCheck { m_fit: T::zero(), r0_used: r0, pass: false };
    let rs = match doubling_radii(profile, r0) {
        Ok(rs) => rs,
        Err(_) => return failed,
    };
    let planar = profile.dimension() == 2;
    let s = Constants::<T>::new(profile.dimension()).sharp_exponent;
    let b: Vec<T> = rs
        .iter()
        .map(|&r| {
            let u = profile.u_at(r).abs();
            if planar {
                u / r.ln().abs()
            } else {
                u * r.powf(-s)
            }
        })
        .collect();
    let m = b.iter().copied().fold(T::infinity(), T::min);
    PointwiseCheck { m_fit: m, r0_used: r0, pass: m > T::zero() && nondecaying(&rs, &b) }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ChainReconstruction<T: Real> {
    pub m: usize,
    pub z: T,
    /// `Σ_{k<m} |u(z 2^{-k}) - u(z 2^{-k-1})|`.
    pub telescoped: T,
    /// `telescoped - |u(z)|`, a lower bound for `|u(r)|` when `u` is monotone on `[r, z]`.
    pub value: T,
    pub monotone: bool,
}

/// Writes `r = z/2^m` with `z ∈ [r0/2, r0)` and telescopes the doubling gaps.
pub fn dyadic_chain_reconstruct<T: Real>(profile: &RadialProfile<T>, r: T, r0: T) -> Result<ChainReconstruction<T>> {
    let half = T::lit(0.5);
    if !(r > T::zero() && r < r0 * half) {
        return Err(invalid(format!("need 0 < r < r0/2, got r = {r}, r0 = {r0}")));
    }
    if r < profile.grid().r_min() || r0 > T::one() {
        return Err(invalid(format!("[{r}, {r0}] leaves the grid span")));
    }
    let two = T::lit(2.0);
    let mut z = r;
    let mut m = 0;
    while z < r0 * half {
        z = z * two;
        m += 1;
    }
    let mut telescoped = T::zero();
    let mut hi = z;
    for _ in 0..m {
        let lo = hi * half;
        telescoped = telescoped + (profile.u_at(hi) - profile.u_at(lo)).abs();
        hi = lo;
    }
    let nodes = profile.nodes();
    let signs: Vec<T> = nodes
        .iter()
        .zip(profile.u_r())
        .filter(|(&x, _)| x >= r && x <= z)
        .map(|(_, &d)| d.signum())
        .collect();
    let monotone = signs.windows(2).all(|w| w[0] == w[1]);
    Ok(ChainReconstruction { m, z, telescoped, value: telescoped - profile.u_at(z).abs(), monotone })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct GradientCheck<T: Real> {
    /// `inf |u_r| r^{N/2 + √(N-1) - 1}` over `(2 r_min, r0)`; `N ≥ 3`.
    pub m1_fit: Option<T>,
    /// `sup |u_r| r^{N-1}` over the grid; `N ≥ 3`.
    pub m2_fit: Option<T>,
    /// Extrapolated `lim -r u_r`; `N = 2`.
    pub alpha_2d: Option<T>,
    pub pass: bool,
}

/// Two-sided gradient bounds for `N ≥ 3`, the limit of `-r u_r` for `N = 2`.
pub fn check_gradient_bounds<T: Real>(profile: &RadialProfile<T>) -> Result<GradientCheck<T>> {
    let cap = T::lit(DEFAULT_R0);
    let r0 = profile
        .monotonicity_radius(cap)
        .ok_or(LabError::MonotonicityViolation { r: profile.grid().r_min().as_f64() })?;
    let rs = doubling_radii(profile, r0).map_err(|e| if r0 < cap { LabError::MonotonicityViolation { r: r0.as_f64() } } else { e })?;
    let nodes = profile.nodes();
    if profile.dimension() == 2 {
        let seq: Vec<T> = rs.iter().map(|&r| -r * profile.u_r_at(r)).collect();
        let scale = seq.iter().map(|v| v.abs()).fold(T::zero(), T::max);
        let alpha = dyadic::extrapolate(&seq).finite();
        let pass = alpha.is_some_and(|a| a.is_finite() && a > T::lit(ALPHA_FLOOR) * scale);
        return Ok(GradientCheck { m1_fit: None, m2_fit: None, alpha_2d: alpha, pass });
    }
    let n = profile.dimension() as i32;
    let g = Constants::<T>::new(profile.dimension()).gradient_exponent;
    let lower: Vec<T> = rs.iter().map(|&r| profile.u_r_at(r).abs() * r.powf(-g)).collect();
    let upper: Vec<T> = rs.iter().map(|&r| profile.u_r_at(r).abs() * r.powi(n - 1)).collect();
    let m1 = lower.iter().copied().fold(T::infinity(), T::min);
    let m2 = nodes
        .iter()
        .zip(profile.u_r())
        .map(|(&r, &d)| d.abs() * r.powi(n - 1))
        .fold(T::zero(), T::max);
    let pass = m1 > T::zero() && m2.is_finite() && m2 > T::zero() && nondecaying(&rs, &lower) && nongrowing(&rs, &upper);
    Ok(GradientCheck { m1_fit: Some(m1), m2_fit: Some(m2), alpha_2d: None, pass })
}

/// Least-squares exponent `β` of `|u| ≈ C r^β` over dyadic radii in `(2 r_min, r0)`.
pub fn growth_exponent<T: Real>(profile: &RadialProfile<T>, r0: T) -> Option<T> {
    let rs = doubling_radii(profile, r0).ok()?;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &r in &rs {
        let u = profile.u_at(r).abs();
        if u > T::zero() {
            xs.push(r.ln());
            ys.push(u.ln());
        }
    }
    (xs.len() >= 2).then(|| linear_fit(&xs, &ys).1)
}

/// Least-squares coefficient `c` of `|u| ≈ c |log r| + d` over the same radii.
pub fn log_growth_coefficient<T: Real>(profile: &RadialProfile<T>, r0: T) -> Option<T> {
    let rs = doubling_radii(profile, r0).ok()?;
    let xs: Vec<T> = rs.iter().map(|r| r.ln().abs()).collect();
    let ys: Vec<T> = rs.iter().map(|&r| profile.u_at(r).abs()).collect();
    Some(linear_fit(&xs, &ys).1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hypotheses {
    pub semi_stable: bool,
    pub non_energy: bool,
    pub f_nonnegative: bool,
    pub monotone: bool,
}

impl Hypotheses {
    /// Semi-stable and non-energy: the setting of the lower bounds.
    pub fn lower_bounds_apply(&self) -> bool {
        self.semi_stable && self.non_energy
    }

    /// Additionally `f ≥ 0` and `u` decreasing near the origin: the gradient bounds.
    pub fn gradient_bounds_apply(&self) -> bool {
        self.lower_bounds_apply() && self.f_nonnegative && self.monotone
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct EstimateReport<T: Real> {
    pub energy: EnergyVerdict<T>,
    pub lemma24: Option<InverseSquareCheck<T>>,
    pub lemma25: Option<DoublingGapCheck<T>>,
    pub thm11: PointwiseCheck<T>,
    pub thm12: Option<GradientCheck<T>>,
    pub growth_exponent: Option<T>,
    pub log_coefficient: Option<T>,
    pub exponents_used: Constants<T>,
    pub hypotheses: Hypotheses,
    /// Checks that could not run, with the reason.
    pub skipped: Vec<(String, String)>,
}

impl<T: Real> EstimateReport<T> {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Every check that applies under the recorded hypotheses passed.
    pub fn consistent(&self) -> bool {
        if !self.hypotheses.lower_bounds_apply() {
            return true;
        }
        let lower = self.lemma24.is_some_and(|c| c.pass) && self.lemma25.is_some_and(|c| c.pass) && self.thm11.pass;
        let gradient = !self.hypotheses.gradient_bounds_apply() || self.thm12.is_some_and(|c| c.pass);
        lower && gradient
    }
}

fn keep<C>(name: &str, res: Result<C>, skipped: &mut Vec<(String, String)>) -> Option<C> {
    match res {
        Ok(c) => Some(c),
        Err(e) => {
            skipped.push((name.to_string(), e.to_string()));
            None
        }
    }
}

/// Runs every check; `semi_stable` is the stability verdict obtained separately.
pub fn estimate_report<T: Real>(profile: &RadialProfile<T>, nl: &Nonlinearity<T>, semi_stable: bool) -> Result<EstimateReport<T>> {
    let energy = energy_blocks(profile)?;
    let r0 = default_r0(profile);
    let mut skipped = Vec::new();
    let lemma24 = keep("lemma24", check_inverse_square_integral(profile, r0), &mut skipped);
    let lemma25 = keep("lemma25", check_doubling_gap(profile, r0), &mut skipped);
    let thm11 = check_pointwise_lower_bound(profile);
    let thm12 = keep("thm12", check_gradient_bounds(profile), &mut skipped);
    let (lo, hi) = profile
        .nodes()
        .iter()
        .zip(profile.u())
        .filter(|(&r, _)| r <= r0)
        .fold((T::infinity(), T::neg_infinity()), |(lo, hi), (_, &u)| (lo.min(u), hi.max(u)));
    let monotone = profile.nodes().iter().zip(profile.u_r()).filter(|(&r, _)| r < r0).all(|(_, &d)| d < T::zero());
    let hypotheses = Hypotheses {
        semi_stable,
        non_energy: energy.classification == EnergyClass::NonEnergy,
        f_nonnegative: nl.is_nonnegative_on(lo, hi),
        monotone,
    };
    Ok(EstimateReport {
        energy,
        lemma24,
        lemma25,
        thm11,
        thm12,
        growth_exponent: growth_exponent(profile, r0),
        log_coefficient: log_growth_coefficient(profile, r0),
        exponents_used: Constants::new(profile.dimension()),
        hypotheses,
        skipped,
    })
}
