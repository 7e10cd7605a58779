//! Minimal branch of `-Δu = λ g(u)` in the unit ball, `u = 0` on the boundary.
//!
//! Each branch point comes from one shot: `w'' + ((N-1)/s) w' + g(w) = 0`, `w(0) = m`,
//! integrated out to its first zero `R`; then `u(r) = w(Rr)` solves the problem with
//! `λ = R²`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, LabError, Result};
use crate::radial::ode::Tolerances;
use crate::radial::solver::{center_series, integrate_log_radius};
use crate::radial::{Grid, Nonlinearity, Provenance, RadialProfile};
use crate::scalar::Real;
use crate::stability::eigen::{principal_eigenvalue_with, InnerBoundary};

/// Largest `s` searched for the first zero.
pub const SEARCH_HORIZON: f64 = 1e6;
/// Relative accuracy of the zero in `log s`.
pub const ZERO_TOL: f64 = 1e-12;
/// Relative change in `λ` below which consecutive branch points count as level.
pub const LEVEL_TOL: f64 = 1e-8;
/// Required excess of `liminf u g'(u)/g(u)` over 1.
pub const BV_MARGIN: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct Shot<T> {
    /// First zero of `w`.
    pub r_zero: T,
    /// `R²`.
    pub lambda: T,
    /// `w(R r)` on the unit ball.
    pub profile: RadialProfile<T>,
}

/// Shoots from the center value `m` to the first zero and rescales onto `grid`.
pub fn shoot_first_zero<T: Real>(g: &Nonlinearity<T>, m: T, dimension: usize, grid: &Grid<T>) -> Result<Shot<T>> {
    if !(m >= T::zero()) || !m.is_finite() {
        return Err(invalid(format!("center value must be finite and nonnegative, got {m}")));
    }
    if dimension < 2 {
        return Err(invalid("dimension must be at least 2"));
    }
    if !(g.f(m) > T::zero()) || !(g.f(T::zero()) > T::zero()) {
        return Err(LabError::InvalidNonlinearity(format!("g must be positive on [0, {m}]")));
    }
    // start where the center series is exact to ~1e-12: s² g(m) = 1e-12
    let tau0 = (T::lit(1e-12).ln() - log_source(g, m)) / T::lit(2.0);
    let tau_end = T::lit(SEARCH_HORIZON).ln();
    if !(tau0 < tau_end) {
        return Err(invalid(format!("source {} too weak to shoot from m = {m}", g.descriptor())));
    }
    let y0 = center_series(g, m, dimension, tau0.exp());
    let mut prev = tau0;
    let mut bracket = None;
    let mut nonpositive = None;
    let sol = integrate_log_radius(g, dimension, tau0, y0, tau_end, Tolerances::default(), |tau, y| {
        if y[0] <= T::zero() {
            bracket = Some((prev, tau));
            return true;
        }
        if !(g.scaled_source(tau, y[0]) > T::zero()) {
            nonpositive = Some(y[0]);
            return true;
        }
        prev = tau;
        false
    })?;
    if let Some(w) = nonpositive {
        return Err(LabError::InvalidNonlinearity(format!("g({w}) <= 0 along the shot")));
    }
    let (mut lo, mut hi) = bracket.ok_or(LabError::NoZeroFound { horizon: SEARCH_HORIZON })?;
    while hi - lo > T::lit(ZERO_TOL) * (T::one() + hi.abs()) {
        let mid = (lo + hi) * T::lit(0.5);
        if sol.eval(mid)[0] > T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let tau_zero = (lo + hi) * T::lit(0.5);
    let r_zero = tau_zero.exp();
    let mut u = Vec::with_capacity(grid.len());
    let mut ur = Vec::with_capacity(grid.len());
    // r u_r = s w'(s) is scale invariant
    for &r in grid.nodes() {
        let tau = tau_zero + r.ln();
        let y = if tau < tau0 { center_series(g, m, dimension, r_zero * r) } else { sol.eval(tau) };
        u.push(y[0]);
        ur.push(y[1] / r);
    }
    let profile = RadialProfile::new(dimension, grid.clone(), u, ur, Provenance::Integrated)?;
    Ok(Shot { r_zero, lambda: r_zero * r_zero, profile })
}

/// `log g(m)` without forming `g(m)`, which overflows for exponential sources.
fn log_source<T: Real>(g: &Nonlinearity<T>, m: T) -> T {
    match g {
        Nonlinearity::Exponential { lambda } => lambda.ln() + m,
        Nonlinearity::Power { p, lambda } => lambda.ln() + *p * (T::one() + m).ln(),
        _ => g.f(m).ln(),
    }
}

/// Principal eigenvalue of `-Δ - λ g'(u)` on the ball, with a natural condition at the
/// first grid node standing in for the regular center.
pub fn branch_eigenvalue<T: Real>(g: &Nonlinearity<T>, shot: &Shot<T>) -> Result<T> {
    let lambda = shot.lambda;
    principal_eigenvalue_with(&shot.profile, shot.profile.grid().r_min(), InnerBoundary::Natural, |_, u| lambda * g.df(u))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct BranchPoint<T: Real> {
    pub m: T,
    #[serde(rename = "R")]
    pub r_zero: T,
    pub lambda: T,
    pub sup_norm: T,
    pub lambda1: T,
    /// The grid reaches the flat center: `|u(r_min) - m| ≤ 1e-3 (1 + m)`. Otherwise the
    /// core lies below `r_min` and `lambda1` only sees the outer part of the solution.
    pub resolved: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct BifurcationDiagram<T: Real> {
    pub points: Vec<BranchPoint<T>>,
    pub lambda_star_estimate: T,
    pub g_descriptor: String,
    pub dimension: usize,
    /// `(m, error)` for shots that failed.
    pub failed: Vec<(T, String)>,
    /// Sup-distance on `[0.1, 1]` between the largest-m profile and the singular solution.
    pub extremal_distance: Option<T>,
}

impl<T: Real> BifurcationDiagram<T> {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("diagram serializes")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("m,R,lambda,lambda1\n");
        for p in &self.points {
            out.push_str(&format!("{:e},{:e},{:e},{:e}\n", p.m, p.r_zero, p.lambda, p.lambda1));
        }
        out
    }
}

/// Geometric center values from `lo` to `hi`.
pub fn geometric_grid<T: Real>(lo: T, hi: T, count: usize) -> Result<Vec<T>> {
    if !(lo > T::zero() && hi > lo) || count < 2 {
        return Err(invalid(format!("need 0 < lo < hi and at least 2 points, got [{lo}, {hi}] x {count}")));
    }
    let step = (hi / lo).ln() / T::from_usize_lossy(count - 1);
    Ok((0..count).map(|i| lo * (step * T::from_usize_lossy(i)).exp()).collect())
}

/// `10^-2 .. 10^3`, 200 points.
pub fn default_m_grid<T: Real>() -> Vec<T> {
    geometric_grid(T::lit(1e-2), T::lit(1e3), 200).expect("default range is valid")
}

/// Closed-form singular solution of the family `g` belongs to, if any.
pub fn singular_candidate<T: Real>(g: &Nonlinearity<T>, dimension: usize) -> Option<Box<dyn Fn(T) -> T>> {
    match g {
        Nonlinearity::Exponential { .. } if dimension >= 3 => Some(Box::new(|r: T| -T::lit(2.0) * r.ln())),
        Nonlinearity::Power { p, .. } if dimension >= 3 && *p > T::one() => {
            let e = -T::lit(2.0) / (*p - T::one());
            Some(Box::new(move |r: T| r.powf(e) - T::one()))
        }
        _ => None,
    }
}

fn distance_to<T: Real>(profile: &RadialProfile<T>, target: &dyn Fn(T) -> T) -> T {
    profile
        .nodes()
        .iter()
        .zip(profile.u())
        .filter(|(&r, _)| r >= T::lit(0.1))
        .map(|(&r, &u)| (u - target(r)).abs())
        .fold(T::zero(), T::max)
}

/// One shot per center value, in parallel; failed shots are listed, not fatal.
pub fn minimal_branch<T: Real>(g: &Nonlinearity<T>, dimension: usize, m_grid: &[T], grid: &Grid<T>) -> Result<BifurcationDiagram<T>> {
    if m_grid.is_empty() || m_grid.windows(2).any(|w| !(w[0] < w[1])) || !(m_grid[0] > T::zero()) {
        return Err(invalid("m grid must be positive and strictly increasing"));
    }
    let shots: Vec<(T, Result<(BranchPoint<T>, Shot<T>)>)> = m_grid
        .par_iter()
        .map(|&m| {
            let run = || {
                let shot = shoot_first_zero(g, m, dimension, grid)?;
                let lambda1 = branch_eigenvalue(g, &shot)?;
                let resolved = (shot.profile.u()[0] - m).abs() <= T::lit(1e-3) * (T::one() + m);
                let point = BranchPoint { m, r_zero: shot.r_zero, lambda: shot.lambda, sup_norm: m, lambda1, resolved };
                Ok((point, shot))
            };
            (m, run())
        })
        .collect();
    let mut points = Vec::new();
    let mut failed = Vec::new();
    let mut extremal_distance = None;
    let candidate = singular_candidate(g, dimension);
    for (m, res) in shots {
        match res {
            Ok((p, shot)) => {
                extremal_distance = candidate.as_ref().map(|c| distance_to(&shot.profile, c.as_ref()));
                points.push(p);
            }
            Err(e) => failed.push((m, e.to_string())),
        }
    }
    let lambda_star_estimate = points.iter().map(|p| p.lambda).fold(T::neg_infinity(), T::max);
    Ok(BifurcationDiagram {
        points,
        lambda_star_estimate,
        g_descriptor: g.descriptor(),
        dimension,
        failed,
        extremal_distance,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct LambdaStar<T: Real> {
    pub estimate: T,
    pub maximizer_m: T,
    /// `λ(m)` nondecreasing over the sweep: the estimate is only a lower bound.
    pub monotone: bool,
    /// `λ(m)` turns down after its maximum.
    pub fold: bool,
    /// Drop from the maximum to its lower neighbor: the sampled peak may be low by this much.
    pub resolution: T,
}

pub fn lambda_star<T: Real>(diagram: &BifurcationDiagram<T>) -> Result<LambdaStar<T>> {
    let pts = &diagram.points;
    if pts.is_empty() {
        return Err(invalid("empty bifurcation diagram"));
    }
    let (imax, best) = pts
        .iter()
        .enumerate()
        .fold((0, pts[0]), |acc, (i, p)| if p.lambda > acc.1.lambda { (i, *p) } else { acc });
    let tol = T::lit(LEVEL_TOL) * best.lambda.abs();
    let monotone = pts.windows(2).all(|w| w[1].lambda >= w[0].lambda - tol);
    let neighbors = [imax.checked_sub(1), Some(imax + 1).filter(|&j| j < pts.len())];
    let resolution = neighbors
        .iter()
        .flatten()
        .map(|&j| best.lambda - pts[j].lambda)
        .fold(T::infinity(), T::min);
    Ok(LambdaStar {
        estimate: best.lambda,
        maximizer_m: best.m,
        monotone,
        fold: pts[imax..].iter().any(|p| p.lambda < best.lambda - tol),
        resolution: if resolution.is_finite() { resolution } else { T::zero() },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct EnergyCondition<T: Real> {
    pub liminf_estimate: T,
    pub satisfied: bool,
}

/// Tail minimum of `u g'(u)/g(u)` over the last quarter of `probe`.
pub fn bv_energy_condition<T: Real>(g: &Nonlinearity<T>, probe: &[T]) -> Result<EnergyCondition<T>> {
    if probe.len() < 2 || probe.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(invalid("probe grid must be strictly increasing with at least 2 points"));
    }
    let mut ratios = Vec::with_capacity(probe.len());
    for &u in probe {
        let f = g.f(u);
        if f == T::zero() || f.is_nan() {
            return Err(LabError::InvalidNonlinearity(format!("g vanishes or overflows at u = {u}")));
        }
        ratios.push(u * g.log_derivative(u));
    }
    let start = probe.len() - (probe.len() / 4).max(1);
    let liminf = ratios[start..].iter().copied().fold(T::infinity(), T::min);
    Ok(EnergyCondition { liminf_estimate: liminf, satisfied: liminf > T::one() + T::lit(BV_MARGIN) })
}
