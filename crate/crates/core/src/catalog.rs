//! Closed-form solution families used as oracles: `u_α = r^α` with `f_α`, the singular
//! power solutions `r^{-2/(p-1)} - 1`, the singular exponential solution `-2 log r`, the
//! planar Liouville branch and the harmonic `-log r` in the plane.
//!
//! Expected outcomes are stored data. For the power family the energy threshold comes
//! from `∫ r^{N-1} u_r² dr = (2/(p-1))² ∫ r^{N-3-4/(p-1)} dr`, finite at the origin iff
//! `N - 2 - 4/(p-1) > 0`, so the profile is non-energy iff `2/(p-1) ≥ (N-2)/2`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::radial::{Constants, Grid, Nonlinearity, RadialProfile};
use crate::scalar::Real;
use crate::stability::StabilityVerdict;
use crate::weak::WeakVerdict;

/// Exponents within this distance of a threshold count as on it.
const THRESHOLD_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Expected {
    pub stability: StabilityVerdict,
    pub non_energy: bool,
    pub weak: WeakVerdict,
}

impl Expected {
    /// A non-energy profile cannot be a bounded classical solution.
    pub fn is_consistent(&self) -> bool {
        !(self.non_energy && self.weak == WeakVerdict::RegularWeak)
    }
}

/// Growth law of `|u|` at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "law")]
pub enum Growth<T> {
    /// `|u| ~ c r^exponent`
    Power { exponent: T },
    /// `|u| ~ coefficient |log r|`
    Logarithmic { coefficient: T },
    Bounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CatalogEntry<T: Real> {
    pub id: String,
    pub description: String,
    pub profile: RadialProfile<T>,
    pub nl: Nonlinearity<T>,
    pub lambda: Option<T>,
    /// Closed-form `u''` on the grid nodes.
    pub u_rr: Vec<T>,
    pub growth: Growth<T>,
    pub expected: Expected,
}

impl<T: Real> CatalogEntry<T> {
    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    /// Largest `|-u'' - (N-1)u'/r - f(u)|` relative to the size of its terms, using the
    /// closed-form second derivative.
    pub fn closed_form_residual(&self) -> T {
        let nm1 = T::from_usize_lossy(self.profile.dimension() - 1);
        let p = &self.profile;
        p.nodes()
            .iter()
            .zip(p.u())
            .zip(p.u_r())
            .zip(&self.u_rr)
            .map(|(((&r, &u), &ur), &urr)| {
                let drift = nm1 * ur / r;
                let f = self.nl.f(u);
                let scale = urr.abs() + drift.abs() + f.abs();
                let res = (-urr - drift - f).abs();
                if scale > T::zero() {
                    res / scale
                } else {
                    res
                }
            })
            .fold(T::zero(), T::max)
    }

    pub fn family(&self) -> &str {
        self.id.split(':').next().unwrap_or(&self.id)
    }
}

fn entry<T, U, D, DD>(
    id: String,
    description: String,
    dimension: usize,
    grid: &Grid<T>,
    (u, du, ddu): (U, D, DD),
    nl: Nonlinearity<T>,
    lambda: Option<T>,
    growth: Growth<T>,
    expected: Expected,
) -> Result<CatalogEntry<T>>
where
    T: Real,
    U: Fn(T) -> T,
    D: Fn(T) -> T,
    DD: Fn(T) -> T,
{
    let profile = RadialProfile::closed_form(dimension, grid.clone(), u, du)?;
    let u_rr = grid.nodes().iter().map(|&r| ddu(r)).collect();
    Ok(CatalogEntry { id, description, profile, nl, lambda, u_rr, growth, expected })
}

fn verdict(stable: bool) -> StabilityVerdict {
    if stable {
        StabilityVerdict::SemiStable
    } else {
        StabilityVerdict::Unstable
    }
}

/// `2 - N/2 - √(N-1)`, the largest semi-stable exponent of the alpha family for `N ≥ 3`.
pub fn alpha_threshold(dimension: usize) -> f64 {
    let n = dimension as f64;
    2.0 - n / 2.0 - (n - 1.0).sqrt()
}

/// `(N + 2√(N-1)) / (N + 2√(N-1) - 4)`, the end of the first semi-stable range of the
/// power exponent.
pub fn power_threshold(dimension: usize) -> f64 {
    let s = dimension as f64 + 2.0 * (dimension as f64 - 1.0).sqrt();
    s / (s - 4.0)
}

/// `(N - 2√(N-1)) / (N - 2√(N-1) - 4)` for `N ≥ 11`: from here on `λp` falls back below
/// `(N-2)²/4` and the power solutions are semi-stable again.
pub fn power_upper_threshold(dimension: usize) -> Option<f64> {
    let s = dimension as f64 - 2.0 * (dimension as f64 - 1.0).sqrt();
    (s > 4.0).then(|| s / (s - 4.0))
}

/// `λp ≤ (N-2)²/4`, which for this family is exactly the Hardy criterion.
fn power_semi_stable(dimension: usize, p: f64) -> bool {
    dimension >= 3
        && (p <= power_threshold(dimension) + THRESHOLD_SLACK
            || power_upper_threshold(dimension).is_some_and(|q| p >= q - THRESHOLD_SLACK))
}

/// `λ = 2(Np - 2p - N)/(p-1)²` of the singular power solution.
pub fn power_lambda<T: Real>(dimension: usize, p: T) -> T {
    let n = T::from_usize_lossy(dimension);
    let two = T::lit(2.0);
    two * (n * p - two * p - n) / ((p - T::one()) * (p - T::one()))
}

/// `u = r^α`, `f = f_α`.
pub fn make_alpha_family<T: Real>(dimension: usize, alpha: T, grid: &Grid<T>) -> Result<CatalogEntry<T>> {
    let nl = Nonlinearity::alpha_family(alpha, dimension)?;
    let a = alpha.as_f64();
    let stable = dimension == 2 || a <= alpha_threshold(dimension) + THRESHOLD_SLACK;
    let non_energy = a <= (2.0 - dimension as f64) / 2.0 + THRESHOLD_SLACK;
    let expected = Expected { stability: verdict(stable), non_energy, weak: WeakVerdict::NotWeak };
    let am1 = alpha - T::one();
    entry(
        format!("alpha:N={dimension},a={a}"),
        format!("u = r^{a}, f = f_alpha"),
        dimension,
        grid,
        (move |r: T| r.powf(alpha), move |r: T| alpha * r.powf(am1), move |r: T| alpha * am1 * r.powf(am1 - T::one())),
        nl,
        None,
        Growth::Power { exponent: alpha },
        expected,
    )
}

/// `u = r^{-2/(p-1)} - 1` with `f = λ(1+u)^p` for any `N ≥ 2`, `p > 1`; no expectations
/// are attached beyond the closed-form ones.
pub fn power_family<T: Real>(dimension: usize, p: T, grid: &Grid<T>) -> Result<CatalogEntry<T>> {
    if !(p > T::one()) || dimension < 2 {
        return Err(invalid(format!("power family needs p > 1 and N >= 2, got p = {p}, N = {dimension}")));
    }
    let pf = p.as_f64();
    let n = dimension as f64;
    let e = -T::lit(2.0) / (p - T::one());
    let lambda = power_lambda(dimension, p);
    let weak = dimension >= 3 && pf > n / (n - 2.0);
    let non_energy = 2.0 / (pf - 1.0) >= (n - 2.0) / 2.0 - THRESHOLD_SLACK;
    let stable = power_semi_stable(dimension, pf);
    let expected = Expected {
        stability: verdict(stable),
        non_energy,
        weak: if weak { WeakVerdict::SingularWeak } else { WeakVerdict::NotWeak },
    };
    let em1 = e - T::one();
    entry(
        format!("bv:N={dimension},p={pf}"),
        format!("u = r^(-2/(p-1)) - 1, f = lambda (1+u)^p, p = {pf}"),
        dimension,
        grid,
        (move |r: T| r.powf(e) - T::one(), move |r: T| e * r.powf(em1), move |r: T| e * em1 * r.powf(em1 - T::one())),
        Nonlinearity::Power { p, lambda },
        Some(lambda),
        Growth::Power { exponent: e },
        expected,
    )
}

/// Singular power solution in its weak range `N ≥ 3`, `p > N/(N-2)`.
pub fn make_bv_power<T: Real>(dimension: usize, p: T, grid: &Grid<T>) -> Result<CatalogEntry<T>> {
    let n = dimension as f64;
    if dimension < 3 || !(p.as_f64() > n / (n - 2.0)) {
        return Err(invalid(format!("singular power solution needs N >= 3 and p > N/(N-2), got N = {dimension}, p = {p}")));
    }
    power_family(dimension, p, grid)
}

/// `u = -2 log r` with `f = 2(N-2) e^u`.
pub fn make_exponential_singular<T: Real>(dimension: usize, grid: &Grid<T>) -> Result<CatalogEntry<T>> {
    if dimension < 3 {
        return Err(invalid(format!("exponential singular solution needs N >= 3, got {dimension}")));
    }
    let lambda = T::lit(2.0 * (dimension as f64 - 2.0));
    let two = T::lit(2.0);
    let expected = Expected {
        stability: verdict(dimension >= 10),
        non_energy: false,
        weak: WeakVerdict::SingularWeak,
    };
    entry(
        format!("exp:N={dimension}"),
        format!("u = -2 log r, f = {} e^u", lambda.as_f64()),
        dimension,
        grid,
        (move |r: T| -two * r.ln(), move |r: T| -two / r, move |r: T| two / (r * r)),
        Nonlinearity::Exponential { lambda },
        Some(lambda),
        Growth::Logarithmic { coefficient: two },
        expected,
    )
}

/// `u = -log r` in the plane with `f ≡ 0`.
pub fn make_log_2d<T: Real>(grid: &Grid<T>) -> Result<CatalogEntry<T>> {
    let expected = Expected { stability: StabilityVerdict::SemiStable, non_energy: true, weak: WeakVerdict::NotWeak };
    entry(
        "log2d".into(),
        "u = -log r, N = 2, f = 0".into(),
        2,
        grid,
        (|r: T| -r.ln(), |r: T| -T::one() / r, |r: T| T::one() / (r * r)),
        Nonlinearity::Zero,
        None,
        Growth::Logarithmic { coefficient: T::one() },
        expected,
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct LiouvilleBranch<T: Real> {
    pub lambda: T,
    pub m: T,
    pub profile: RadialProfile<T>,
}

fn liouville_parts<T: Real>(b: T) -> Result<(T, T)> {
    if !(b >= T::zero()) {
        return Err(invalid(format!("Liouville parameter must be nonnegative, got {b}")));
    }
    let one = T::one();
    Ok((T::lit(8.0) * b / ((one + b) * (one + b)), T::lit(2.0) * b.ln_1p()))
}

/// `u = 2 log(1+b) - 2 log(1+b r²)` solving `-Δu = λ e^u` in the unit disk with
/// `λ = 8b/(1+b)²`.
pub fn liouville_disk_branch<T: Real>(b: T, grid: &Grid<T>) -> Result<LiouvilleBranch<T>> {
    let (lambda, m) = liouville_parts(b)?;
    Ok(LiouvilleBranch { lambda, m, profile: liouville_entry(b, grid)?.profile })
}

pub fn liouville_entry<T: Real>(b: T, grid: &Grid<T>) -> Result<CatalogEntry<T>> {
    let (lambda, m) = liouville_parts(b)?;
    let one = T::one();
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    let expected = Expected {
        stability: verdict(b <= one),
        non_energy: false,
        weak: WeakVerdict::RegularWeak,
    };
    entry(
        format!("liouville:b={}", b.as_f64()),
        format!("u = 2 log(1+b) - 2 log(1+b r^2), lambda = {}, m = {}", lambda.as_f64(), m.as_f64()),
        2,
        grid,
        (
            move |r: T| m - two * (b * r * r).ln_1p(),
            move |r: T| -four * b * r / (one + b * r * r),
            move |r: T| {
                let q = one + b * r * r;
                -four * b * (one - b * r * r) / (q * q)
            },
        ),
        Nonlinearity::Exponential { lambda },
        Some(lambda),
        Growth::Bounded,
        expected,
    )
}

/// The standard corpus on `grid`, in a fixed order.
pub fn standard_catalog<T: Real>(grid: &Grid<T>) -> Result<Vec<CatalogEntry<T>>> {
    let mut out = Vec::new();
    for a in [-0.1, -1.0, -3.0] {
        out.push(make_alpha_family(2, T::lit(a), grid)?);
    }
    out.push(make_alpha_family(3, T::lit(alpha_threshold(3)), grid)?.with_id("alpha:N=3,a=sharp"));
    for a in [-2.0, -0.5] {
        out.push(make_alpha_family(3, T::lit(a), grid)?);
    }
    for a in [-2.5, -4.0] {
        out.push(make_alpha_family(5, T::lit(a), grid)?);
    }
    for a in [-6.0, -8.0, -3.0, -5.8] {
        out.push(make_alpha_family(10, T::lit(a), grid)?);
    }
    out.push(make_bv_power(10, T::lit(4.0) / T::lit(3.0), grid)?.with_id("bv:N=10,p=4/3"));
    out.push(make_bv_power(10, T::lit(1.3), grid)?);
    out.push(make_bv_power(12, T::lit(1.25), grid)?);
    out.push(make_bv_power(3, T::lit(4.0), grid)?);
    out.push(make_bv_power(5, T::lit(2.0), grid)?);
    out.push(make_bv_power(4, T::lit(3.0), grid)?);
    for n in [3, 9, 10, 12] {
        out.push(make_exponential_singular(n, grid)?);
    }
    out.push(make_log_2d(grid)?);
    out.push(liouville_entry(T::one() / T::lit(3.0), grid)?.with_id("liouville:b=1/3"));
    out.push(liouville_entry(T::lit(3.0), grid)?);
    Ok(out)
}

/// Looks an entry up by id in [`standard_catalog`].
pub fn find<T: Real>(id: &str, grid: &Grid<T>) -> Result<CatalogEntry<T>> {
    standard_catalog(grid)?
        .into_iter()
        .find(|e| e.id == id)
        .ok_or_else(|| invalid(format!("unknown catalog id {id:?}")))
}

/// Hardy constant and the exponents for the entry's dimension.
pub fn constants_for<T: Real>(entry: &CatalogEntry<T>) -> Constants<T> {
    Constants::new(entry.profile.dimension())
}
