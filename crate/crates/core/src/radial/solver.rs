//! Radial ODE `u'' + ((N-1)/r) u' + f(u) = 0` integrated in the variable `τ = log r`.
//!
//! With `p = r u_r` the system reads `u_τ = p`, `p_τ = -(N-2) p - r² f(u)`, which removes
//! the `1/r` coefficient and keeps step sizes uniform across decades of radius.

use crate::error::{invalid, LabError, Result};
use crate::scalar::Real;

use super::grid::Grid;
use super::nonlinearity::Nonlinearity;
use super::ode::{self, Control, DenseSolution, Tolerances};
use super::profile::{Provenance, RadialProfile};

/// Right-hand side of the `(u, r u_r)` system in `τ = log r`.
pub fn radial_rhs<T: Real>(nl: &Nonlinearity<T>, dimension: usize) -> impl Fn(T, &[T; 2]) -> [T; 2] + '_ {
    let nm2 = T::from_usize_lossy(dimension) - T::lit(2.0);
    move |tau, y| [y[1], -nm2 * y[1] - nl.scaled_source(tau, y[0])]
}

/// Integrates the radial system between two values of `log r` with overflow guards.
pub fn integrate_log_radius<T: Real>(
    nl: &Nonlinearity<T>,
    dimension: usize,
    tau0: T,
    y0: [T; 2],
    tau1: T,
    tol: Tolerances<T>,
    mut stop: impl FnMut(T, &[T; 2]) -> bool,
) -> Result<DenseSolution<T, 2>> {
    let guard = T::overflow_guard();
    let rhs = radial_rhs(nl, dimension);
    let mut last = (tau0, y0);
    // p = r u_r vanishes like r² at a regular center; tighten its absolute tolerance there
    let weight = |tau: T| [T::one(), (tau + tau).exp().min(T::one())];
    let run = ode::integrate_weighted_atol(rhs, tau0, y0, tau1, tol, weight, |tau, y| {
        last = (tau, *y);
        let r = tau.exp();
        let ur = y[1] / r;
        let src = nl.scaled_source(tau, y[0]);
        let bad = |x: T| !x.is_finite() || x.abs() > guard;
        if bad(y[0]) || bad(ur) || bad(src) {
            return Err(LabError::BlowUpDetected { r: r.as_f64() });
        }
        Ok(if stop(tau, y) { Control::Stop } else { Control::Continue })
    });
    match run {
        Err(LabError::StiffnessFailure { .. }) => {
            let (tau, y) = last;
            let r = tau.exp();
            // a collapsing step next to a growing state is a blow-up, not stiffness
            let start = T::one() + y0[0].abs() + y0[1].abs() + nl.scaled_source(tau0, y0[0]).abs();
            let big = T::lit(1e8) * start;
            if y[0].abs() > big || y[1].abs() > big || nl.scaled_source(tau, y[0]).abs() > big {
                Err(LabError::BlowUpDetected { r: r.as_f64() })
            } else {
                Err(LabError::StiffnessFailure { r: r.as_f64() })
            }
        }
        other => other,
    }
}

fn sample_profile<T: Real>(
    sol: &DenseSolution<T, 2>,
    grid: Grid<T>,
    dimension: usize,
    below_start: impl Fn(T) -> [T; 2],
) -> Result<RadialProfile<T>> {
    let lo = sol.t_start().min(sol.t_end());
    let mut u = Vec::with_capacity(grid.len());
    let mut ur = Vec::with_capacity(grid.len());
    for &r in grid.nodes() {
        let tau = r.ln();
        let y = if tau < lo { below_start(r) } else { sol.eval(tau) };
        u.push(y[0]);
        ur.push(y[1] / r);
    }
    RadialProfile::new(dimension, grid, u, ur, Provenance::Integrated)
}

/// Center series `u = m - f(m) r²/(2N)`, returned as `(u, r u_r)`.
pub fn center_series<T: Real>(nl: &Nonlinearity<T>, m: T, dimension: usize, r: T) -> [T; 2] {
    let n = T::from_usize_lossy(dimension);
    let two = T::lit(2.0);
    let q = nl.scaled_source(r.ln(), m); // r² f(m)
    [m - q / (two * n), -q / n]
}

/// Solves the regular initial value problem `u(0) = m`, `u'(0) = 0` out to `r = 1`.
///
/// The origin is never evaluated: the run starts at the first grid node from the
/// two-term center series.
pub fn integrate_regular_ivp<T: Real>(
    nl: &Nonlinearity<T>,
    m: T,
    dimension: usize,
    grid: &Grid<T>,
) -> Result<RadialProfile<T>> {
    integrate_regular_ivp_with(nl, m, dimension, grid, Tolerances::default())
}

pub fn integrate_regular_ivp_with<T: Real>(
    nl: &Nonlinearity<T>,
    m: T,
    dimension: usize,
    grid: &Grid<T>,
    tol: Tolerances<T>,
) -> Result<RadialProfile<T>> {
    if !m.is_finite() {
        return Err(invalid("center value must be finite"));
    }
    if dimension < 2 {
        return Err(invalid("dimension must be at least 2"));
    }
    let r0 = grid.r_min();
    let y0 = center_series(nl, m, dimension, r0);
    let sol = integrate_log_radius(nl, dimension, r0.ln(), y0, T::zero(), tol, |_, _| false)?;
    sample_profile(&sol, grid.clone(), dimension, |r| center_series(nl, m, dimension, r))
}

/// Solves from `r = 1` with `u(1) = u1`, `u_r(1) = ur1` inward to the first grid node.
pub fn integrate_inward<T: Real>(
    nl: &Nonlinearity<T>,
    u1: T,
    ur1: T,
    dimension: usize,
    grid: &Grid<T>,
) -> Result<RadialProfile<T>> {
    integrate_inward_with(nl, u1, ur1, dimension, grid, Tolerances::default())
}

pub fn integrate_inward_with<T: Real>(
    nl: &Nonlinearity<T>,
    u1: T,
    ur1: T,
    dimension: usize,
    grid: &Grid<T>,
    tol: Tolerances<T>,
) -> Result<RadialProfile<T>> {
    if dimension < 2 {
        return Err(invalid("dimension must be at least 2"));
    }
    let tau_min = grid.r_min().ln();
    let sol = integrate_log_radius(nl, dimension, T::zero(), [u1, ur1], tau_min, tol, |_, _| false)?;
    sample_profile(&sol, grid.clone(), dimension, |_| sol.y_end())
}
