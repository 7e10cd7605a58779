use serde::{Deserialize, Serialize};

use super::test_function::TestFunction;
use crate::error::{invalid, LabError, Result};
use crate::radial::{constants::sphere_measure, Nonlinearity, RadialProfile};
use crate::scalar::Real;

/// Endpoint tolerance for `eta·u_r`, relative to its maximum on the support.
pub const ADMISSIBILITY_TOL: f64 = 1e-6;
/// Nonnegativity tolerance, relative to the Dirichlet part of a form.
pub const FORM_TOL: f64 = 1e-8;

/// Reduced functional split into its total and its nonnegative Dirichlet part.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedForm<T> {
    pub value: T,
    pub dirichlet: T,
}

impl<T: Real> ReducedForm<T> {
    /// Value below `-FORM_TOL · dirichlet`.
    pub fn is_negative(&self) -> bool {
        self.value < -T::lit(FORM_TOL) * self.dirichlet
    }

    pub fn relative(&self) -> T {
        if self.dirichlet > T::zero() {
            self.value / self.dirichlet
        } else {
            self.value
        }
    }
}

fn check_support<T: Real>(profile: &RadialProfile<T>, eta: &TestFunction<T>) -> Result<()> {
    let (lo, hi) = eta.support();
    let slack = T::lit(1e-12);
    if lo < profile.grid().r_min() * (T::one() - slack) || hi > T::one() + slack {
        return Err(invalid(format!(
            "test function support [{lo}, {hi}] leaves (r_min, 1] = ({}, 1]",
            profile.grid().r_min()
        )));
    }
    Ok(())
}

fn weight<T: Real>(dimension: usize, r: T) -> T {
    r.powi(dimension as i32 - 1)
}

/// `ω_N ∫ r^{N-1}(v'^2 - f'(u) v^2) dr` over the support of `v`.
pub fn full_quadratic_form<T: Real>(profile: &RadialProfile<T>, nl: &Nonlinearity<T>, v: &TestFunction<T>) -> Result<T> {
    check_support(profile, v)?;
    let n = profile.dimension();
    let mut acc = T::zero();
    for piece in v.pieces() {
        let (lo, hi) = piece.span();
        acc = acc
            + profile.integrate(lo, hi, |r, u, _| {
                let (e, de) = piece.eval(r);
                weight(n, r) * (de * de - nl.df(u) * e * e)
            })?;
    }
    Ok(acc * sphere_measure::<T>(n))
}

/// Reduced functional without the endpoint check.
pub fn reduced_form_parts<T: Real>(profile: &RadialProfile<T>, eta: &TestFunction<T>) -> Result<ReducedForm<T>> {
    check_support(profile, eta)?;
    let n = profile.dimension();
    let nm1 = T::from_usize_lossy(n - 1);
    let mut value = T::zero();
    let mut dirichlet = T::zero();
    for piece in eta.pieces() {
        let (lo, hi) = piece.span();
        value = value
            + profile.integrate(lo, hi, |r, _, ur| {
                let (e, de) = piece.eval(r);
                weight(n, r) * ur * ur * (de * de - nm1 * e * e / (r * r))
            })?;
        dirichlet = dirichlet
            + profile.integrate(lo, hi, |r, _, ur| {
                let de = piece.eval(r).1;
                weight(n, r) * ur * ur * de * de
            })?;
    }
    Ok(ReducedForm { value, dirichlet })
}

/// Fails unless `eta·u_r` vanishes at both ends of the support.
pub fn check_admissible<T: Real>(profile: &RadialProfile<T>, eta: &TestFunction<T>) -> Result<()> {
    let (lo, hi) = eta.support();
    let mut peak = T::zero();
    for piece in eta.pieces() {
        let (a, b) = piece.span();
        let (_, ys) = profile.sample_range(a, b, |r, _, ur| (piece.eval(r).0 * ur).abs())?;
        peak = ys.into_iter().fold(peak, T::max);
    }
    let first = &eta.pieces()[0];
    let last = &eta.pieces()[eta.pieces().len() - 1];
    let left = (first.eval(lo).0 * profile.u_r_at(lo)).abs();
    let right = (last.eval(hi).0 * profile.u_r_at(hi)).abs();
    let tol = T::lit(ADMISSIBILITY_TOL) * peak;
    if left > tol || right > tol {
        return Err(LabError::InadmissibleTestFunction(format!(
            "{}: |eta u_r| = {:.3e} at r1, {:.3e} at r2, max {:.3e}",
            eta.label(),
            left.as_f64(),
            right.as_f64(),
            peak.as_f64()
        )));
    }
    Ok(())
}

/// `∫ r^{N-1} u_r^2 (eta'^2 - (N-1) eta^2 / r^2) dr` for an admissible `eta`.
pub fn reduced_quadratic_form<T: Real>(profile: &RadialProfile<T>, eta: &TestFunction<T>) -> Result<T> {
    Ok(reduced_form_checked(profile, eta)?.value)
}

pub fn reduced_form_checked<T: Real>(profile: &RadialProfile<T>, eta: &TestFunction<T>) -> Result<ReducedForm<T>> {
    check_support(profile, eta)?;
    check_admissible(profile, eta)?;
    reduced_form_parts(profile, eta)
}
