//! Semi-stability diagnostics: the quadratic form and its one-dimensional reduction,
//! test-function builders, the Hardy criterion, annulus eigenvalues and the zero count
//! of `u_r`.
//!
//! Only radial test functions are ever used; reports say so in `test_functions`.

pub mod eigen;
pub mod forms;
pub mod test_function;

use serde::{Deserialize, Serialize};

pub use eigen::{
    critical_coupling, eigen_sweep, extrapolated_critical_coupling, principal_eigenvalue, principal_eigenvalue_with,
    sweep_trend, CouplingFit, InnerBoundary, Pencil, SweepTrend,
};
pub use forms::{full_quadratic_form, reduced_form_checked, reduced_form_parts, reduced_quadratic_form, ReducedForm};
pub use test_function::{Piece, TestFunction, TestFunctionKind};

use crate::error::Result;
use crate::radial::{Constants, Nonlinearity, RadialProfile};
use crate::scalar::Real;

/// Slack on the Hardy comparison, relative to `1 + (N-2)²/4`.
pub const HARDY_TOL: f64 = 1e-9;
/// First inner radius of the eigenvalue sweep.
pub const SWEEP_R0: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StabilityVerdict {
    SemiStable,
    Unstable,
    Inconclusive,
}

impl StabilityVerdict {
    pub fn as_str(self) -> &'static str {
        match self {
            StabilityVerdict::SemiStable => "semi-stable",
            StabilityVerdict::Unstable => "unstable",
            StabilityVerdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct HardyCheck<T: Real> {
    /// `sup r² f'(u(r))` over the grid.
    pub sup: T,
    pub constant: T,
    pub verdict: StabilityVerdict,
}

impl<T: Real> HardyCheck<T> {
    pub fn passes(&self) -> bool {
        self.verdict == StabilityVerdict::SemiStable
    }
}

/// Semi-stable when `sup r² f'(u) ≤ (N-2)²/4`; inconclusive otherwise, since the
/// criterion is only sufficient.
pub fn hardy_criterion<T: Real>(profile: &RadialProfile<T>, nl: &Nonlinearity<T>) -> HardyCheck<T> {
    let constant = Constants::<T>::new(profile.dimension()).hardy_constant;
    let sup = profile
        .nodes()
        .iter()
        .zip(profile.u())
        .map(|(&r, &u)| r * r * nl.df(u))
        .fold(T::neg_infinity(), T::max);
    let verdict = if sup <= constant + T::lit(HARDY_TOL) * (T::one() + constant) {
        StabilityVerdict::SemiStable
    } else {
        StabilityVerdict::Inconclusive
    };
    HardyCheck { sup, constant, verdict }
}

fn significant<T: Real>(profile: &RadialProfile<T>) -> impl Fn(T) -> bool {
    let peak = profile.u_r().iter().map(|d| d.abs()).fold(T::zero(), T::max);
    let floor = T::lit(1e-12) * peak;
    move |d: T| d.abs() > floor
}

/// Indices `i` with a sign change of `u_r` between a node at or before `i` and node `i + 1`,
/// ignoring values that are round-off next to the largest `|u_r|`.
fn sign_changes<T: Real>(profile: &RadialProfile<T>) -> Vec<usize> {
    let keep = significant(profile);
    let d = profile.u_r();
    let last = d.len() - 1;
    let mut out = Vec::new();
    let mut prev: Option<T> = None;
    for (i, &v) in d.iter().enumerate().take(last) {
        if !keep(v) {
            continue;
        }
        if let Some(p) = prev {
            if p.signum() != v.signum() {
                out.push(i - 1);
            }
        }
        prev = Some(v);
    }
    out
}

/// Sign changes of `u_r` strictly inside `(0, 1)`.
pub fn count_ur_zeros<T: Real>(profile: &RadialProfile<T>) -> usize {
    sign_changes(profile).len()
}

/// Interior zeros of the interpolated `u_r`, refined by bisection.
pub fn ur_zero_radii<T: Real>(profile: &RadialProfile<T>) -> Vec<T> {
    let nodes = profile.nodes();
    let d = profile.u_r();
    let mut out = Vec::new();
    for i in sign_changes(profile) {
        // the bracketing nodes may be separated by negligible values
        let mut j = i + 1;
        while j < d.len() - 1 && d[j].signum() == d[i].signum() {
            j += 1;
        }
        let mut k = j;
        while k > 0 && d[k - 1].signum() != d[i].signum() {
            k -= 1;
        }
        let (mut lo, mut hi) = (nodes[k - 1], nodes[k]);
        let s_lo = profile.u_r_at(lo).signum();
        for _ in 0..200 {
            let mid = (lo + hi) * T::lit(0.5);
            if mid <= lo || mid >= hi {
                break;
            }
            if profile.u_r_at(mid).signum() == s_lo {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (a, b) = (profile.u_r_at(lo).abs(), profile.u_r_at(hi).abs());
        out.push(if a <= b { lo } else { hi });
    }
    out
}

/// Largest `a = 2^{-k}/4` for which the `eta0` functional is negative.
pub fn eta0_radius<T: Real>(profile: &RadialProfile<T>) -> Option<T> {
    let mut a = T::lit(0.125);
    while a >= profile.grid().r_min() {
        let eta = TestFunction::eta0(a).ok()?;
        match reduced_form_parts(profile, &eta) {
            Ok(f) if f.value < T::zero() => return Some(a),
            Ok(_) => {}
            Err(_) => return None,
        }
        a = a * T::lit(0.5);
    }
    None
}

/// Least-squares exponent `β` of `|u_r| ≈ C r^β` over the nodes in `[lo, hi]`.
pub fn gradient_exponent_fit<T: Real>(profile: &RadialProfile<T>, lo: T, hi: T) -> Option<T> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&r, &d) in profile.nodes().iter().zip(profile.u_r()) {
        if r >= lo && r <= hi && d != T::zero() {
            xs.push(r.ln());
            ys.push(d.abs().ln());
        }
    }
    if xs.len() < 2 {
        return None;
    }
    Some(eigen::linear_fit(&xs, &ys).1)
}

/// Admissible test functions probing the reduced form: indicators between zeros of
/// `u_r`, log-sine functions matched to the local growth of `u_r`, and composite
/// functions built from `eta0` when its functional is negative.
pub fn reduced_panel<T: Real>(profile: &RadialProfile<T>) -> Vec<TestFunction<T>> {
    let mut panel = Vec::new();
    let zeros = ur_zero_radii(profile);
    for w in zeros.windows(2) {
        if let Ok(eta) = TestFunction::indicator(w[0], w[1]) {
            panel.push(eta);
        }
    }
    let n = T::from_usize_lossy(profile.dimension());
    let half = T::lit(0.5);
    let floor = profile.grid().r_min() * T::lit(2.0);
    let mut lo = T::lit(1.0 / 32.0);
    while lo >= floor {
        if let Some(beta) = gradient_exponent_fit(profile, lo, half) {
            let kappa = -(n - T::lit(2.0) + T::lit(2.0) * beta) * half;
            if let Ok(eta) = TestFunction::log_sine(kappa, lo, half) {
                panel.push(eta);
            }
        }
        lo = lo * T::lit(1.0 / 16.0);
    }
    if let Some(a) = eta0_radius(profile) {
        if profile.monotonicity_radius(a) == Some(a) {
            let mut r = a * T::lit(0.25);
            for _ in 0..3 {
                if r * half < profile.grid().r_min() {
                    break;
                }
                if let Ok(eta) = TestFunction::lemma24(r, a, profile) {
                    panel.push(eta);
                }
                r = r * T::lit(1.0 / 64.0);
            }
        }
    }
    panel
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct StabilityReport<T: Real> {
    pub hardy: HardyCheck<T>,
    /// `(ε, λ₁(ε))` for decreasing `ε`.
    pub sweep: Vec<(T, T)>,
    pub trend: SweepTrend,
    /// `(test function, reduced functional)`.
    pub reduced: Vec<(String, T)>,
    pub ur_zeros: usize,
    pub verdict: StabilityVerdict,
    pub test_functions: String,
}

impl<T: Real> StabilityReport<T> {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Hardy criterion, Dirichlet eigenvalue sweep, zero count and reduced-form panel,
/// combined into a verdict that never claims more than the evidence supports.
pub fn semistability_verdict<T: Real>(profile: &RadialProfile<T>, nl: &Nonlinearity<T>) -> Result<StabilityReport<T>> {
    let hardy = hardy_criterion(profile, nl);
    let sweep = eigen_sweep(profile, T::lit(SWEEP_R0), InnerBoundary::Dirichlet, |_, u| nl.df(u))?;
    let trend = sweep_trend(&sweep);
    let mut reduced = Vec::new();
    let mut witness = false;
    for eta in reduced_panel(profile) {
        let form = match reduced_form_checked(profile, &eta) {
            Ok(f) => f,
            Err(crate::LabError::InadmissibleTestFunction(_)) => continue,
            Err(e) => return Err(e),
        };
        witness |= form.is_negative();
        reduced.push((eta.label().to_string(), form.value));
    }
    let verdict = if hardy.passes() {
        StabilityVerdict::SemiStable
    } else {
        match (trend, witness) {
            (SweepTrend::Flat, false) => StabilityVerdict::SemiStable,
            (SweepTrend::Flat, true) => StabilityVerdict::Inconclusive,
            (SweepTrend::Negative, _) | (_, true) => StabilityVerdict::Unstable,
            _ => StabilityVerdict::Inconclusive,
        }
    };
    Ok(StabilityReport {
        hardy,
        sweep,
        trend,
        reduced,
        ur_zeros: count_ur_zeros(profile),
        verdict,
        test_functions: "radial".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::{integrate_regular_ivp, Grid, GridKind};
    use approx::assert_relative_eq;

    fn grid() -> Grid<f64> {
        Grid::build(GridKind::Logarithmic, 4096, 1e-6).unwrap()
    }

    fn alpha(n: usize, a: f64) -> (RadialProfile<f64>, Nonlinearity<f64>) {
        let p = RadialProfile::closed_form(n, grid(), |r: f64| r.powf(a), |r: f64| a * r.powf(a - 1.0)).unwrap();
        (p, Nonlinearity::alpha_family(a, n).unwrap())
    }

    #[test]
    fn hardy_at_sharp_exponent_n10() {
        let (p, nl) = alpha(10, -6.0);
        let h = hardy_criterion(&p, &nl);
        assert_relative_eq!(h.sup, 16.0, max_relative = 1e-12);
        assert!(h.passes());
    }

    #[test]
    fn hardy_two_dimensions() {
        for a in [-0.1, -1.0, -3.0] {
            let (p, nl) = alpha(2, a);
            let h = hardy_criterion(&p, &nl);
            assert_relative_eq!(h.sup, -a * a + 2.0 * a, max_relative = 1e-12);
            assert!(h.passes());
        }
    }

    #[test]
    fn hardy_power_boundary() {
        let p: f64 = 4.0 / 3.0;
        let lambda = 2.0 * (10.0 * p - 2.0 * p - 10.0) / ((p - 1.0) * (p - 1.0));
        assert_relative_eq!(lambda, 12.0, max_relative = 1e-12);
        let e = -2.0 / (p - 1.0);
        let prof = RadialProfile::closed_form(10, grid(), |r: f64| r.powf(e) - 1.0, |r: f64| e * r.powf(e - 1.0)).unwrap();
        let h = hardy_criterion(&prof, &Nonlinearity::Power { p, lambda });
        assert_relative_eq!(h.sup, 16.0, max_relative = 1e-10);
        assert!(h.passes());
    }

    #[test]
    fn sharp_alpha_is_semi_stable_and_shifted_alpha_unstable() {
        let s = 3.0;
        let (p, nl) = alpha(10, 2.0 - 5.0 - s);
        let rep = semistability_verdict(&p, &nl).unwrap();
        assert_eq!(rep.verdict, StabilityVerdict::SemiStable);
        assert!(rep.reduced.iter().all(|(_, v)| *v >= -1e-8 * v.abs().max(1.0)));
        let (q, nq) = alpha(10, 2.0 - 5.0 - s + 0.2);
        let rep = semistability_verdict(&q, &nq).unwrap();
        assert_eq!(rep.verdict, StabilityVerdict::Unstable);
        assert_eq!(rep.trend, SweepTrend::Negative);
        assert!(rep.reduced.iter().any(|(_, v)| *v < 0.0));
    }

    #[test]
    fn zero_profile_semi_stable() {
        let p = RadialProfile::closed_form(3, grid(), |_| 0.0, |_| 0.0).unwrap();
        let rep = semistability_verdict(&p, &Nonlinearity::Zero).unwrap();
        assert_eq!(rep.verdict, StabilityVerdict::SemiStable);
        assert_eq!(rep.ur_zeros, 0);
        let json = rep.to_json();
        let back: StabilityReport<f64> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, rep);
    }

    #[test]
    fn sweep_is_monotone() {
        let (p, nl) = alpha(5, -2.5);
        let rep = semistability_verdict(&p, &nl).unwrap();
        for w in rep.sweep.windows(2) {
            assert!(w[1].1 <= w[0].1 + 1e-9 * w[0].1.abs().max(1.0));
        }
    }

    #[test]
    fn zero_counts() {
        let g = grid();
        let p = RadialProfile::closed_form(3, g.clone(), |r| r * r - r.powi(4), |r| 2.0 * r - 4.0 * r.powi(3)).unwrap();
        assert_eq!(count_ur_zeros(&p), 1);
        let z = ur_zero_radii(&p);
        assert_relative_eq!(z[0], 0.5_f64.sqrt(), max_relative = 1e-9);
        let (q, _) = alpha(10, -6.0);
        assert_eq!(count_ur_zeros(&q), 0);
    }

    #[test]
    fn two_zeros_give_negative_indicator_form() {
        // u_r = sin(2π r): zeros at 1/2 inside (0, 1), plus near-zero center
        let g = grid();
        let w = 3.0 * std::f64::consts::PI;
        let p = RadialProfile::closed_form(3, g, |r| -(w * r).cos() / w, |r| (w * r).sin()).unwrap();
        let z = ur_zero_radii(&p);
        assert_eq!(z.len(), 2);
        let eta = TestFunction::indicator(z[0], z[1]).unwrap();
        let v = reduced_quadratic_form(&p, &eta).unwrap();
        assert!(v < 0.0);
    }

    #[test]
    fn regular_liouville_lower_branch_semi_stable() {
        let nl = Nonlinearity::Exponential { lambda: 1.5 };
        let b: f64 = 1.0 / 3.0;
        let m = 2.0 * (1.0 + b).ln();
        let p = integrate_regular_ivp(&nl, m, 2, &grid()).unwrap();
        let rep = semistability_verdict(&p, &nl).unwrap();
        assert_eq!(rep.verdict, StabilityVerdict::SemiStable, "{:?}", rep.sweep.last());
    }

    #[test]
    fn regular_liouville_upper_branch_unstable() {
        let nl = Nonlinearity::Exponential { lambda: 1.5 };
        let m = 2.0 * 4.0_f64.ln();
        let p = integrate_regular_ivp(&nl, m, 2, &grid()).unwrap();
        let rep = semistability_verdict(&p, &nl).unwrap();
        assert_eq!(rep.verdict, StabilityVerdict::Unstable, "{:?}", rep.sweep);
    }
}
