use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, LabError, Result};
use crate::radial::{Grid, Nonlinearity, RadialProfile};
use crate::scalar::Real;

/// Fewest grid nodes accepted on `[ε, 1]`.
pub const MIN_EIGEN_NODES: usize = 32;

/// Condition imposed at the inner radius `ε`; the outer radius is always Dirichlet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InnerBoundary {
    #[default]
    Dirichlet,
    /// Zero flux, for profiles with a regular center resolved down to `r_min`.
    Natural,
}

/// Finite-difference pencil of `-(r^{N-1} v')'` against the weight `r^{N-1}` on the
/// unknown nodes, with cell-averaged weights.
#[derive(Debug, Clone)]
pub struct Pencil<T> {
    radii: Vec<T>,
    diag: Vec<T>,
    off: Vec<T>,
    mass: Vec<T>,
}

impl<T: Real> Pencil<T> {
    /// `nodes` runs from `ε` to 1 inclusive.
    pub fn build(nodes: &[T], dimension: usize, inner: InnerBoundary) -> Result<Self> {
        let m = nodes.len();
        if m < MIN_EIGEN_NODES {
            return Err(LabError::DiscretizationFailure(format!(
                "{m} grid nodes on [eps, 1], need at least {MIN_EIGEN_NODES}"
            )));
        }
        let nn = T::from_usize_lossy(dimension);
        let pow = |x: T| x.powi(dimension as i32);
        // flux weight on each cell: mean of r^{N-1} over [x_i, x_{i+1}]
        let h: Vec<T> = nodes.windows(2).map(|w| w[1] - w[0]).collect();
        let flux: Vec<T> = nodes
            .windows(2)
            .zip(&h)
            .map(|(w, &hi)| (pow(w[1]) - pow(w[0])) / (nn * hi) / hi)
            .collect();
        let mid: Vec<T> = nodes.windows(2).map(|w| (w[0] + w[1]) * T::lit(0.5)).collect();
        let first = match inner {
            InnerBoundary::Dirichlet => 1,
            InnerBoundary::Natural => 0,
        };
        let mut radii = Vec::with_capacity(m);
        let mut diag = Vec::with_capacity(m);
        let mut mass = Vec::with_capacity(m);
        for i in first..m - 1 {
            let left_mid = if i == 0 { nodes[0] } else { mid[i - 1] };
            radii.push(nodes[i]);
            mass.push((pow(mid[i]) - pow(left_mid)) / nn);
            let left = if i == 0 { T::zero() } else { flux[i - 1] };
            diag.push(left + flux[i]);
        }
        let off = (first..m - 2).map(|i| -flux[i]).collect();
        Ok(Self { radii, diag, off, mass })
    }

    pub fn radii(&self) -> &[T] {
        &self.radii
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    /// Number of eigenvalues below `x` of `A - V M` against `M` (Sturm count on the
    /// `LDLᵀ` pivots of `A - (V + x) M`).
    pub fn count_below(&self, potential: &[T], x: T) -> usize {
        let tiny = T::min_positive_value().sqrt();
        let mut count = 0;
        let mut q = T::one();
        for i in 0..self.diag.len() {
            let mut d = self.diag[i] - (potential[i] + x) * self.mass[i];
            if i > 0 {
                let b = self.off[i - 1];
                d = d - b * b / q;
            }
            if d == T::zero() {
                d = -tiny * (self.diag[i].abs() + tiny);
            }
            if d < T::zero() {
                count += 1;
            }
            q = d;
        }
        count
    }

    /// Smallest eigenvalue by bisection on the Sturm count.
    pub fn smallest(&self, potential: &[T]) -> T {
        let vmax = potential.iter().copied().fold(T::neg_infinity(), T::max);
        let mut lo = -vmax - T::one();
        while self.count_below(potential, lo) > 0 {
            lo = lo - (lo.abs() + T::one());
        }
        let mut step = lo.abs() + T::one();
        let mut hi = lo + step;
        while self.count_below(potential, hi) == 0 {
            lo = hi;
            step = step + step;
            hi = hi + step;
        }
        let rel = T::epsilon() * T::lit(8.0);
        for _ in 0..400 {
            let mid = lo + (hi - lo) * T::lit(0.5);
            if mid <= lo || mid >= hi || hi - lo <= rel * (lo.abs().max(hi.abs())) {
                break;
            }
            if self.count_below(potential, mid) == 0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo + (hi - lo) * T::lit(0.5)
    }
}

/// Index of the first grid node at or above `eps`.
pub fn inner_index<T: Real>(grid: &Grid<T>, eps: T) -> Result<usize> {
    if !(eps >= grid.r_min() * (T::one() - T::lit(1e-12))) || eps >= T::one() {
        return Err(invalid(format!("inner radius {eps} outside [r_min, 1) = [{}, 1)", grid.r_min())));
    }
    let cut = eps * (T::one() - T::lit(1e-12));
    Ok(grid.nodes().iter().position(|&r| r >= cut).unwrap_or(grid.len() - 1))
}

/// Principal Dirichlet eigenvalue of `-Δ - V` on the annulus `ε < r < 1` for a
/// potential given as a function of `(r, u)`.
pub fn principal_eigenvalue_with<T, V>(profile: &RadialProfile<T>, eps: T, inner: InnerBoundary, potential: V) -> Result<T>
where
    T: Real,
    V: Fn(T, T) -> T,
{
    let i0 = inner_index(profile.grid(), eps)?;
    let nodes = &profile.nodes()[i0..];
    let pencil = Pencil::build(nodes, profile.dimension(), inner)?;
    let offset = i0 + usize::from(inner == InnerBoundary::Dirichlet);
    let pot: Vec<T> = (0..pencil.len()).map(|k| potential(profile.nodes()[offset + k], profile.u()[offset + k])).collect();
    Ok(pencil.smallest(&pot))
}

/// Smallest `λ` with `-(r^{N-1}v')' - r^{N-1} f'(u) v = λ r^{N-1} v`, `v(ε) = v(1) = 0`.
pub fn principal_eigenvalue<T: Real>(profile: &RadialProfile<T>, nl: &Nonlinearity<T>, eps: T) -> Result<T> {
    principal_eigenvalue_with(profile, eps, InnerBoundary::Dirichlet, |_, u| nl.df(u))
}

/// Inner radii `r0 2^{-k}` that still leave at least [`MIN_EIGEN_NODES`] nodes on `[ε, 1]`.
pub fn sweep_radii<T: Real>(grid: &Grid<T>, r0: T) -> Vec<T> {
    let mut out = Vec::new();
    let mut eps = r0;
    while eps >= grid.r_min() {
        let count = grid.nodes().iter().filter(|&&r| r >= eps * (T::one() - T::lit(1e-12))).count();
        if count >= MIN_EIGEN_NODES {
            out.push(eps);
        }
        eps = eps * T::lit(0.5);
    }
    out
}

/// `(ε, λ₁(ε))` over [`sweep_radii`], computed in parallel, ordered by decreasing `ε`.
pub fn eigen_sweep<T, V>(profile: &RadialProfile<T>, r0: T, inner: InnerBoundary, potential: V) -> Result<Vec<(T, T)>>
where
    T: Real,
    V: Fn(T, T) -> T + Sync,
{
    sweep_radii(profile.grid(), r0)
        .into_par_iter()
        .map(|eps| principal_eigenvalue_with(profile, eps, inner, &potential).map(|l| (eps, l)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepTrend {
    /// All values nonnegative and the last increments have leveled off.
    Flat,
    /// Some value is negative.
    Negative,
    Undecided,
}

/// Relative size of the last increment that still counts as flat.
pub const FLAT_INCREMENT: f64 = 0.05;

/// Reads a sweep ordered by decreasing `ε`.
pub fn sweep_trend<T: Real>(sweep: &[(T, T)]) -> SweepTrend {
    if sweep.is_empty() {
        return SweepTrend::Undecided;
    }
    let scale = sweep.iter().map(|p| p.1.abs()).fold(T::one(), T::max);
    let tol = T::lit(1e-8) * scale;
    if sweep.iter().any(|p| p.1 < -tol) {
        return SweepTrend::Negative;
    }
    if sweep.len() < 4 {
        return SweepTrend::Undecided;
    }
    let k = sweep.len();
    let (a, b, c) = (sweep[k - 3].1, sweep[k - 2].1, sweep[k - 1].1);
    let d1 = a - b;
    let d2 = b - c;
    let slack = T::lit(1e-10) * scale;
    let small = d2 <= T::lit(FLAT_INCREMENT) * c.abs() + slack;
    let slowing = d2 <= d1 * T::lit(1.1) + slack;
    if small && slowing {
        SweepTrend::Flat
    } else {
        SweepTrend::Undecided
    }
}

/// Coupling `c` at which `λ₁(ε)` for the potential `c/r²` crosses zero.
pub fn critical_coupling<T: Real>(grid: &Grid<T>, dimension: usize, eps: T) -> Result<T> {
    let i0 = inner_index(grid, eps)?;
    let pencil = Pencil::build(&grid.nodes()[i0..], dimension, InnerBoundary::Dirichlet)?;
    let inv_sq: Vec<T> = pencil.radii().iter().map(|r| T::one() / (*r * *r)).collect();
    let negative = |c: T| {
        let pot: Vec<T> = inv_sq.iter().map(|w| c * *w).collect();
        pencil.count_below(&pot, T::zero()) > 0
    };
    let mut lo = T::zero();
    let mut hi = T::one();
    if negative(lo) {
        return Err(LabError::DiscretizationFailure("negative spectrum without potential".into()));
    }
    while !negative(hi) {
        lo = hi;
        hi = hi + hi;
    }
    for _ in 0..200 {
        let mid = (lo + hi) * T::lit(0.5);
        if mid <= lo || mid >= hi {
            break;
        }
        if negative(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok((lo + hi) * T::lit(0.5))
}

/// Least-squares fit `c*(ε) = c_inf + b / ln²(ε)` of the zero-crossing couplings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingFit<T> {
    pub c_inf: T,
    pub slope: T,
    pub points: Vec<(T, T)>,
}

pub fn extrapolated_critical_coupling<T: Real>(grid: &Grid<T>, dimension: usize, radii: &[T]) -> Result<CouplingFit<T>> {
    if radii.len() < 2 {
        return Err(invalid("need at least two inner radii"));
    }
    let points: Vec<(T, T)> = radii
        .par_iter()
        .map(|&eps| critical_coupling(grid, dimension, eps).map(|c| (eps, c)))
        .collect::<Result<_>>()?;
    let xs: Vec<T> = points.iter().map(|(e, _)| T::one() / (e.ln() * e.ln())).collect();
    let ys: Vec<T> = points.iter().map(|p| p.1).collect();
    let (c_inf, slope) = linear_fit(&xs, &ys);
    Ok(CouplingFit { c_inf, slope, points })
}

/// Ordinary least squares `y ≈ a + b x`, returning `(a, b)`.
pub fn linear_fit<T: Real>(xs: &[T], ys: &[T]) -> (T, T) {
    let n = T::from_usize_lossy(xs.len());
    let mx = xs.iter().copied().sum::<T>() / n;
    let my = ys.iter().copied().sum::<T>() / n;
    let sxy: T = xs.iter().zip(ys).map(|(x, y)| (*x - mx) * (*y - my)).sum();
    let sxx: T = xs.iter().map(|x| (*x - mx) * (*x - mx)).sum();
    let b = if sxx > T::zero() { sxy / sxx } else { T::zero() };
    (my - b * mx, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::GridKind;
    use approx::assert_relative_eq;

    const J01: f64 = 2.404_825_557_695_773;

    fn flat_profile(n: usize, grid: Grid<f64>) -> RadialProfile<f64> {
        RadialProfile::closed_form(n, grid, |_| 0.0, |_| 0.0).unwrap()
    }

    #[test]
    fn unit_disk_with_natural_center() {
        let grid = Grid::build(GridKind::Logarithmic, 4096, 1e-6).unwrap();
        let p = flat_profile(2, grid);
        let l = principal_eigenvalue_with(&p, 1e-6, InnerBoundary::Natural, |_, _| 0.0).unwrap();
        assert_relative_eq!(l, J01 * J01, max_relative = 1e-4);
    }

    #[test]
    fn unit_disk_dirichlet_sweep_extrapolates_to_bessel_zero() {
        // λ(ε) - j² decays like 1/ln(1/ε); extrapolate in that variable.
        let grid = Grid::build(GridKind::Logarithmic, 4096, 1e-12).unwrap();
        let p = flat_profile(2, grid);
        let sweep = eigen_sweep(&p, 0.5, InnerBoundary::Dirichlet, |_, _| 0.0).unwrap();
        for w in sweep.windows(2) {
            assert!(w[1].1 <= w[0].1 * (1.0 + 1e-12));
        }
        let tail: Vec<_> = sweep.iter().rev().take(12).collect();
        let xs: Vec<f64> = tail.iter().map(|(e, _)| -1.0 / e.ln()).collect();
        let ys: Vec<f64> = tail.iter().map(|(_, l)| *l).collect();
        // quadratic in x = 1/ln(1/ε)
        let (a, _) = quadratic_intercept(&xs, &ys);
        assert_relative_eq!(a, J01 * J01, max_relative = 1e-2);
    }

    fn quadratic_intercept(xs: &[f64], ys: &[f64]) -> (f64, f64) {
        let mut m = [[0.0; 3]; 3];
        let mut v = [0.0; 3];
        for (&x, &y) in xs.iter().zip(ys) {
            let b = [1.0, x, x * x];
            for i in 0..3 {
                v[i] += b[i] * y;
                for j in 0..3 {
                    m[i][j] += b[i] * b[j];
                }
            }
        }
        for c in 0..3 {
            for r in c + 1..3 {
                let f = m[r][c] / m[c][c];
                for k in 0..3 {
                    m[r][k] -= f * m[c][k];
                }
                v[r] -= f * v[c];
            }
        }
        let mut s = [0.0; 3];
        for i in (0..3).rev() {
            s[i] = (v[i] - (i + 1..3).map(|k| m[i][k] * s[k]).sum::<f64>()) / m[i][i];
        }
        (s[0], s[1])
    }

    #[test]
    fn unit_ball_three_dimensions() {
        let grid = Grid::build(GridKind::Logarithmic, 4096, 1e-6).unwrap();
        let p = flat_profile(3, grid);
        let l = principal_eigenvalue(&p, &Nonlinearity::Zero, 1e-6).unwrap();
        let pi2 = std::f64::consts::PI.powi(2);
        assert_relative_eq!(l, pi2, max_relative = 1e-4);
    }

    #[test]
    fn too_few_nodes() {
        let grid = Grid::build(GridKind::Logarithmic, 64, 1e-6).unwrap();
        let p = flat_profile(3, grid);
        assert!(matches!(principal_eigenvalue(&p, &Nonlinearity::Zero, 0.5), Err(LabError::DiscretizationFailure(_))));
        assert!(matches!(principal_eigenvalue(&p, &Nonlinearity::Zero, 1e-8), Err(LabError::InvalidArgument(_))));
    }

    #[test]
    fn subcritical_inverse_square_stays_positive() {
        let grid = Grid::build(GridKind::Logarithmic, 4096, 1e-8).unwrap();
        let p = flat_profile(4, grid);
        let c = 1.0 - 0.5;
        let sweep = eigen_sweep(&p, 0.5, InnerBoundary::Dirichlet, |r, _| c / (r * r)).unwrap();
        assert!(sweep.iter().all(|s| s.1 > 1.0));
        assert_eq!(sweep_trend(&sweep), SweepTrend::Flat);
    }

    #[test]
    fn supercritical_inverse_square_diverges() {
        let grid = Grid::build(GridKind::Logarithmic, 4096, 1e-8).unwrap();
        let p = flat_profile(4, grid);
        let c = 1.0 + 0.5;
        let sweep = eigen_sweep(&p, 0.5, InnerBoundary::Dirichlet, |r, _| c / (r * r)).unwrap();
        let last = sweep.last().unwrap().1;
        assert!(last < -1e6, "{last}");
        assert_eq!(sweep_trend(&sweep), SweepTrend::Negative);
        for w in sweep.windows(2) {
            assert!(w[1].1 <= w[0].1 + 1e-9 * w[0].1.abs());
        }
    }

    #[test]
    fn critical_coupling_matches_log_variable_formula() {
        // On (ε, 1) the zero crossing sits at c = H + π²/ln²ε.
        let grid = Grid::build(GridKind::Logarithmic, 4096, 1e-6).unwrap();
        let eps: f64 = 1e-3;
        let c = critical_coupling(&grid, 5, eps).unwrap();
        let expect = 2.25 + std::f64::consts::PI.powi(2) / eps.ln().powi(2);
        assert_relative_eq!(c, expect, max_relative = 1e-4);
    }

    #[test]
    fn linear_fit_recovers_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [1.0, 3.0, 5.0, 7.0];
        let (a, b) = linear_fit(&xs, &ys);
        assert_relative_eq!(a, 1.0, epsilon = 1e-14);
        assert_relative_eq!(b, 2.0, epsilon = 1e-14);
    }
}
