//! Quadrature on sampled data.

use crate::error::{invalid, Result};
use crate::scalar::Real;

use super::grid::Grid;

/// Trapezoidal approximation of `∫_{lo}^{hi} r^w · samples(r) dr` on the grid.
///
/// The integrand `r^w · samples` is treated as piecewise linear between nodes, and
/// off-node limits are handled by linear interpolation of that integrand, so the
/// rule is exact for integrands that are piecewise linear on the grid.
pub fn integrate_weighted<T: Real>(grid: &Grid<T>, samples: &[T], weight_exponent: T, lo: T, hi: T) -> Result<T> {
    let nodes = grid.nodes();
    if samples.len() != nodes.len() {
        return Err(invalid("samples must match the grid length"));
    }
    if !(lo < hi) {
        return Err(invalid(format!("empty or inverted range [{lo}, {hi}]")));
    }
    let slack = T::epsilon() * T::lit(64.0);
    if lo < nodes[0] * (T::one() - slack) || hi > T::one() + slack {
        return Err(invalid(format!("range [{lo}, {hi}] leaves the grid span")));
    }
    let g = |i: usize| nodes[i].powf(weight_exponent) * samples[i];
    let interp = |x: T| {
        let i = grid.interval_of(x);
        let t = (x - nodes[i]) / (nodes[i + 1] - nodes[i]);
        g(i) + t * (g(i + 1) - g(i))
    };
    let mut xs = vec![lo];
    let mut ys = vec![interp(lo)];
    for i in grid.interior_range(lo, hi) {
        xs.push(nodes[i]);
        ys.push(g(i));
    }
    xs.push(hi);
    ys.push(interp(hi));
    Ok(trapezoid(&xs, &ys))
}

pub fn trapezoid<T: Real>(xs: &[T], ys: &[T]) -> T {
    xs.windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| (x[1] - x[0]) * (y[0] + y[1]) / T::lit(2.0))
        .sum()
}

/// Integral over `[xs[i], xs[i+1]]` of the cubic through four neighbouring samples.
fn local_cubic<T: Real>(xs: &[T], ys: &[T], i: usize) -> T {
    let n = xs.len();
    let h = xs[i + 1] - xs[i];
    if n == 2 {
        return h * (ys[0] + ys[1]) / T::lit(2.0);
    }
    let m = n.min(4);
    let j0 = i.saturating_sub(1).min(n - m);
    let z: Vec<T> = (0..m).map(|k| (xs[j0 + k] - xs[i]) / h).collect();
    // Newton divided differences in the scaled variable
    let mut dd: Vec<T> = (0..m).map(|k| ys[j0 + k]).collect();
    for level in 1..m {
        for k in (level..m).rev() {
            dd[k] = (dd[k] - dd[k - 1]) / (z[k] - z[k - level]);
        }
    }
    let half = T::lit(0.5);
    let third = T::one() / T::lit(3.0);
    let quarter = T::lit(0.25);
    let mut total = dd[0] + dd[1] * (half - z[0]);
    if m >= 3 {
        let (a, b) = (z[0], z[1]);
        total = total + dd[2] * (third - (a + b) * half + a * b);
    }
    if m >= 4 {
        let (a, b, c) = (z[0], z[1], z[2]);
        total = total + dd[3] * (quarter - (a + b + c) * third + (a * b + a * c + b * c) * half - a * b * c);
    }
    h * total
}

/// Fourth-order composite integral of samples on strictly increasing abscissae.
pub fn integrate_samples<T: Real>(xs: &[T], ys: &[T]) -> T {
    debug_assert_eq!(xs.len(), ys.len());
    if xs.len() < 2 {
        return T::zero();
    }
    (0..xs.len() - 1).map(|i| local_cubic(xs, ys, i)).sum()
}

/// Running integral `∫_{xs[0]}^{xs[k]}` for every `k`.
pub fn cumulative<T: Real>(xs: &[T], ys: &[T]) -> Vec<T> {
    let mut out = Vec::with_capacity(xs.len());
    out.push(T::zero());
    let mut acc = T::zero();
    for i in 0..xs.len().saturating_sub(1) {
        acc = acc + local_cubic(xs, ys, i);
        out.push(acc);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::grid::GridKind;

    #[test]
    fn constant_on_subrange() {
        let g = Grid::<f64>::build(GridKind::Uniform, 33, 0.1).unwrap();
        let ones = vec![1.0; g.len()];
        let v = integrate_weighted(&g, &ones, 0.0, 0.25, 0.75).unwrap();
        assert!((v - 0.5).abs() < 1e-14);
    }

    #[test]
    fn monomial_weight_to_origin() {
        let g = Grid::<f64>::build(GridKind::Logarithmic, 4096, 1e-6).unwrap();
        let ones = vec![1.0; g.len()];
        let n = 5.0;
        let v = integrate_weighted(&g, &ones, n - 1.0, g.r_min(), 1.0).unwrap();
        assert!((v - 1.0 / n).abs() < 1e-4);
    }

    #[test]
    fn exact_for_piecewise_linear() {
        let g = Grid::<f64>::from_nodes(GridKind::Uniform, vec![0.1, 0.3, 0.4, 0.8, 1.0]).unwrap();
        let s: Vec<f64> = vec![1.0, -2.0, 0.5, 3.0, 0.0];
        let v = integrate_weighted(&g, &s, 0.0, 0.1, 1.0).unwrap();
        assert!((v - trapezoid(g.nodes(), &s)).abs() < 1e-15);
        // off-node limits on a single linear piece: ∫_{0.45}^{0.7} of the line through (0.4,0.5),(0.8,3)
        let line = |x: f64| 0.5 + (x - 0.4) * 2.5 / 0.4;
        let exact = 0.25 * (line(0.45) + line(0.7)) / 2.0;
        let v = integrate_weighted(&g, &s, 0.0, 0.45, 0.7).unwrap();
        assert!((v - exact).abs() < 1e-14);
    }

    #[test]
    fn errors_on_bad_range() {
        let g = Grid::<f64>::build(GridKind::Uniform, 16, 0.5).unwrap();
        let s = vec![1.0; 16];
        assert!(integrate_weighted(&g, &s, 0.0, 0.8, 0.6).is_err());
        assert!(integrate_weighted(&g, &s, 0.0, 0.7, 0.7).is_err());
        assert!(integrate_weighted(&g, &s, 0.0, 0.1, 0.7).is_err());
        assert!(integrate_weighted(&g, &s[..3], 0.0, 0.6, 0.7).is_err());
    }

    #[test]
    fn cubic_rule_is_exact_for_cubics() {
        let xs = [0.0, 0.1, 0.35, 0.4, 0.9, 1.3];
        let p = |x: f64| 2.0 - x + 3.0 * x * x - 0.5 * x * x * x;
        let ys: Vec<f64> = xs.iter().map(|&x| p(x)).collect();
        let prim = |x: f64| 2.0 * x - x * x / 2.0 + x.powi(3) - x.powi(4) / 8.0;
        assert!((integrate_samples(&xs, &ys) - (prim(1.3) - prim(0.0))).abs() < 1e-13);
        let cum = cumulative(&xs, &ys);
        for (k, &x) in xs.iter().enumerate() {
            assert!((cum[k] - prim(x)).abs() < 1e-13);
        }
    }
}
