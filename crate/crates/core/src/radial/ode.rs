//! Dormand–Prince 5(4) integrator with continuous (dense) output.

use crate::error::{LabError, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy)]
pub struct Tolerances<T> {
    pub atol: T,
    pub rtol: T,
}

impl<T: Real> Default for Tolerances<T> {
    fn default() -> Self {
        Tolerances { atol: T::tol_floor(1e-10), rtol: T::tol_floor(1e-10) }
    }
}

#[derive(Debug, Clone)]
struct Segment<T, const D: usize> {
    t0: T,
    h: T,
    rcont: [[T; D]; 5],
}

impl<T: Real, const D: usize> Segment<T, D> {
    fn eval(&self, t: T) -> [T; D] {
        let theta = (t - self.t0) / self.h;
        let theta1 = T::one() - theta;
        let r = &self.rcont;
        std::array::from_fn(|i| {
            r[0][i] + theta * (r[1][i] + theta1 * (r[2][i] + theta * (r[3][i] + theta1 * r[4][i])))
        })
    }
}

/// Accepted steps of one integration, each with its 4th-order interpolant.
#[derive(Debug, Clone)]
pub struct DenseSolution<T, const D: usize> {
    segments: Vec<Segment<T, D>>,
    t_start: T,
    t_end: T,
    y_end: [T; D],
}

impl<T: Real, const D: usize> DenseSolution<T, D> {
    pub fn t_start(&self) -> T {
        self.t_start
    }

    pub fn t_end(&self) -> T {
        self.t_end
    }

    pub fn y_end(&self) -> [T; D] {
        self.y_end
    }

    pub fn steps(&self) -> usize {
        self.segments.len()
    }

    /// Interpolated state at `t`, which must lie between the start and end of the run.
    pub fn eval(&self, t: T) -> [T; D] {
        let forward = self.t_end >= self.t_start;
        // segments are ordered along the direction of integration
        let idx = self.segments.partition_point(|s| {
            let end = s.t0 + s.h;
            if forward {
                end < t
            } else {
                end > t
            }
        });
        let seg = &self.segments[idx.min(self.segments.len() - 1)];
        seg.eval(t)
    }
}

/// What the step callback wants the integrator to do next.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const MAX_STEPS: usize = 2_000_000;

fn combo<T: Real, const D: usize>(y: &[T; D], h: T, terms: &[(f64, &[T; D])]) -> [T; D] {
    std::array::from_fn(|i| {
        let mut acc = T::zero();
        for (c, k) in terms {
            acc = acc + T::lit(*c) * k[i];
        }
        y[i] + h * acc
    })
}

/// Integrates `y' = rhs(t, y)` from `t0` to `t_end` (either direction).
///
/// `on_step(t, y)` is called after every accepted step and may stop the run early
/// or reject the state with an error (used for overflow guards).
pub fn integrate<T, F, S, const D: usize>(
    rhs: F,
    t0: T,
    y0: [T; D],
    t_end: T,
    tol: Tolerances<T>,
    on_step: S,
) -> Result<DenseSolution<T, D>>
where
    T: Real,
    F: Fn(T, &[T; D]) -> [T; D],
    S: FnMut(T, &[T; D]) -> Result<Control>,
{
    integrate_weighted_atol(rhs, t0, y0, t_end, tol, |_| [T::one(); D], on_step)
}

/// Like [`integrate`], with the absolute tolerance of component `i` multiplied by
/// `atol_weight(t)[i]`.
pub fn integrate_weighted_atol<T, F, W, S, const D: usize>(
    rhs: F,
    t0: T,
    y0: [T; D],
    t_end: T,
    tol: Tolerances<T>,
    atol_weight: W,
    mut on_step: S,
) -> Result<DenseSolution<T, D>>
where
    T: Real,
    F: Fn(T, &[T; D]) -> [T; D],
    W: Fn(T) -> [T; D],
    S: FnMut(T, &[T; D]) -> Result<Control>,
{
    let span = t_end - t0;
    let dir = if span >= T::zero() { T::one() } else { -T::one() };
    let mut t = t0;
    let mut y = y0;
    let mut k1 = rhs(t, &y);
    let mut h = initial_step(&rhs, t0, &y0, &k1, dir, span.abs(), tol, &atol_weight(t0));
    let mut segments = Vec::new();
    let mut prev_reject = false;
    let (c2, c3, c4, c5) = (T::lit(C2), T::lit(C3), T::lit(C4), T::lit(C5));
    let safety = T::lit(0.9);
    let fac_min = T::lit(0.2);
    let fac_max = T::lit(10.0);
    let expo = T::lit(-0.2);

    if span == T::zero() {
        return Ok(DenseSolution { segments, t_start: t0, t_end: t0, y_end: y0 });
    }

    for _ in 0..MAX_STEPS {
        let remaining = t_end - t;
        if remaining * dir <= T::zero() {
            break;
        }
        if (h.abs() - remaining.abs()) > T::zero() || (remaining.abs() - h.abs()) < T::epsilon() * t.abs() {
            h = remaining;
        }
        if h.abs() <= T::epsilon() * T::lit(16.0) * T::one().max(t.abs()) {
            return Err(LabError::StiffnessFailure { r: t.as_f64() });
        }

        let k2 = rhs(t + c2 * h, &combo(&y, h, &[(A21, &k1)]));
        let k3 = rhs(t + c3 * h, &combo(&y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = rhs(t + c4 * h, &combo(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = rhs(
            t + c5 * h,
            &combo(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = rhs(
            t + h,
            &combo(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        );
        let y_new = combo(&y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let k7 = rhs(t + h, &y_new);

        let mut err_sq = T::zero();
        let mut finite = true;
        let w = atol_weight(t + h);
        for i in 0..D {
            let e = h
                * (T::lit(E1) * k1[i]
                    + T::lit(E3) * k3[i]
                    + T::lit(E4) * k4[i]
                    + T::lit(E5) * k5[i]
                    + T::lit(E6) * k6[i]
                    + T::lit(E7) * k7[i]);
            let sc = tol.atol * w[i] + tol.rtol * y[i].abs().max(y_new[i].abs());
            let q = e / sc;
            if !q.is_finite() {
                finite = false;
            }
            err_sq = err_sq + q * q;
        }
        let err = (err_sq / T::from_usize_lossy(D)).sqrt();

        if !finite {
            prev_reject = true;
            h = h * fac_min;
            continue;
        }

        if err <= T::one() {
            let rcont2: [T; D] = std::array::from_fn(|i| y_new[i] - y[i]);
            let rcont3: [T; D] = std::array::from_fn(|i| h * k1[i] - rcont2[i]);
            let rcont4: [T; D] = std::array::from_fn(|i| rcont2[i] - h * k7[i] - rcont3[i]);
            let rcont5: [T; D] = std::array::from_fn(|i| {
                h * (T::lit(D1) * k1[i]
                    + T::lit(D3) * k3[i]
                    + T::lit(D4) * k4[i]
                    + T::lit(D5) * k5[i]
                    + T::lit(D6) * k6[i]
                    + T::lit(D7) * k7[i])
            });
            segments.push(Segment { t0: t, h, rcont: [y, rcont2, rcont3, rcont4, rcont5] });
            t = t + h;
            y = y_new;
            k1 = k7;
            let mut fac = if err == T::zero() { fac_max } else { safety * err.powf(expo) };
            fac = fac.max(fac_min).min(fac_max);
            if prev_reject {
                fac = fac.min(T::one());
            }
            prev_reject = false;
            h = h * fac;
            if on_step(t, &y)? == Control::Stop {
                return Ok(DenseSolution { segments, t_start: t0, t_end: t, y_end: y });
            }
        } else {
            prev_reject = true;
            let fac = (safety * err.powf(expo)).max(fac_min);
            h = h * fac;
        }
    }
    if (t_end - t) * dir > T::zero() {
        return Err(LabError::StiffnessFailure { r: t.as_f64() });
    }
    Ok(DenseSolution { segments, t_start: t0, t_end: t, y_end: y })
}

fn initial_step<T, F, const D: usize>(
    rhs: &F,
    t0: T,
    y0: &[T; D],
    f0: &[T; D],
    dir: T,
    span: T,
    tol: Tolerances<T>,
    w: &[T; D],
) -> T
where
    T: Real,
    F: Fn(T, &[T; D]) -> [T; D],
{
    // Hairer–Nørsett–Wanner starting step heuristic.
    let mut d0 = T::zero();
    let mut d1 = T::zero();
    for i in 0..D {
        let sc = tol.atol * w[i] + tol.rtol * y0[i].abs();
        d0 = d0 + (y0[i] / sc).powi(2);
        d1 = d1 + (f0[i] / sc).powi(2);
    }
    let n = T::from_usize_lossy(D);
    let (d0, d1) = ((d0 / n).sqrt(), (d1 / n).sqrt());
    let tiny = T::lit(1e-5);
    let mut h0 = if d0 < tiny || d1 < tiny { T::lit(1e-6) } else { T::lit(0.01) * d0 / d1 };
    h0 = h0.min(span);
    let y1: [T; D] = std::array::from_fn(|i| y0[i] + dir * h0 * f0[i]);
    let f1 = rhs(t0 + dir * h0, &y1);
    let mut d2 = T::zero();
    for i in 0..D {
        let sc = tol.atol * w[i] + tol.rtol * y0[i].abs();
        d2 = d2 + ((f1[i] - f0[i]) / sc).powi(2);
    }
    let d2 = (d2 / n).sqrt() / h0;
    let big = d1.max(d2);
    let h1 = if big <= T::lit(1e-15) {
        (h0 * T::lit(1e-3)).max(T::lit(1e-6))
    } else {
        (T::lit(0.01) / big).powf(T::lit(0.2))
    };
    let h = (T::lit(100.0) * h0).min(h1).min(span);
    if h.is_finite() && h > T::zero() {
        dir * h
    } else {
        dir * span * T::lit(1e-6)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_with_dense_output() {
        let rhs = |_t: f64, y: &[f64; 2]| [y[1], -y[0]];
        let sol = integrate(rhs, 0.0, [0.0, 1.0], 10.0, Tolerances::default(), |_, _| Ok(Control::Continue))
            .unwrap();
        assert!((sol.y_end()[0] - 10f64.sin()).abs() < 1e-8);
        for k in 0..100 {
            let t = 0.1 * k as f64 + 0.037;
            let y = sol.eval(t);
            assert!((y[0] - t.sin()).abs() < 1e-8, "t={t}: {} vs {}", y[0], t.sin());
            assert!((y[1] - t.cos()).abs() < 1e-8);
        }
    }

    #[test]
    fn backward_integration() {
        let rhs = |_t: f64, y: &[f64; 1]| [-2.0 * y[0]];
        let sol = integrate(rhs, 1.0, [1.0], -2.0, Tolerances::default(), |_, _| Ok(Control::Continue))
            .unwrap();
        let exact = |t: f64| (-2.0 * (t - 1.0)).exp();
        assert!((sol.y_end()[0] / exact(-2.0) - 1.0).abs() < 1e-8);
        for k in 0..30 {
            let t = 1.0 - 0.1 * k as f64 - 0.05;
            assert!((sol.eval(t)[0] / exact(t) - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn callback_stops_run() {
        let rhs = |_t: f64, _y: &[f64; 1]| [-1.0];
        let sol = integrate(rhs, 0.0, [1.0], 10.0, Tolerances::default(), |_, y| {
            Ok(if y[0] < 0.0 { Control::Stop } else { Control::Continue })
        })
        .unwrap();
        assert!(sol.t_end() > 1.0 && sol.t_end() < 10.0);
        assert!((sol.eval(1.0)[0]).abs() < 1e-12);
    }
}
