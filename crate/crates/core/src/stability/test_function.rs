use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::radial::{quad, RadialProfile};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestFunctionKind {
    Eta0,
    Lemma24Composite,
    Power,
    Custom,
}

/// One smooth piece of a test function, living on `[lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub enum Piece<T> {
    Constant { lo: T, hi: T, c: T },
    /// `c0 + c1 t`
    Affine { lo: T, hi: T, c0: T, c1: T },
    /// `coef t^exponent`
    Power { lo: T, hi: T, coef: T, exponent: T },
    /// `coef t^exponent ln(t / anchor)`
    PowerLog { lo: T, hi: T, coef: T, exponent: T, anchor: T },
    /// `t^kappa sin(pi ln(t/lo) / ln(hi/lo))`
    LogSine { lo: T, hi: T, kappa: T },
    /// Cubic Hermite through `(xs, values, slopes)`.
    Sampled { xs: Vec<T>, values: Vec<T>, slopes: Vec<T> },
}

impl<T: Real> Piece<T> {
    pub fn span(&self) -> (T, T) {
        match self {
            Piece::Constant { lo, hi, .. }
            | Piece::Affine { lo, hi, .. }
            | Piece::Power { lo, hi, .. }
            | Piece::PowerLog { lo, hi, .. }
            | Piece::LogSine { lo, hi, .. } => (*lo, *hi),
            Piece::Sampled { xs, .. } => (xs[0], xs[xs.len() - 1]),
        }
    }

    /// `(eta(t), eta'(t))`; `t` is assumed to lie in the span.
    pub fn eval(&self, t: T) -> (T, T) {
        match self {
            Piece::Constant { c, .. } => (*c, T::zero()),
            Piece::Affine { c0, c1, .. } => (*c0 + *c1 * t, *c1),
            Piece::Power { coef, exponent, .. } => {
                let v = *coef * t.powf(*exponent);
                (v, *exponent * v / t)
            }
            Piece::PowerLog { coef, exponent, anchor, .. } => {
                let p = *coef * t.powf(*exponent);
                let l = (t / *anchor).ln();
                (p * l, (*exponent * p * l + p) / t)
            }
            Piece::LogSine { lo, hi, kappa } => {
                let w = T::PI() / (*hi / *lo).ln();
                let theta = w * (t / *lo).ln();
                let p = t.powf(*kappa);
                (p * theta.sin(), p * (*kappa * theta.sin() + w * theta.cos()) / t)
            }
            Piece::Sampled { xs, values, slopes } => hermite(xs, values, slopes, t),
        }
    }
}

fn hermite<T: Real>(xs: &[T], values: &[T], slopes: &[T], t: T) -> (T, T) {
    let i = match xs.iter().position(|&x| x > t) {
        Some(0) => 0,
        Some(k) => (k - 1).min(xs.len() - 2),
        None => xs.len() - 2,
    };
    let h = xs[i + 1] - xs[i];
    let s = (t - xs[i]) / h;
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    let six = T::lit(6.0);
    let s2 = s * s;
    let s3 = s2 * s;
    let (y0, y1, d0, d1) = (values[i], values[i + 1], slopes[i], slopes[i + 1]);
    let v = (two * s3 - three * s2 + T::one()) * y0
        + (s3 - two * s2 + s) * h * d0
        + (three * s2 - two * s3) * y1
        + (s3 - s2) * h * d1;
    let dv = ((six * s2 - six * s) * y0 + (six * s - six * s2) * y1) / h
        + (three * s2 - T::lit(4.0) * s + T::one()) * d0
        + (three * s2 - two * s) * d1;
    (v, dv)
}

/// Piecewise test function `eta` on `[r1, r2]`, Lipschitz across the junctions.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction<T> {
    kind: TestFunctionKind,
    label: String,
    pieces: Vec<Piece<T>>,
}

impl<T: Real> TestFunction<T> {
    /// Pieces must tile their union without gaps.
    pub fn from_pieces(kind: TestFunctionKind, label: impl Into<String>, pieces: Vec<Piece<T>>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(invalid("test function without pieces"));
        }
        for w in pieces.windows(2) {
            let (_, a) = w[0].span();
            let (b, _) = w[1].span();
            if (a - b).abs() > T::lit(1e-12) * a.abs().max(T::one()) {
                return Err(invalid(format!("pieces leave a gap between {a} and {b}")));
            }
        }
        for p in &pieces {
            let (lo, hi) = p.span();
            if !(lo > T::zero() && lo < hi) {
                return Err(invalid(format!("piece span [{lo}, {hi}] is not a positive interval")));
            }
        }
        Ok(Self { kind, label: label.into(), pieces })
    }

    /// Lemma-2.3 cutoff: 1 on `[a, 1/4)`, `2 - 4t` on `[1/4, 1/2]`.
    pub fn eta0(a: T) -> Result<Self> {
        let quarter = T::lit(0.25);
        if !(a > T::zero() && a < quarter) {
            return Err(invalid(format!("eta0 needs 0 < a < 1/4, got a = {a}")));
        }
        Self::eta0_scaled(a, T::one(), TestFunctionKind::Eta0, format!("eta0(a={})", a.as_f64()))
    }

    fn eta0_scaled(a: T, scale: T, kind: TestFunctionKind, label: String) -> Result<Self> {
        let quarter = T::lit(0.25);
        let half = T::lit(0.5);
        Self::from_pieces(
            kind,
            label,
            vec![
                Piece::Constant { lo: a, hi: quarter, c: scale },
                Piece::Affine { lo: quarter, hi: half, c0: scale * T::lit(2.0), c1: -scale * T::lit(4.0) },
            ],
        )
    }

    /// `t^exponent` on `[lo, hi]`.
    pub fn power(exponent: T, lo: T, hi: T) -> Result<Self> {
        if !(lo > T::zero() && lo < hi) {
            return Err(invalid(format!("power support [{lo}, {hi}] must satisfy 0 < lo < hi")));
        }
        Self::from_pieces(
            TestFunctionKind::Power,
            format!("power(s={},[{},{}])", exponent.as_f64(), lo.as_f64(), hi.as_f64()),
            vec![Piece::Power { lo, hi, coef: T::one(), exponent }],
        )
    }

    /// `t^exponent` on `[r1·ρ, r2/ρ]`, ramped to zero linearly in `ln t` over one
    /// factor `ρ` at each end.
    pub fn power_with_cutoffs(exponent: T, r1: T, r2: T, ramp: T) -> Result<Self> {
        if !(ramp > T::one()) {
            return Err(invalid(format!("ramp ratio must exceed 1, got {ramp}")));
        }
        if !(r1 > T::zero() && r1 * ramp * ramp < r2) {
            return Err(invalid(format!("support [{r1}, {r2}] too short for ramp {ramp}")));
        }
        let l = ramp.ln();
        let (a, b) = (r1 * ramp, r2 / ramp);
        Self::from_pieces(
            TestFunctionKind::Power,
            format!("power-cut(s={},[{},{}])", exponent.as_f64(), r1.as_f64(), r2.as_f64()),
            vec![
                Piece::PowerLog { lo: r1, hi: a, coef: T::one() / l, exponent, anchor: r1 },
                Piece::Power { lo: a, hi: b, coef: T::one(), exponent },
                Piece::PowerLog { lo: b, hi: r2, coef: -T::one() / l, exponent, anchor: r2 },
            ],
        )
    }

    /// `t^kappa sin(pi ln(t/r1)/ln(r2/r1))`, vanishing at both ends.
    pub fn log_sine(kappa: T, r1: T, r2: T) -> Result<Self> {
        if !(r1 > T::zero() && r1 < r2) {
            return Err(invalid(format!("log-sine support [{r1}, {r2}] must satisfy 0 < r1 < r2")));
        }
        Self::from_pieces(
            TestFunctionKind::Custom,
            format!("logsine(k={:.4},[{:.3e},{:.3e}])", kappa.as_f64(), r1.as_f64(), r2.as_f64()),
            vec![Piece::LogSine { lo: r1, hi: r2, kappa }],
        )
    }

    /// Indicator of `[r1, r2]`.
    pub fn indicator(r1: T, r2: T) -> Result<Self> {
        if !(r1 > T::zero() && r1 < r2) {
            return Err(invalid(format!("indicator support [{r1}, {r2}] must satisfy 0 < r1 < r2")));
        }
        Self::from_pieces(
            TestFunctionKind::Custom,
            format!("one([{:.6e},{:.6e}])", r1.as_f64(), r2.as_f64()),
            vec![Piece::Constant { lo: r1, hi: r2, c: T::one() }],
        )
    }

    /// Hat function rising from 0 at `a` to 1 at `b`, back to 0 at `c`.
    pub fn tent(a: T, b: T, c: T) -> Result<Self> {
        if !(a > T::zero() && a < b && b < c) {
            return Err(invalid(format!("tent needs 0 < a < b < c, got {a}, {b}, {c}")));
        }
        let up = T::one() / (b - a);
        let down = T::one() / (c - b);
        Self::from_pieces(
            TestFunctionKind::Custom,
            format!("tent({},{},{})", a.as_f64(), b.as_f64(), c.as_f64()),
            vec![
                Piece::Affine { lo: a, hi: b, c0: -a * up, c1: up },
                Piece::Affine { lo: b, hi: c, c0: c * down, c1: -down },
            ],
        )
    }

    /// Three-piece function from the inverse-square estimate: a normalized primitive of
    /// `u_r^{-2}` on `[r/2, r]`, then `t^{√(N-1)}` up to `a`, then `a^{√(N-1)} eta0`.
    pub fn lemma24(r: T, a: T, profile: &RadialProfile<T>) -> Result<Self> {
        let quarter = T::lit(0.25);
        let half_r = r * T::lit(0.5);
        if !(r > T::zero() && r < a && a < quarter) {
            return Err(invalid(format!("lemma24 needs 0 < r < a < 1/4, got r = {r}, a = {a}")));
        }
        if half_r < profile.grid().r_min() {
            return Err(invalid(format!("r/2 = {half_r} lies below the grid")));
        }
        let s = T::from_usize_lossy(profile.dimension() - 1).sqrt();
        let (xs, ur) = profile.sample_range(half_r, r, |_, _, d| d)?;
        if ur.iter().any(|d| *d == T::zero() || !d.is_finite()) {
            return Err(crate::LabError::DerivativeVanishes { r: r.as_f64() });
        }
        let inv: Vec<T> = ur.iter().map(|d| T::one() / (*d * *d)).collect();
        let c = quad::cumulative(&xs, &inv);
        let total = c[c.len() - 1];
        let rs = r.powf(s);
        let values: Vec<T> = c.iter().map(|ci| rs * *ci / total).collect();
        let slopes: Vec<T> = inv.iter().map(|w| rs * *w / total).collect();
        let mut pieces = vec![
            Piece::Sampled { xs, values, slopes },
            Piece::Power { lo: r, hi: a, coef: T::one(), exponent: s },
        ];
        let tail = Self::eta0_scaled(a, a.powf(s), TestFunctionKind::Lemma24Composite, String::new())?;
        pieces.extend(tail.pieces);
        Self::from_pieces(
            TestFunctionKind::Lemma24Composite,
            format!("lemma24(r={:.6e},a={:.6e})", r.as_f64(), a.as_f64()),
            pieces,
        )
    }

    pub fn kind(&self) -> TestFunctionKind {
        self.kind
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn pieces(&self) -> &[Piece<T>] {
        &self.pieces
    }

    pub fn support(&self) -> (T, T) {
        (self.pieces[0].span().0, self.pieces[self.pieces.len() - 1].span().1)
    }

    /// `(eta, eta')` at `t`; zero outside the support. At a junction the left piece wins.
    pub fn eval(&self, t: T) -> (T, T) {
        for p in &self.pieces {
            let (lo, hi) = p.span();
            if t >= lo && t <= hi {
                return p.eval(t);
            }
        }
        (T::zero(), T::zero())
    }

    pub fn value(&self, t: T) -> T {
        self.eval(t).0
    }

    /// Largest jump of `eta` across the junctions.
    pub fn junction_gap(&self) -> T {
        self.pieces
            .windows(2)
            .map(|w| {
                let x = w[0].span().1;
                (w[0].eval(x).0 - w[1].eval(x).0).abs()
            })
            .fold(T::zero(), T::max)
    }
}
