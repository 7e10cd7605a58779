use serde::{Deserialize, Serialize};

use crate::error::{invalid, LabError, Result};
use crate::scalar::Real;

/// The source term `f` of `-Δu = f(u)` together with its derivative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "kebab-case")]
#[serde(bound = "")]
pub enum Nonlinearity<T: Real> {
    /// `f(s) = λ e^s`.
    Exponential { lambda: T },
    /// `f(s) = λ (1 + s)^p`.
    Power { p: T, lambda: T },
    /// `f(s) = -α(α+N-2) s^{1-2/α}`, the source that makes `r^α` an exact solution.
    ///
    /// The same power formula is used for `0 < s < 1`; on `(0,1]` the solution `r^α`
    /// only visits `s >= 1`, so that extension is never exercised by the closed form.
    AlphaFamily { alpha: T, dimension: usize },
    Zero,
    /// Piecewise-linear table of `f` and `f'`, extended linearly beyond its ends.
    Tabulated(Table<T>),
}

/// Sampled `(s, f(s), f'(s))` triples with strictly increasing `s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Table<T: Real> {
    pub s: Vec<T>,
    pub f: Vec<T>,
    pub df: Vec<T>,
}

impl<T: Real> Table<T> {
    pub fn new(s: Vec<T>, f: Vec<T>, df: Vec<T>) -> Result<Self> {
        if s.len() < 2 || s.len() != f.len() || s.len() != df.len() {
            return Err(LabError::InvalidNonlinearity(
                "table needs at least two rows of equal length".into(),
            ));
        }
        if s.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(LabError::InvalidNonlinearity("table abscissae must increase".into()));
        }
        Ok(Table { s, f, df })
    }

    /// Samples a closed-form pair on `[lo, hi]`.
    pub fn sample<F, D>(lo: T, hi: T, n: usize, f: F, df: D) -> Result<Self>
    where
        F: Fn(T) -> T,
        D: Fn(T) -> T,
    {
        let n = n.max(2);
        let s: Vec<T> = (0..n)
            .map(|k| lo + (hi - lo) * T::from_usize_lossy(k) / T::from_usize_lossy(n - 1))
            .collect();
        let fv = s.iter().map(|&x| f(x)).collect();
        let dv = s.iter().map(|&x| df(x)).collect();
        Self::new(s, fv, dv)
    }

    fn locate(&self, x: T) -> (usize, T) {
        let n = self.s.len();
        let i = self.s.partition_point(|&v| v <= x).saturating_sub(1).min(n - 2);
        let t = (x - self.s[i]) / (self.s[i + 1] - self.s[i]);
        (i, t)
    }

    fn eval(&self, x: T) -> T {
        let n = self.s.len();
        if x < self.s[0] {
            return self.f[0] + self.df[0] * (x - self.s[0]);
        }
        if x > self.s[n - 1] {
            return self.f[n - 1] + self.df[n - 1] * (x - self.s[n - 1]);
        }
        let (i, t) = self.locate(x);
        self.f[i] + t * (self.f[i + 1] - self.f[i])
    }

    fn eval_derivative(&self, x: T) -> T {
        let n = self.s.len();
        if x < self.s[0] {
            return self.df[0];
        }
        if x > self.s[n - 1] {
            return self.df[n - 1];
        }
        let (i, t) = self.locate(x);
        self.df[i] + t * (self.df[i + 1] - self.df[i])
    }
}

impl<T: Real> Nonlinearity<T> {
    /// `f ≡ c`, stored as a two-row table.
    pub fn constant(c: T) -> Self {
        Nonlinearity::Tabulated(Table {
            s: vec![-T::one(), T::one()],
            f: vec![c, c],
            df: vec![T::zero(), T::zero()],
        })
    }

    /// `f(s) = k s`, exact under linear interpolation.
    pub fn linear(k: T) -> Self {
        Nonlinearity::Tabulated(Table {
            s: vec![-T::one(), T::one()],
            f: vec![-k, k],
            df: vec![k, k],
        })
    }

    pub fn alpha_family(alpha: T, dimension: usize) -> Result<Self> {
        if !(alpha < T::zero()) {
            return Err(invalid(format!("alpha family needs alpha < 0, got {alpha}")));
        }
        if dimension < 2 {
            return Err(invalid("dimension must be at least 2"));
        }
        Ok(Nonlinearity::AlphaFamily { alpha, dimension })
    }

    fn alpha_coefficient(alpha: T, dimension: usize) -> T {
        let n = T::from_usize_lossy(dimension);
        -alpha * (alpha + n - T::lit(2.0))
    }

    pub fn f(&self, s: T) -> T {
        match self {
            Nonlinearity::Exponential { lambda } => *lambda * s.exp(),
            Nonlinearity::Power { p, lambda } => *lambda * (T::one() + s).powf(*p),
            Nonlinearity::AlphaFamily { alpha, dimension } => {
                Self::alpha_coefficient(*alpha, *dimension) * s.powf(T::one() - T::lit(2.0) / *alpha)
            }
            Nonlinearity::Zero => T::zero(),
            Nonlinearity::Tabulated(t) => t.eval(s),
        }
    }

    pub fn df(&self, s: T) -> T {
        match self {
            Nonlinearity::Exponential { lambda } => *lambda * s.exp(),
            Nonlinearity::Power { p, lambda } => *lambda * *p * (T::one() + s).powf(*p - T::one()),
            Nonlinearity::AlphaFamily { alpha, dimension } => {
                let two = T::lit(2.0);
                Self::alpha_coefficient(*alpha, *dimension) * (T::one() - two / *alpha) * s.powf(-two / *alpha)
            }
            Nonlinearity::Zero => T::zero(),
            Nonlinearity::Tabulated(t) => t.eval_derivative(s),
        }
    }

    /// `r² f(u)` evaluated as `exp(2 log r + log f)` where possible, so that
    /// exponential sources with huge center values stay finite in `log r` variables.
    pub fn scaled_source(&self, log_r: T, s: T) -> T {
        let two = T::lit(2.0);
        match self {
            Nonlinearity::Exponential { lambda } if *lambda > T::zero() => {
                (two * log_r + lambda.ln() + s).exp()
            }
            Nonlinearity::Power { p, lambda } if *lambda > T::zero() && s > -T::one() => {
                (two * log_r + lambda.ln() + *p * (T::one() + s).ln()).exp()
            }
            _ => (two * log_r).exp() * self.f(s),
        }
    }

    /// `f'(s)/f(s)`, evaluated without forming `f` for the closed-form variants.
    pub fn log_derivative(&self, s: T) -> T {
        match self {
            Nonlinearity::Exponential { .. } => T::one(),
            Nonlinearity::Power { p, .. } => *p / (T::one() + s),
            Nonlinearity::AlphaFamily { alpha, .. } => (T::one() - T::lit(2.0) / *alpha) / s,
            _ => self.df(s) / self.f(s),
        }
    }

    /// Primitive `F` with `F' = f` and `F(0) = 0`, when known in closed form.
    pub fn primitive(&self, s: T) -> Option<T> {
        match self {
            Nonlinearity::Exponential { lambda } => Some(*lambda * s.exp_m1()),
            Nonlinearity::Power { p, lambda } => {
                let q = *p + T::one();
                Some(*lambda * ((T::one() + s).powf(q) - T::one()) / q)
            }
            Nonlinearity::Zero => Some(T::zero()),
            _ => None,
        }
    }

    pub fn has_primitive(&self) -> bool {
        self.primitive(T::zero()).is_some()
    }

    /// Multiplies the source by `c`. The alpha family is not closed under scaling.
    pub fn scaled(&self, c: T) -> Result<Self> {
        Ok(match self {
            Nonlinearity::Exponential { lambda } => Nonlinearity::Exponential { lambda: *lambda * c },
            Nonlinearity::Power { p, lambda } => Nonlinearity::Power { p: *p, lambda: *lambda * c },
            Nonlinearity::Zero => Nonlinearity::Zero,
            Nonlinearity::AlphaFamily { .. } => {
                return Err(LabError::InvalidNonlinearity("alpha family cannot be rescaled".into()))
            }
            Nonlinearity::Tabulated(t) => Nonlinearity::Tabulated(Table {
                s: t.s.clone(),
                f: t.f.iter().map(|&v| v * c).collect(),
                df: t.df.iter().map(|&v| v * c).collect(),
            }),
        })
    }

    /// True when `f >= 0` on `[lo, hi]`, judged on samples for tabulated data.
    pub fn is_nonnegative_on(&self, lo: T, hi: T) -> bool {
        match self {
            Nonlinearity::Exponential { lambda } => *lambda >= T::zero(),
            Nonlinearity::Power { lambda, .. } => *lambda >= T::zero() && lo >= -T::one(),
            Nonlinearity::AlphaFamily { alpha, dimension } => {
                Self::alpha_coefficient(*alpha, *dimension) >= T::zero()
            }
            Nonlinearity::Zero => true,
            Nonlinearity::Tabulated(t) => {
                let inside = t.s.iter().zip(&t.f).filter(|(s, _)| **s >= lo && **s <= hi);
                inside.into_iter().all(|(_, f)| *f >= T::zero())
                    && self.f(lo) >= T::zero()
                    && self.f(hi) >= T::zero()
            }
        }
    }

    /// Short identifier used in reports and the CLI (`exp`, `power:p`, `alpha:a`, ...).
    pub fn descriptor(&self) -> String {
        match self {
            Nonlinearity::Exponential { lambda } => format!("exp(lambda={lambda})"),
            Nonlinearity::Power { p, lambda } => format!("power:{p}(lambda={lambda})"),
            Nonlinearity::AlphaFamily { alpha, dimension } => format!("alpha:{alpha}(N={dimension})"),
            Nonlinearity::Zero => "zero".into(),
            Nonlinearity::Tabulated(t) => format!("table[{}]", t.s.len()),
        }
    }

    /// Largest relative mismatch between `f'` and a centered difference of `f`
    /// over the given sample points.
    pub fn derivative_consistency(&self, samples: &[T]) -> T {
        let mut worst = T::zero();
        for &s in samples {
            let h = T::epsilon().cbrt() * (T::one() + s.abs());
            let fd = (self.f(s + h) - self.f(s - h)) / (h + h);
            let d = self.df(s);
            let err = (fd - d).abs() / (T::one() + d.abs());
            if err > worst {
                worst = err;
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_family_matches_closed_form() {
        let nl = Nonlinearity::alpha_family(-6.0, 10).unwrap();
        // -α(α+N-2) = 6·2 = 12, exponent 1 - 2/α = 4/3
        assert!((nl.f(8.0) - 12.0 * 8f64.powf(4.0 / 3.0)).abs() < 1e-10);
        // f'(u_α(r)) r² = -(α-2)(α+N-2) = 16
        let r: f64 = 0.3;
        let u = r.powf(-6.0);
        assert!((nl.df(u) * r * r - 16.0).abs() < 1e-12);
        assert!(Nonlinearity::alpha_family(0.5, 3).is_err());
    }

    #[test]
    fn derivatives_consistent() {
        let pts = [1.0, 1.5, 3.0, 10.0];
        let cases: Vec<Nonlinearity<f64>> = vec![
            Nonlinearity::Exponential { lambda: 2.0 },
            Nonlinearity::Power { p: 3.0, lambda: 0.5 },
            Nonlinearity::alpha_family(-1.5, 4).unwrap(),
            Nonlinearity::Zero,
            Nonlinearity::linear(3.0),
        ];
        for nl in cases {
            assert!(nl.derivative_consistency(&pts) < 1e-6, "{}", nl.descriptor());
        }
    }

    #[test]
    fn scaled_source_matches_direct_product() {
        let nl = Nonlinearity::Power { p: 2.5, lambda: 3.0 };
        let (lr, s) = (-1.3f64, 0.7);
        let direct = (2.0 * lr).exp() * nl.f(s);
        assert!((nl.scaled_source(lr, s) / direct - 1.0).abs() < 1e-13);
        let e = Nonlinearity::Exponential { lambda: 1.0f64 };
        // r² e^u with u = 1000, r = e^{-500}: exactly 1
        assert!((e.scaled_source(-500.0, 1000.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn table_interpolates_and_extrapolates() {
        let t = Nonlinearity::linear(2.0);
        assert_eq!(t.f(0.25), 0.5);
        assert_eq!(t.f(5.0), 10.0);
        assert_eq!(t.df(-7.0), 2.0);
        let c = Nonlinearity::constant(6.0);
        assert_eq!(c.f(123.0), 6.0);
        assert_eq!(c.df(0.0), 0.0);
        assert!(Table::new(vec![1.0, 0.0], vec![0.0, 0.0], vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn primitives() {
        let p = Nonlinearity::Power { p: 2.0f64, lambda: 3.0 };
        // ∫_0^1 3(1+s)^2 ds = (8-1)
        assert!((p.primitive(1.0).unwrap() - 7.0).abs() < 1e-12);
        assert!(!Nonlinearity::<f64>::linear(1.0).has_primitive());
    }

    #[test]
    fn serde_round_trip() {
        let nl = Nonlinearity::Power { p: 4.0 / 3.0, lambda: 12.0 };
        let js = serde_json::to_string(&nl).unwrap();
        let back: Nonlinearity<f64> = serde_json::from_str(&js).unwrap();
        assert_eq!(nl, back);
    }
}
