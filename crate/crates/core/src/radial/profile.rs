use serde::{Deserialize, Serialize};

use crate::error::{invalid, LabError, Result};
use crate::scalar::Real;

use super::grid::{Grid, GridKind};
use super::nonlinearity::Nonlinearity;
use super::quad;

/// How the samples of a profile were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    ClosedForm,
    Integrated,
    Tabulated,
}

/// A radial function sampled on a grid together with its radial derivative.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile<T> {
    dimension: usize,
    grid: Grid<T>,
    u: Vec<T>,
    u_r: Vec<T>,
    provenance: Provenance,
}

impl<T: Real> RadialProfile<T> {
    pub fn new(dimension: usize, grid: Grid<T>, u: Vec<T>, u_r: Vec<T>, provenance: Provenance) -> Result<Self> {
        if dimension < 2 {
            return Err(invalid(format!("dimension must be at least 2, got {dimension}")));
        }
        if u.len() != grid.len() || u_r.len() != grid.len() {
            return Err(invalid("u and u_r must match the grid length"));
        }
        Ok(RadialProfile { dimension, grid, u, u_r, provenance })
    }

    /// Samples closed-form `u` and `u'` on the grid.
    pub fn closed_form<U, D>(dimension: usize, grid: Grid<T>, u: U, du: D) -> Result<Self>
    where
        U: Fn(T) -> T,
        D: Fn(T) -> T,
    {
        let uv = grid.nodes().iter().map(|&r| u(r)).collect();
        let dv = grid.nodes().iter().map(|&r| du(r)).collect();
        Self::new(dimension, grid, uv, dv, Provenance::ClosedForm)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn nodes(&self) -> &[T] {
        self.grid.nodes()
    }

    pub fn u(&self) -> &[T] {
        &self.u
    }

    pub fn u_r(&self) -> &[T] {
        &self.u_r
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    /// Copy with every `u` value shifted by `delta`; `u_r` untouched.
    pub fn with_u_perturbed(&self, delta: impl Fn(T) -> T) -> Self {
        let mut out = self.clone();
        for (v, &r) in out.u.iter_mut().zip(self.grid.nodes()) {
            *v = *v + delta(r);
        }
        out.provenance = Provenance::Tabulated;
        out
    }

    /// `u(r)` by cubic Hermite interpolation of `(u, u_r)`.
    pub fn u_at(&self, r: T) -> T {
        let nodes = self.grid.nodes();
        let i = self.grid.interval_of(r);
        let h = nodes[i + 1] - nodes[i];
        let t = (r - nodes[i]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let two = T::lit(2.0);
        let three = T::lit(3.0);
        let h00 = two * t3 - three * t2 + T::one();
        let h10 = t3 - two * t2 + t;
        let h01 = -two * t3 + three * t2;
        let h11 = t3 - t2;
        h00 * self.u[i] + h10 * h * self.u_r[i] + h01 * self.u[i + 1] + h11 * h * self.u_r[i + 1]
    }

    /// `u_r(r)` by cubic Lagrange interpolation on the four nearest nodes.
    pub fn u_r_at(&self, r: T) -> T {
        let nodes = self.grid.nodes();
        let n = nodes.len();
        if n < 4 {
            let i = self.grid.interval_of(r);
            let t = (r - nodes[i]) / (nodes[i + 1] - nodes[i]);
            return self.u_r[i] + t * (self.u_r[i + 1] - self.u_r[i]);
        }
        let i = self.grid.interval_of(r);
        let j0 = i.saturating_sub(1).min(n - 4);
        let mut acc = T::zero();
        for a in j0..j0 + 4 {
            let mut w = T::one();
            for b in j0..j0 + 4 {
                if a != b {
                    w = w * (r - nodes[b]) / (nodes[a] - nodes[b]);
                }
            }
            acc = acc + w * self.u_r[a];
        }
        acc
    }

    /// Fourth-order integral over `[lo, hi]` of `g(r, u, u_r)`, evaluated on the grid
    /// nodes inside the range plus interpolated endpoints.
    pub fn integrate<G>(&self, lo: T, hi: T, g: G) -> Result<T>
    where
        G: Fn(T, T, T) -> T,
    {
        let (xs, ys) = self.sample_range(lo, hi, g)?;
        Ok(quad::integrate_samples(&xs, &ys))
    }

    /// Abscissae and integrand values used by [`RadialProfile::integrate`].
    pub fn sample_range<G>(&self, lo: T, hi: T, g: G) -> Result<(Vec<T>, Vec<T>)>
    where
        G: Fn(T, T, T) -> T,
    {
        let slack = T::epsilon() * T::lit(64.0);
        if !(lo < hi) {
            return Err(invalid(format!("empty or inverted range [{lo}, {hi}]")));
        }
        if lo < self.grid.r_min() * (T::one() - slack) || hi > T::one() + slack {
            return Err(invalid(format!("range [{lo}, {hi}] leaves the grid span")));
        }
        let nodes = self.grid.nodes();
        let merge = T::lit(1e-9);
        let mut xs = vec![lo];
        let mut ys = vec![g(lo, self.u_at(lo), self.u_r_at(lo))];
        for i in self.grid.interior_range(lo, hi) {
            let r = nodes[i];
            if (r - lo) <= merge * r || (hi - r) <= merge * r {
                continue;
            }
            xs.push(r);
            ys.push(g(r, self.u[i], self.u_r[i]));
        }
        xs.push(hi);
        ys.push(g(hi, self.u_at(hi), self.u_r_at(hi)));
        Ok((xs, ys))
    }

    /// Radius below which `u_r` keeps a single strict sign, capped at `cap`.
    pub fn monotonicity_radius(&self, cap: T) -> Option<T> {
        let nodes = self.grid.nodes();
        let s0 = self.u_r[0].signum();
        if self.u_r[0] == T::zero() {
            return None;
        }
        for (i, (&r, &d)) in nodes.iter().zip(&self.u_r).enumerate() {
            if r > cap {
                return Some(cap);
            }
            if d == T::zero() || d.signum() != s0 {
                return if i == 0 { None } else { Some(nodes[i - 1]) };
            }
        }
        Some(cap.min(T::one()))
    }
}

/// Pointwise `-u'' - ((N-1)/r) u' - f(u)` on the interior nodes `1..n-1`.
///
/// `u''` is the three-point nonuniform difference of the stored `u_r` samples, which
/// stays well conditioned next to the center where `u` is nearly constant.
pub fn residual<T: Real>(profile: &RadialProfile<T>, nl: &Nonlinearity<T>) -> Vec<T> {
    residual_terms(profile, nl).into_iter().map(|(res, _)| res).collect()
}

/// Residual divided by the magnitude of the individual terms of the equation.
pub fn relative_residual<T: Real>(profile: &RadialProfile<T>, nl: &Nonlinearity<T>) -> Vec<T> {
    residual_terms(profile, nl)
        .into_iter()
        .map(|(res, scale)| if scale > T::zero() { res.abs() / scale } else { res.abs() })
        .collect()
}

fn residual_terms<T: Real>(profile: &RadialProfile<T>, nl: &Nonlinearity<T>) -> Vec<(T, T)> {
    let r = profile.nodes();
    let u = profile.u();
    let du = profile.u_r();
    let nm1 = T::from_usize_lossy(profile.dimension()) - T::one();
    (1..r.len() - 1)
        .map(|i| {
            let hm = r[i] - r[i - 1];
            let hp = r[i + 1] - r[i];
            let upp = (hm * hm * du[i + 1] - hp * hp * du[i - 1] + (hp * hp - hm * hm) * du[i])
                / (hm * hp * (hm + hp));
            let drift = nm1 / r[i] * du[i];
            let src = nl.f(u[i]);
            let res = -upp - drift - src;
            (res, upp.abs() + drift.abs() + src.abs())
        })
        .collect()
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "")]
struct GridHeader<T: Real> {
    kind: GridKind,
    r_min: T,
    n: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "")]
struct ProfileFile<T: Real> {
    #[serde(rename = "N")]
    dimension: usize,
    grid: GridHeader<T>,
    nodes: Vec<T>,
    u: Vec<T>,
    u_r: Vec<T>,
    provenance: Provenance,
}

impl<T: Real> Serialize for RadialProfile<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ProfileFile {
            dimension: self.dimension,
            grid: GridHeader { kind: self.grid.kind(), r_min: self.grid.r_min(), n: self.grid.len() },
            nodes: self.grid.nodes().to_vec(),
            u: self.u.clone(),
            u_r: self.u_r.clone(),
            provenance: self.provenance,
        }
        .serialize(s)
    }
}

impl<'de, T: Real> Deserialize<'de> for RadialProfile<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error;
        let f = ProfileFile::<T>::deserialize(d)?;
        if f.grid.n != f.nodes.len() {
            return Err(D::Error::custom("grid.n does not match the node count"));
        }
        let grid = Grid::from_nodes(f.grid.kind, f.nodes).map_err(D::Error::custom)?;
        RadialProfile::new(f.dimension, grid, f.u, f.u_r, f.provenance).map_err(D::Error::custom)
    }
}

impl<T: Real> RadialProfile<T> {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("profile serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| LabError::Io(e.to_string()))
    }

    /// CSV with header `r,u,u_r`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,u,u_r\n");
        for ((r, u), d) in self.nodes().iter().zip(&self.u).zip(&self.u_r) {
            out.push_str(&format!("{r:e},{u:e},{d:e}\n"));
        }
        out
    }
}
