use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::scalar::Real;

/// Node placement strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridKind {
    Uniform,
    Logarithmic,
    /// Geometric on `[r_min, 1/4]`, uniform on `[1/4, 1]`.
    Hybrid,
}

impl GridKind {
    pub fn as_str(self) -> &'static str {
        match self {
            GridKind::Uniform => "uniform",
            GridKind::Logarithmic => "logarithmic",
            GridKind::Hybrid => "hybrid",
        }
    }
}

/// Default node count for analysis grids.
pub const DEFAULT_GRID_N: usize = 4096;
/// Default smallest radius for analysis grids.
pub const DEFAULT_R_MIN: f64 = 1e-6;

const MIN_NODES: usize = 16;
const HYBRID_BREAK: f64 = 0.25;

/// Strictly increasing radii in `(0, 1]` ending exactly at 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    kind: GridKind,
    nodes: Vec<T>,
}

impl<T: Real> Grid<T> {
    /// Builds a grid of `n` nodes from `r_min` to 1.
    pub fn build(kind: GridKind, n: usize, r_min: T) -> Result<Self> {
        if n < MIN_NODES {
            return Err(invalid(format!("grid needs at least {MIN_NODES} nodes, got {n}")));
        }
        if !(r_min > T::zero() && r_min < T::one()) {
            return Err(invalid(format!("r_min must lie in (0,1), got {r_min}")));
        }
        let nodes = match kind {
            GridKind::Uniform => uniform(r_min, T::one(), n),
            GridKind::Logarithmic => geometric(r_min, n),
            GridKind::Hybrid => {
                let brk = T::lit(HYBRID_BREAK);
                if r_min >= brk {
                    return Err(invalid("hybrid grid needs r_min < 1/4"));
                }
                let n_log = n / 2;
                let mut nodes: Vec<T> = (0..n_log)
                    .map(|k| {
                        let t = T::from_usize_lossy(k) / T::from_usize_lossy(n_log);
                        r_min * (brk / r_min).powf(t)
                    })
                    .collect();
                nodes.extend(uniform(brk, T::one(), n - n_log));
                nodes
            }
        };
        Self::from_nodes(kind, nodes)
    }

    /// The default analysis grid: logarithmic, 4096 nodes, `r_min = 1e-6`.
    pub fn default_log() -> Self {
        Self::build(GridKind::Logarithmic, DEFAULT_GRID_N, T::lit(DEFAULT_R_MIN))
            .expect("default grid parameters are valid")
    }

    /// Wraps explicit nodes after validating the grid invariants.
    pub fn from_nodes(kind: GridKind, nodes: Vec<T>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(invalid("grid needs at least two nodes"));
        }
        if !(nodes[0] > T::zero()) {
            return Err(invalid("first node must be positive"));
        }
        if nodes[nodes.len() - 1] != T::one() {
            return Err(invalid("last node must be exactly 1"));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("nodes must be strictly increasing"));
        }
        Ok(Grid { kind, nodes })
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn r_min(&self) -> T {
        self.nodes[0]
    }

    /// Index `i` with `nodes[i] <= r < nodes[i+1]`, clamped to a valid interval.
    pub fn interval_of(&self, r: T) -> usize {
        let n = self.nodes.len();
        let idx = self.nodes.partition_point(|&x| x <= r);
        idx.saturating_sub(1).min(n - 2)
    }

    /// Indices of the nodes lying strictly inside `(lo, hi)`.
    pub fn interior_range(&self, lo: T, hi: T) -> std::ops::Range<usize> {
        let start = self.nodes.partition_point(|&x| x <= lo);
        let end = self.nodes.partition_point(|&x| x < hi);
        start..end.max(start)
    }

    /// Average spacing in `log r`; zero-order measure of resolution.
    pub fn log_spacing(&self) -> T {
        -self.r_min().ln() / T::from_usize_lossy(self.nodes.len() - 1)
    }
}

fn uniform<T: Real>(lo: T, hi: T, n: usize) -> Vec<T> {
    let mut v: Vec<T> = (0..n)
        .map(|k| lo + (hi - lo) * T::from_usize_lossy(k) / T::from_usize_lossy(n - 1))
        .collect();
    v[n - 1] = hi;
    v
}

fn geometric<T: Real>(r_min: T, n: usize) -> Vec<T> {
    let last = T::from_usize_lossy(n - 1);
    let mut v: Vec<T> = (0..n)
        .map(|k| r_min.powf((last - T::from_usize_lossy(k)) / last))
        .collect();
    v[0] = r_min;
    v[n - 1] = T::one();
    v
}
