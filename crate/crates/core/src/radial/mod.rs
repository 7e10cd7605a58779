//! Grids, sampled radial profiles, nonlinearities, ODE integration and quadrature.

pub mod constants;
pub mod grid;
pub mod nonlinearity;
pub mod ode;
pub mod profile;
pub mod quad;
pub mod solver;

pub use constants::Constants;
pub use grid::{Grid, GridKind, DEFAULT_GRID_N, DEFAULT_R_MIN};
pub use nonlinearity::{Nonlinearity, Table};
pub use profile::{relative_residual, residual, Provenance, RadialProfile};
pub use quad::integrate_weighted;
pub use solver::{integrate_inward, integrate_regular_ivp};
