//! Numerical laboratory for semi-stable radial solutions of `-Δu = f(u)` on the
//! punctured unit ball `0 < |x| <= 1`.
//!
//! All numerical code is generic over [`Real`] (`f32` or `f64`); the `*64` aliases
//! below are the concrete types used by the command-line tool and the test suites.

pub mod catalog;
pub mod dyadic;
pub mod error;
pub mod estimates;
pub mod gelfand;
pub mod radial;
pub mod scalar;
pub mod stability;
pub mod verify;
pub mod weak;

pub use error::{LabError, Result};
pub use radial::{Constants, Grid, GridKind, Nonlinearity, Provenance, RadialProfile};
pub use scalar::Real;

pub type Grid64 = Grid<f64>;
pub type Profile64 = RadialProfile<f64>;
pub type Nonlinearity64 = Nonlinearity<f64>;
pub type CatalogEntry64 = catalog::CatalogEntry<f64>;
pub type StabilityReport64 = stability::StabilityReport<f64>;
pub type EstimateReport64 = estimates::EstimateReport<f64>;
pub type WeakClassification64 = weak::WeakClassification<f64>;
pub type BifurcationDiagram64 = gelfand::BifurcationDiagram<f64>;

pub type Grid32 = Grid<f32>;
pub type Profile32 = RadialProfile<f32>;
pub type Nonlinearity32 = Nonlinearity<f32>;
