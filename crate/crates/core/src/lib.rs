//! Numerical laboratory for unstable stationary point-vortex configurations.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`]: the α-model interaction kernel, the point-vortex vector field
//!   and its first integrals.
//! * [`crystal`]: stationary vortex crystals (a regular polygon of unit
//!   vortices around a compensating central vortex).
//! * [`linearization`]: analytic and finite-difference Jacobians, the
//!   spectrum, the instability rate and the confinement constants.
//! * [`bounds`]: closed-form thresholds on the concentration exponent ν and
//!   the exit-time coefficient.
//! * [`ode`]: an adaptive Dormand–Prince 5(4) integrator with dense output
//!   and the escape experiment built on it.
//! * [`blob`]: vortex patches discretised as marker clouds and their moment
//!   diagnostics.
//! * [`domain`]: Schwarz–Christoffel hexagonal domains, their Robin function
//!   and single-vortex dynamics inside them.

pub mod blob;
pub mod bounds;
pub mod crystal;
pub mod domain;
pub mod eigen;
mod error;
pub mod export;
pub mod geom;
pub mod linearization;
pub mod model;
pub mod ode;

pub use error::{Result, VortexError};
pub use geom::Vec2;
pub use model::{AlphaModel, Configuration, PointVortex};

/// Crate version, embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
