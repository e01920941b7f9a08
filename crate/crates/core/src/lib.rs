//! Kinetic energy densities of two- and three-dimensional electron gases in
//! a uniform magnetic field, Wigner-type transforms with their operator
//! identities, and the reduced one-dimensional density-matrix problem.

pub mod error;
pub mod grid;
pub mod kinetic2d;
pub mod kinetic3d;
pub mod landau;
mod numerics;
pub mod occupation;
pub mod reduce1d;
pub mod verify;
pub mod wigner;

pub use error::{Error, Result};
pub use grid::{GridFunction1D, GridFunction2D, GridFunction3D, GridSpec};
pub use landau::MagneticField;
pub use numerics::{adaptive_simpson, compensated_sum};
