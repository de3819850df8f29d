//! Pseudo-spectral laboratory for three-dimensional MHD perturbations of
//! Couette flow with a background magnetic field `alpha (sigma, 0, 1)`,
//! written in shearing coordinates `X = x - y t, Y = y, Z = z`.

pub mod diagnostics;
pub mod error;
pub mod fft;
pub mod field;
pub mod grid;
pub mod linear_modes;
pub mod multipliers;
pub mod ode;
pub mod quadrature;
pub mod random;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
pub use field::{MhdState, SpectralScalarField, SpectralVectorField};
pub use grid::{Frequency, GridSpec, ModeClass, ModeIndex, PhysParams, RationalShearAngle};
