//! Pseudo-spectral mild solutions of the forced fractional Boussinesq system
//! on a periodic box, together with numerical estimators for the Morrey-type
//! norms used to control them.
//!
//! Modules, bottom up:
//! - [`spectral`]: grids, transforms, derivatives, dealiasing.
//! - [`operators`]: fractional Laplacian, heat semigroup, Leray projector,
//!   Riesz smoothing, pressure recovery and physical-space kernels.
//! - [`spaces`]: trajectories, exponent bookkeeping and norm estimators.
//! - [`solver`]: Duhamel integrals, Picard iteration and an exponential
//!   integrator used as an independent reference.
//! - [`scaling`]: rescaling maps and the invariance / equivalence checks.
//! - [`io`]: field files, configs, data generation and the batch runner.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod io;
pub mod operators;
pub mod par;
pub mod scaling;
pub mod solver;
pub mod spaces;
pub mod spectral;

pub use error::{Error, Result};
pub use spectral::{make_grid, Field, ScalarField, SpectralGrid, Spectrum, VectorField};
