//! Finite-volume solver and estimate audits for the two-dimensional
//! incompressible magneto-micropolar system on the unit square.

pub mod error;
pub mod estimates;
pub mod evolution;
pub mod experiments;
pub mod fields;
pub mod stokes;

pub use error::{Error, Result};
pub use fields::{BoundaryMode, FluidParams, GridSpec, ScalarField, State, VectorField};
