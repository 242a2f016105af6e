//! Grids, staggered fields, discrete operators and norms.

pub mod field;
pub mod grid;
pub mod norms;
pub mod ops;
pub mod random;

pub use field::{FluidParams, ScalarField, ScalarPlacement, State, VectorField, VectorPlacement};
pub use grid::{BoundaryMode, Dims, GridSpec};
pub use norms::{lq_norm, sobolev_norms, Derivatives, LqNorm, SobolevNorms};
pub use ops::{
    cell_vorticity, curl2, div, grad, laplacian, mac_to_cells, perp_grad, scalar_laplacian,
    vector_laplacian, vorticity_adjoint, Laplacian,
};
pub use random::SineSeries;
