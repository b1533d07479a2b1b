//! Exact construction of planar points with a prescribed Euclidean Dirichlet
//! constant, plus the tools to check the construction afterwards.

pub mod approximation_analysis;
pub mod conic_toolkit;
pub mod error;
pub mod exact_numerics;
pub mod lattice_geometry;
pub mod record;
pub mod spectrum_construction;

pub use error::Error;
