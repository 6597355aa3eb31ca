//! Uniform-grid fields, finite-difference operators and path integrals.

mod grid;
mod ops;
mod path;

pub use grid::{FieldValue, GridSpec, ScalarField, VectorField};
pub use ops::{convergence_order, fd_curl, fd_divergence, fd_gradient, fd_laplacian, fd_partial};
pub use path::{line_integral, path_ordered_product, Polyline};
