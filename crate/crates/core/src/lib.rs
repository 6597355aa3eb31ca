//! Quaternionic phase solutions of the Schrödinger equation with a
//! non-anti-hermitian momentum, and their Aharonov-Bohm realization.
//!
//! Layers, bottom up:
//!
//! - [`quaternion`]: symplectic quaternion arithmetic `q = z + ζj`.
//! - [`field`]: uniform grids, finite differences, line integrals and
//!   path-ordered products.
//! - [`phase`]: the unit phase `K`, the vector potentials `(α, β)` and the
//!   constraint residuals that certify solution families.
//! - [`sim`]: time evolution with right-acting `i`, conservation
//!   diagnostics and finite matrix models of the eigenproblem split.
//! - [`ab`]: the solenoid example, holonomies and interference.

pub mod ab;
pub mod error;
pub mod field;
pub mod io;
pub mod phase;
pub mod quaternion;
pub mod sim;

pub use error::{Error, Result};
pub use quaternion::{k_from_angles, Quaternion, UnitPhaseAngles};

/// Toolkit identifier embedded in every report.
pub const VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));
