//! Time evolution under `H Ψ = ħ ∂_t Ψ i` with `i` acting from the right,
//! conservation diagnostics, energy comparisons and finite matrix models.

mod energy;
mod evolve;
mod hamiltonian;
mod lattice;
mod matrix;

pub use energy::{box_mode, energy_equality_check, EnergyReport, EIGEN_VARIANCE_TOLERANCE};
pub use evolve::{
    check_stability, evolve, evolve_complex, probability_current, probability_density, total_probability, Evolution,
    ObservableRow, ObservableSeries, Scheme, SimulationParams, WaveState, STABILITY_LIMIT,
};
pub use hamiltonian::{momentum_apply, momentum_squared_apply, ComplexHamiltonian, HamiltonianSpec, LinkHamiltonian};
pub use lattice::{Boundary, Lattice};
pub use matrix::{
    decouple_commuting, CVec, decouple_noncommuting, eigen_split_residual, random_commuting_model, random_model,
    DecoupleReport, MatrixModel, NonCommutingReport, QuaternionEigenpair, SplitResidual,
};
