//! The unit phase `K = cos Θ e^{iΓ} + sin Θ e^{iΩ} j`, the connection
//! `Q = α i + β j` that makes `Φ = Kφ` solve the Schrödinger equation, and
//! residual evaluators for every constraint the pair must satisfy.

mod angle;
mod families;
mod potentials;
mod probe;
mod residual;
mod triple;

pub use angle::{AngleSpec, SampledAngle};
pub use families::{curl_fields, family_ab, family_simple, CurlFields, Family};
pub use potentials::{
    potentials_from_phase, reality_check, LambdaField, PotentialPair, REALITY_TOLERANCE, SINGULAR_TOLERANCE,
};
pub use probe::{constraint_violation, no_solution_probe, no_solution_probe_on, ProbeReport, NO_SOLUTION_THRESHOLD};
pub use residual::{
    coefficient_constraints, master_residual, reduced_prefactor, reduced_residual, reduced_residual_field,
    right_form_residual, split_residuals, GridMeta, ReducedForm, ResidualContext, ResidualReport,
};
pub use triple::{k_derivatives_analytic, DerivativeSource, KDerivatives, PhaseTriple};
