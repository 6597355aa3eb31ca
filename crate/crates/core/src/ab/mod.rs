//! The solenoid example: potentials, reconstructed phase angles, holonomies
//! along two paths and the resulting interference.

mod fields;
mod force;
mod holonomy;
mod interference;
mod setup;
mod solenoid;

pub use fields::{
    ab_phase_gradients, beta_curl_analytic, beta_field, curl_diagnostics, loop_closure, phase_gradient_curls_analytic,
    phase_gradients_at, AngleReconstruction, CurlDiagnostics, CurlFieldsSampled, LoopClosure,
};
pub use force::{lorentz_radial_force, Extraction, ForceMap, FORCE_LABEL};
pub use holonomy::{
    connection_at, holonomy_of_paths, holonomy_pair, loop_holonomy, noncommutativity_witness, HolonomyPair,
};
pub use interference::{
    complex_intensity, fit_fringe, interference_pattern, quaternion_intensity, wrap_phase, FringeFit,
    InterferenceResult, ScreenSample, FIT_CONDITION_LIMIT,
};
pub use setup::{ABSetup, AngleReference, HolonomySettings, PathGeometry, THETA_MARGIN};
pub use solenoid::{solenoid_alpha, SolenoidConfig};
