//! Run configurations. Every file carries `schema_version` and rejects
//! unknown keys; values are checked against module preconditions before
//! anything is computed.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use qab_core::ab::{ABSetup, Extraction};
use qab_core::field::{GridSpec, ScalarField};
use qab_core::phase::{family_ab, family_simple, AngleSpec, DerivativeSource, Family, PhaseTriple, SampledAngle};
use qab_core::sim::SimulationParams;
use qab_core::Quaternion;

use crate::report::UsageError;

pub const SCHEMA_VERSION: u32 = 1;

/// Reads and parses a config, then checks the schema version.
pub fn load<T: DeserializeOwned + Versioned>(path: &Path) -> Result<T, UsageError> {
    let text = fs::read_to_string(path).map_err(|e| UsageError(format!("cannot read {}: {e}", path.display())))?;
    let cfg: T = serde_json::from_str(&text).map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
    if cfg.schema_version() != SCHEMA_VERSION {
        return Err(UsageError(format!(
            "{}: schema_version {} is not supported (expected {SCHEMA_VERSION})",
            path.display(),
            cfg.schema_version()
        )));
    }
    Ok(cfg)
}

pub trait Versioned {
    fn schema_version(&self) -> u32;
}

macro_rules! versioned {
    ($($t:ty),*) => {
        $(impl Versioned for $t {
            fn schema_version(&self) -> u32 {
                self.schema_version
            }
        })*
    };
}

versioned!(VerifyConfig, EvolveConfig, PatternConfig, HolonomyConfig, SplitConfig, FieldsConfig);

fn usage<E: std::fmt::Display>(what: &str) -> impl FnOnce(E) -> UsageError + '_ {
    move |e| UsageError(format!("{what}: {e}"))
}

/// Node counts and extents of a rectangular grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub nodes: [usize; 2],
    pub x: [f64; 2],
    pub y: [f64; 2],
}

impl GridConfig {
    pub fn build(&self) -> Result<GridSpec, UsageError> {
        GridSpec::spanning(self.nodes[0], self.nodes[1], self.x, self.y).map_err(usage("grid"))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilyConfig {
    /// `K = e^{iΩ} L` with a constant unit quaternion `L = [re, i, j, k]`.
    Simple { omega: AngleSpec, l: [f64; 4] },
    /// Constant `Θ` with `λ = −tan Θ e^{i(Γ+Ω)}`.
    Ab { theta: f64, gamma: AngleSpec, omega: AngleSpec },
}

impl FamilyConfig {
    pub fn build(&self, grid: &GridSpec) -> Result<Family, UsageError> {
        match self {
            Self::Simple { omega, l } => {
                family_simple(&SampledAngle::from_spec(grid, omega), Quaternion::from_real4(*l)).map_err(usage("family"))
            }
            Self::Ab { theta, gamma, omega } => {
                let ph = PhaseTriple::from_specs(grid, &AngleSpec::constant(*theta), gamma, omega);
                family_ab(&ph).map_err(usage("family"))
            }
        }
    }
}

/// Complex test function `φ = re + i·im`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhiConfig {
    pub re: AngleSpec,
    pub im: AngleSpec,
}

impl Default for PhiConfig {
    fn default() -> Self {
        Self {
            re: AngleSpec::Sinusoid { offset: 1.0, amplitude: 0.3, wavevector: [0.6, 0.4], phase: 0.0 },
            im: AngleSpec::Sinusoid { offset: 0.0, amplitude: 0.4, wavevector: [0.4, -0.5], phase: 0.0 },
        }
    }
}

impl PhiConfig {
    pub fn sample(&self, grid: &GridSpec) -> ScalarField<Complex64> {
        ScalarField::sample(grid, |p| Complex64::new(self.re.value(p), self.im.value(p)))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyTolerances {
    #[serde(default = "loose")]
    pub master: f64,
    #[serde(default = "loose")]
    pub split: f64,
    #[serde(default = "loose")]
    pub coefficient: f64,
    #[serde(default = "loose")]
    pub reduced: f64,
    /// The right-acting form is reported; it is checked only when set.
    #[serde(default)]
    pub right_form: Option<f64>,
}

fn loose() -> f64 {
    1e-2
}

impl Default for VerifyTolerances {
    fn default() -> Self {
        Self { master: loose(), split: loose(), coefficient: loose(), reduced: loose(), right_form: None }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub schema_version: u32,
    pub grid: GridConfig,
    pub family: FamilyConfig,
    #[serde(default)]
    pub phi: PhiConfig,
    #[serde(default)]
    pub derivatives: DerivativeSource,
    /// Constant added to `α`; a nonzero value is a designed failure.
    #[serde(default)]
    pub alpha_offset: [f64; 2],
    #[serde(default)]
    pub tolerances: VerifyTolerances,
    #[serde(default)]
    pub seed: Option<u64>,
}

/// Gaussian packet `exp(−|x − c|²/w²) e^{ik·x}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacketConfig {
    pub center: [f64; 2],
    pub width: f64,
    #[serde(default)]
    pub wavevector: [f64; 2],
}

impl PacketConfig {
    pub fn validate(&self) -> Result<(), UsageError> {
        if !(self.width > 0.0 && self.width.is_finite()) {
            return Err(UsageError(format!("packet width must be positive, got {}", self.width)));
        }
        Ok(())
    }

    pub fn sample(&self, grid: &GridSpec) -> ScalarField<Complex64> {
        ScalarField::sample(grid, |p| {
            let r2 = (p[0] - self.center[0]).powi(2) + (p[1] - self.center[1]).powi(2);
            let w2 = self.width * self.width;
            Complex64::from_polar((-r2 / w2).exp(), self.wavevector[0] * p[0] + self.wavevector[1] * p[1])
        })
    }
}

/// Square lattice of `nodes²` unknowns on `[0, length]²`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub nodes: usize,
    pub length: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveConfig {
    pub schema_version: u32,
    pub lattice: LatticeConfig,
    /// Without a family the state is the bare packet and `Q = 0`.
    #[serde(default)]
    pub family: Option<FamilyConfig>,
    pub packet: PacketConfig,
    pub simulation: SimulationParams,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatternTolerances {
    /// Allowed error of the fitted fringe offset in the complex limit.
    #[serde(default = "shift_tol")]
    pub shift: f64,
    /// Largest witness accepted as commuting in the complex limit.
    #[serde(default = "witness_tol")]
    pub witness: f64,
}

fn shift_tol() -> f64 {
    1e-3
}

fn witness_tol() -> f64 {
    1e-10
}

impl Default for PatternTolerances {
    fn default() -> Self {
        Self { shift: shift_tol(), witness: witness_tol() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatternConfig {
    pub schema_version: u32,
    pub setup: ABSetup,
    pub wavenumber: f64,
    #[serde(default)]
    pub tolerances: PatternTolerances,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HolonomyTolerances {
    #[serde(default = "witness_tol")]
    pub witness: f64,
    /// Allowed deviation of the loop holonomy from `e^{iqΦ/ħ}` in the
    /// complex limit.
    #[serde(default = "loop_tol")]
    pub loop_phase: f64,
}

fn loop_tol() -> f64 {
    1e-6
}

impl Default for HolonomyTolerances {
    fn default() -> Self {
        Self { witness: witness_tol(), loop_phase: loop_tol() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HolonomyConfig {
    pub schema_version: u32,
    pub setup: ABSetup,
    /// Screen ordinates at which path pairs are evaluated.
    #[serde(default = "center_only")]
    pub screen_y: Vec<f64>,
    /// Radius of the loop around the axis; defaults to the reference radius.
    #[serde(default)]
    pub loop_radius: Option<f64>,
    #[serde(default = "loop_segments")]
    pub loop_segments: usize,
    #[serde(default)]
    pub tolerances: HolonomyTolerances,
    #[serde(default)]
    pub seed: Option<u64>,
}

fn center_only() -> Vec<f64> {
    vec![0.0]
}

fn loop_segments() -> usize {
    256
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitTolerances {
    /// Relative gap `|r_q² − r_c² − r_j²| / r_q²`.
    #[serde(default = "identity_tol")]
    pub identity: f64,
    /// Quaternionic residual of computed eigenpairs.
    #[serde(default = "eigen_tol")]
    pub eigen: f64,
    /// Fourth-order decoupled residual for commuting models.
    #[serde(default = "eigen_tol")]
    pub decouple: f64,
}

fn identity_tol() -> f64 {
    1e-12
}

fn eigen_tol() -> f64 {
    1e-10
}

impl Default for SplitTolerances {
    fn default() -> Self {
        Self { identity: identity_tol(), eigen: eigen_tol(), decouple: eigen_tol() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitConfig {
    pub schema_version: u32,
    #[serde(default = "default_dim")]
    pub dim: usize,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub tolerances: SplitTolerances,
}

fn default_dim() -> usize {
    4
}

fn default_samples() -> usize {
    100
}

fn default_seed() -> u64 {
    7
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            dim: default_dim(),
            samples: default_samples(),
            seed: default_seed(),
            tolerances: SplitTolerances::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForceConfig {
    #[serde(default = "unit_speed")]
    pub velocity: f64,
    #[serde(default)]
    pub extraction: Extraction,
}

fn unit_speed() -> f64 {
    1.0
}

impl Default for ForceConfig {
    fn default() -> Self {
        Self { velocity: unit_speed(), extraction: Extraction::default() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldsConfig {
    pub schema_version: u32,
    pub setup: ABSetup,
    pub grid: GridConfig,
    #[serde(default)]
    pub force: ForceConfig,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_rejected() {
        let bad = r#"{"schema_version": 1, "dim": 4, "colour": 3}"#;
        assert!(serde_json::from_str::<SplitConfig>(bad).is_err());
    }

    #[test]
    fn family_tags_parse() {
        let f: FamilyConfig = serde_json::from_str(
            r#"{"kind": "ab", "theta": 0.6, "gamma": {"kind": "constant", "value": 0.0},
                "omega": {"kind": "linear", "offset": 0.0, "gradient": [1.0, 0.0]}}"#,
        )
        .unwrap();
        assert!(matches!(f, FamilyConfig::Ab { .. }));
    }
}
