use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Infinite solenoid of radius `R` along `z`, seen in the `xy` plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SolenoidInput", into = "SolenoidInput")]
pub struct SolenoidConfig {
    radius: f64,
    field_strength: f64,
    pub charge: f64,
    pub hbar: f64,
    pub center: [f64; 2],
}

/// Config form: exactly one of `field_strength` and `flux`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolenoidInput {
    radius: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    field_strength: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    flux: Option<f64>,
    #[serde(default = "one")]
    charge: f64,
    #[serde(default = "one")]
    hbar: f64,
    #[serde(default)]
    center: [f64; 2],
}

fn one() -> f64 {
    1.0
}

impl TryFrom<SolenoidInput> for SolenoidConfig {
    type Error = Error;

    fn try_from(s: SolenoidInput) -> Result<Self> {
        let cfg = match (s.field_strength, s.flux) {
            (Some(b), None) => Self::new(s.radius, b)?,
            (None, Some(f)) => Self::with_flux(s.radius, f)?,
            _ => {
                return Err(Error::Precondition("solenoid needs exactly one of field_strength and flux".into()));
            }
        };
        cfg.with_constants(s.charge, s.hbar, s.center)
    }
}

impl From<SolenoidConfig> for SolenoidInput {
    fn from(c: SolenoidConfig) -> Self {
        Self {
            radius: c.radius,
            field_strength: Some(c.field_strength),
            flux: None,
            charge: c.charge,
            hbar: c.hbar,
            center: c.center,
        }
    }
}

impl SolenoidConfig {
    /// Unit charge and `ħ`, centered at the origin.
    pub fn new(radius: f64, field_strength: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) || !field_strength.is_finite() {
            return Err(Error::Precondition(format!(
                "solenoid needs a positive radius and finite field, got R = {radius}, B = {field_strength}"
            )));
        }
        Ok(Self { radius, field_strength, charge: 1.0, hbar: 1.0, center: [0.0, 0.0] })
    }

    pub fn with_flux(radius: f64, flux: f64) -> Result<Self> {
        Self::new(radius, flux / (PI * radius * radius))
    }

    pub fn with_constants(mut self, charge: f64, hbar: f64, center: [f64; 2]) -> Result<Self> {
        if !charge.is_finite() || !(hbar > 0.0) || !center.iter().all(|c| c.is_finite()) {
            return Err(Error::Precondition("charge must be finite and hbar positive".into()));
        }
        self.charge = charge;
        self.hbar = hbar;
        self.center = center;
        Ok(self)
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn field_strength(&self) -> f64 {
        self.field_strength
    }

    /// `Φ = π R² B`.
    pub fn flux(&self) -> f64 {
        PI * self.radius * self.radius * self.field_strength
    }

    /// The abelian phase `q Φ / ħ` picked up around the solenoid.
    pub fn ab_phase(&self) -> f64 {
        self.charge * self.flux() / self.hbar
    }

    /// `c₀ = q Φ / (2π ħ)`, so that `|α| = c₀ / r`.
    pub fn coupling(&self) -> f64 {
        self.ab_phase() / (2.0 * PI)
    }

    /// Polar coordinates `(r, φ)` about the axis, `φ ∈ (−π, π]`.
    pub fn polar(&self, p: [f64; 2]) -> (f64, f64) {
        let (x, y) = (p[0] - self.center[0], p[1] - self.center[1]);
        (x.hypot(y), y.atan2(x))
    }

    pub fn check_outside(&self, p: [f64; 2]) -> Result<(f64, f64)> {
        let (r, phi) = self.polar(p);
        if r <= self.radius {
            return Err(Error::OutsideDomain { x: p[0], y: p[1] });
        }
        Ok((r, phi))
    }

    pub fn is_inside(&self, p: [f64; 2]) -> bool {
        self.polar(p).0 <= self.radius
    }
}

/// `α = (q/ħ) Φ/(2π r) φ̂` outside the solenoid.
pub fn solenoid_alpha(cfg: &SolenoidConfig, p: [f64; 2]) -> Result<[f64; 2]> {
    let (r, phi) = cfg.check_outside(p)?;
    let m = cfg.coupling() / r;
    Ok([-m * phi.sin(), m * phi.cos()])
}
