//! Radial force map from the complex curl of `β`.
//!
//! The physical meaning of `∇×β` is open, so this is a labeled speculation:
//! `F_r = q v X(∇×β)` with `X` a chosen real extraction of the complex
//! value.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::field::{GridSpec, ScalarField};

use super::fields::beta_curl_analytic;
use super::setup::ABSetup;

/// Carried in every force report.
pub const FORCE_LABEL: &str = "speculative: qualitative radial-force remark, real extraction of a complex curl";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Extraction {
    #[default]
    Modulus,
    Real,
    Imag,
}

impl Extraction {
    pub fn apply(self, c: Complex64) -> f64 {
        match self {
            Self::Modulus => c.norm(),
            Self::Real => c.re,
            Self::Imag => c.im,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ForceMap {
    pub label: &'static str,
    pub velocity: f64,
    pub extraction: Extraction,
    #[serde(skip)]
    pub field: ScalarField<f64>,
}

/// `q v X(∇×β)` on the unmasked nodes; masked nodes hold zero.
pub fn lorentz_radial_force(setup: &ABSetup, grid: &GridSpec, velocity: f64, extraction: Extraction) -> Result<ForceMap> {
    let curl = beta_curl_analytic(setup, grid)?;
    let q = setup.solenoid.charge;
    let mut field = curl.map(|c| q * velocity * extraction.apply(c));
    for n in 0..grid.len() {
        if grid.is_masked(n) {
            field.values[n] = 0.0;
        }
    }
    Ok(ForceMap { label: FORCE_LABEL, velocity, extraction, field })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ab::solenoid::SolenoidConfig;
    use std::f64::consts::PI;

    fn fixture() -> (ABSetup, GridSpec) {
        let s = ABSetup::new(SolenoidConfig::with_flux(0.5, 1.5).unwrap(), 0.5).unwrap();
        let g = s.mask_grid(GridSpec::spanning(21, 21, [-2.0, 2.0], [-2.0, 2.0]).unwrap());
        (s, g)
    }

    #[test]
    fn zero_velocity_gives_zero() {
        let (s, g) = fixture();
        assert_eq!(lorentz_radial_force(&s, &g, 0.0, Extraction::Modulus).unwrap().field.max_magnitude(), 0.0);
    }

    #[test]
    fn sign_follows_velocity() {
        let (s, g) = fixture();
        let a = lorentz_radial_force(&s, &g, 0.7, Extraction::Real).unwrap().field;
        let b = lorentz_radial_force(&s, &g, -0.7, Extraction::Real).unwrap().field;
        assert!(a.values.iter().zip(&b.values).all(|(x, y)| *x == -*y));
    }

    #[test]
    fn diagonal_modulus_value() {
        let s = ABSetup::new(SolenoidConfig::with_flux(0.5, 1.5).unwrap(), 0.5).unwrap();
        let r = 1.0;
        let p = [r * (PI / 4.0).cos(), r * (PI / 4.0).sin()];
        let g = GridSpec::new(3, 3, 0.1, 0.1, [p[0] - 0.1, p[1] - 0.1]).unwrap();
        let f = lorentz_radial_force(&s, &g, 0.9, Extraction::Modulus).unwrap();
        let center = g.index(1, 1);
        let a = s.solenoid.coupling() / r;
        let want = 0.9 * 2.0 * a * a / (2.0 * s.theta).sin();
        assert!((f.field.values[center] - want).abs() < 1e-12 * want);
    }
}
