//! Two-path interference on the screen.
//!
//! Each screen point gets its own holonomy pair. With `e_k = e^{ikℓ_k}` the
//! quaternionic intensity is `|K₁e₁ + K₂e₂|²` and the complex reference is
//! `|e₁ + e₂e^{iδ}|²` with `δ = qΦ/ħ`. Writing `Δ = k(ℓ₂ − ℓ₁)`, both are of
//! the form `a + b cos Δ + c sin Δ`; the fringe offset is read off a
//! least-squares fit as `atan2(−c, b)`.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::io::format_f64;
use crate::quaternion::Quaternion;

use super::fields::{loop_closure, LoopClosure};
use super::holonomy::{holonomy_pair, HolonomyPair};
use super::setup::ABSetup;

/// Fits with a normal-matrix condition number above this are rejected.
pub const FIT_CONDITION_LIMIT: f64 = 1e10;

/// Intensities below this are treated as rounding noise when asserting
/// non-negativity.
const NEGATIVE_SLACK: f64 = 1e-12;

/// `a + b cos Δ + c sin Δ` fitted to an intensity pattern.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FringeFit {
    pub mean: f64,
    pub cos: f64,
    pub sin: f64,
    /// `atan2(−c, b)` wrapped to `(−π, π]`.
    pub shift: f64,
    /// `√(b² + c²) / a`.
    pub visibility: f64,
    /// Largest pointwise deviation of the data from the fit.
    pub residual: f64,
}

pub fn wrap_phase(x: f64) -> f64 {
    let w = (x + PI).rem_euclid(2.0 * PI) - PI;
    if w <= -PI { w + 2.0 * PI } else { w }
}

pub fn fit_fringe(delta: &[f64], intensity: &[f64]) -> Result<FringeFit> {
    if delta.len() != intensity.len() || delta.len() < 3 {
        return Err(Error::Precondition("fringe fit needs at least 3 matching samples".into()));
    }
    let mut ata = Matrix3::<f64>::zeros();
    let mut aty = Vector3::<f64>::zeros();
    for (&d, &y) in delta.iter().zip(intensity) {
        let row = Vector3::new(1.0, d.cos(), d.sin());
        ata += row * row.transpose();
        aty += row * y;
    }
    let ev = ata.symmetric_eigenvalues();
    let (lo, hi) = (ev.min(), ev.max());
    if !(lo > 0.0) || hi / lo > FIT_CONDITION_LIMIT {
        return Err(Error::Precondition(format!(
            "fringe fit is ill-conditioned (condition {:.3e}); the screen must span more phase difference",
            hi / lo
        )));
    }
    let x = ata
        .cholesky()
        .ok_or_else(|| Error::Precondition("fringe fit normal matrix is not positive definite".into()))?
        .solve(&aty);
    let residual = delta
        .iter()
        .zip(intensity)
        .map(|(&d, &y)| (x[0] + x[1] * d.cos() + x[2] * d.sin() - y).abs())
        .fold(0.0, f64::max);
    Ok(FringeFit {
        mean: x[0],
        cos: x[1],
        sin: x[2],
        shift: wrap_phase((-x[2]).atan2(x[1])),
        visibility: x[1].hypot(x[2]) / x[0],
        residual,
    })
}

/// `|K₁e^{ikℓ₁} + K₂e^{ikℓ₂}|²`, expanded through `K₁* K₂`.
pub fn quaternion_intensity(k1: Quaternion, k2: Quaternion, phase1: f64, phase2: f64) -> f64 {
    let (e1, e2) = (Complex64::from_polar(1.0, phase1), Complex64::from_polar(1.0, phase2));
    let cross = k1.mul_complex_right(e1).conj() * k2.mul_complex_right(e2);
    k1.norm_sqr() + k2.norm_sqr() + 2.0 * cross.re()
}

/// `|e^{ikℓ₁} + e^{ikℓ₂ + iδ}|²`.
pub fn complex_intensity(phase1: f64, phase2: f64, delta: f64) -> f64 {
    (Complex64::from_polar(1.0, phase1) + Complex64::from_polar(1.0, phase2 + delta)).norm_sqr()
}

#[derive(Debug, Clone, Serialize)]
pub struct ScreenSample {
    pub y: f64,
    pub length_upper: f64,
    pub length_lower: f64,
    pub complex_intensity: f64,
    pub quaternion_intensity: f64,
    pub holonomy: HolonomyPair,
}

#[derive(Debug, Clone, Serialize)]
pub struct InterferenceResult {
    pub wavenumber: f64,
    pub samples: Vec<ScreenSample>,
    /// `qΦ/ħ` wrapped to `(−π, π]`.
    pub expected_shift: f64,
    pub complex_fit: FringeFit,
    pub quaternion_fit: FringeFit,
    /// Largest `|K₁K₂ − K₂K₁|` over the screen.
    pub witness_max: f64,
    /// Witness at the screen point closest to the axis line.
    pub witness_center: f64,
    pub loop_closure: LoopClosure,
}

impl InterferenceResult {
    pub fn screen(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.y).collect()
    }

    pub fn path_difference(&self) -> Vec<f64> {
        self.samples.iter().map(|s| self.wavenumber * (s.length_lower - s.length_upper)).collect()
    }

    /// Complex-limit offset error, wrapped.
    pub fn complex_shift_error(&self) -> f64 {
        wrap_phase(self.complex_fit.shift - self.expected_shift).abs()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("y,path_phase_difference,complex_intensity,quaternion_intensity,witness\n");
        for (s, d) in self.samples.iter().zip(self.path_difference()) {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                format_f64(s.y),
                format_f64(d),
                format_f64(s.complex_intensity),
                format_f64(s.quaternion_intensity),
                format_f64(s.holonomy.witness())
            ));
        }
        out
    }

    /// Summary with the holonomies as `[re, i, j, k]` tuples.
    pub fn summary(&self) -> serde_json::Value {
        let holonomies: Vec<_> = self
            .samples
            .iter()
            .map(|s| {
                serde_json::json!({
                    "y": s.y,
                    "upper": s.holonomy.k1.to_real4(),
                    "lower": s.holonomy.k2.to_real4(),
                    "refinement": s.holonomy.refinement,
                    "change": s.holonomy.change,
                })
            })
            .collect();
        let lc = &self.loop_closure;
        serde_json::json!({
            "wavenumber": self.wavenumber,
            "expected_shift": self.expected_shift,
            "complex_shift": self.complex_fit.shift,
            "complex_shift_error": self.complex_shift_error(),
            "quaternion_shift": self.quaternion_fit.shift,
            "complex_fit": self.complex_fit,
            "quaternion_fit": self.quaternion_fit,
            "witness_max": self.witness_max,
            "witness_center": self.witness_center,
            "loop_closure": {
                "radius": lc.radius,
                "gamma": lc.gamma,
                "omega": lc.omega,
                "gamma_analytic": lc.gamma_analytic,
                "omega_analytic": lc.omega_analytic,
            },
            "holonomies": holonomies,
        })
    }
}

/// Intensities and fringe offsets for the configured screen.
pub fn interference_pattern(setup: &ABSetup, wavenumber: f64) -> Result<InterferenceResult> {
    setup.validate()?;
    if !(wavenumber > 0.0 && wavenumber.is_finite()) {
        return Err(Error::Precondition(format!("wavenumber must be positive, got {wavenumber}")));
    }
    let delta = setup.solenoid.ab_phase();
    let samples = setup
        .screen_coordinates()
        .into_par_iter()
        .map(|y| -> Result<ScreenSample> {
            let [up, down] = setup.path_pair(y)?;
            let (l1, l2) = (up.length(), down.length());
            let holonomy = holonomy_pair(setup, y)?;
            let (p1, p2) = (wavenumber * l1, wavenumber * l2);
            let qi = quaternion_intensity(holonomy.k1, holonomy.k2, p1, p2);
            if !(qi >= -NEGATIVE_SLACK) {
                return Err(Error::Domain(format!("negative quaternionic intensity {qi} at y = {y}")));
            }
            Ok(ScreenSample {
                y,
                length_upper: l1,
                length_lower: l2,
                complex_intensity: complex_intensity(p1, p2, delta),
                quaternion_intensity: qi.max(0.0),
                holonomy,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let phases: Vec<f64> = samples.iter().map(|s| wavenumber * (s.length_lower - s.length_upper)).collect();
    let ci: Vec<f64> = samples.iter().map(|s| s.complex_intensity).collect();
    let qi: Vec<f64> = samples.iter().map(|s| s.quaternion_intensity).collect();
    let witness_max = samples.iter().map(|s| s.holonomy.witness()).fold(0.0, f64::max);
    let center = samples
        .iter()
        .min_by(|a, b| a.y.abs().total_cmp(&b.y.abs()))
        .map(|s| s.holonomy.witness())
        .unwrap_or(0.0);
    let reference_loop = loop_closure(setup, setup.reference.radius, 512)?;
    Ok(InterferenceResult {
        wavenumber,
        expected_shift: wrap_phase(delta),
        complex_fit: fit_fringe(&phases, &ci)?,
        quaternion_fit: fit_fringe(&phases, &qi)?,
        witness_max,
        witness_center: center,
        loop_closure: reference_loop,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ab::solenoid::SolenoidConfig;

    fn setup(theta: f64, flux: f64) -> ABSetup {
        ABSetup::new(SolenoidConfig::with_flux(0.5, flux).unwrap(), theta).unwrap()
    }

    #[test]
    fn fit_recovers_known_offset() {
        let d: Vec<f64> = (0..40).map(|k| -4.0 + 0.2 * k as f64).collect();
        let y: Vec<f64> = d.iter().map(|x| 2.0 + 2.0 * (x + 1.234).cos()).collect();
        let f = fit_fringe(&d, &y).unwrap();
        assert!((f.shift - 1.234).abs() < 1e-12 && (f.visibility - 1.0).abs() < 1e-12);
        assert!(f.residual < 1e-12);
    }

    #[test]
    fn degenerate_fit_rejected() {
        let d = vec![0.1; 10];
        let y = vec![1.0; 10];
        assert!(matches!(fit_fringe(&d, &y), Err(Error::Precondition(_))));
    }

    #[test]
    fn wrap_is_half_open() {
        assert!((wrap_phase(PI) - PI).abs() < 1e-15);
        assert!((wrap_phase(-PI) - PI).abs() < 1e-15);
        assert!((wrap_phase(7.0) - (7.0 - 2.0 * PI)).abs() < 1e-15);
    }

    #[test]
    fn unit_holonomies_reduce_to_two_slit_pattern() {
        let i = quaternion_intensity(Quaternion::ONE, Quaternion::ONE, 0.3, 1.1);
        assert!((i - complex_intensity(0.3, 1.1, 0.0)).abs() < 1e-14);
    }

    #[test]
    fn complex_limit_offset_is_ab_phase() {
        let s = setup(0.6, 2.0).complex();
        let r = interference_pattern(&s, 12.0).unwrap();
        assert!(r.complex_shift_error() < 1e-3, "{}", r.complex_shift_error());
        assert!(wrap_phase(r.quaternion_fit.shift - r.expected_shift).abs() < 1e-3);
        assert!(r.witness_max < 1e-10);
        for s in &r.samples {
            assert!((s.complex_intensity - s.quaternion_intensity).abs() < 1e-5);
        }
    }

    #[test]
    fn zero_flux_has_no_shift() {
        let s = setup(0.6, 0.0).complex();
        let r = interference_pattern(&s, 12.0).unwrap();
        assert!(r.complex_fit.shift.abs() < 1e-10 && r.quaternion_fit.shift.abs() < 1e-10);
    }

    #[test]
    fn quaternionic_pattern_differs_and_is_nonnegative() {
        let s = setup(PI / 4.0, 2.0);
        let r = interference_pattern(&s, 12.0).unwrap();
        assert!(r.witness_max > 1e-3);
        let gap = r.samples.iter().map(|s| (s.complex_intensity - s.quaternion_intensity).abs()).fold(0.0, f64::max);
        assert!(gap > 1e-3, "{gap}");
        assert!(r.samples.iter().all(|s| s.quaternion_intensity >= 0.0));
        assert_eq!(r.to_csv().lines().count(), 62);
    }
}
