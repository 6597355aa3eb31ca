use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{GridSpec, ScalarField};

use super::angle::AngleSpec;
use super::potentials::{potentials_from_phase, LambdaField};
use super::residual::ResidualContext;
use super::triple::{DerivativeSource, PhaseTriple};

/// Minimum violation the probe must exceed on the default grid. Calibrated
/// once against the seeded sample set and frozen.
pub const NO_SOLUTION_THRESHOLD: f64 = 1e-2;

#[derive(Debug, Clone, Serialize)]
pub struct ProbeReport {
    pub samples: usize,
    pub seed: u64,
    pub nodes_per_axis: usize,
    /// Smallest per-sample violation.
    pub min_violation: f64,
    pub violations: Vec<f64>,
    /// Violation of the constant-`Θ` control sample, which is a true
    /// solution and should vanish with the grid spacing.
    pub control_violation: f64,
}

fn random_wave(rng: &mut ChaCha8Rng, offset: f64, amplitude: [f64; 2]) -> AngleSpec {
    let mut k = [0.0f64; 2];
    // keep |k| away from zero so the wave actually varies
    while k[0].hypot(k[1]) < 0.5 {
        k = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
    }
    AngleSpec::Sinusoid {
        offset,
        amplitude: rng.random_range(amplitude[0]..amplitude[1]),
        wavevector: k,
        phase: rng.random_range(0.0..2.0 * PI),
    }
}

fn random_phase_angle(rng: &mut ChaCha8Rng) -> AngleSpec {
    let linear = AngleSpec::linear(
        rng.random_range(-PI..PI),
        [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)],
    );
    AngleSpec::Sum { terms: vec![linear, random_wave(rng, 0.0, [0.0, 1.0])] }
}

/// Largest magnitude of the two `φ`-coefficient conditions for `Φ = Kφ`
/// with potentials built from the phase and `λ`.
pub fn constraint_violation(ph: &PhaseTriple, lam: &LambdaField) -> Result<f64> {
    let pot = potentials_from_phase(ph, lam)?;
    let ctx = ResidualContext::new(ph, &pot, DerivativeSource::Analytic)?;
    let [phi_c, phi_j, _, _] = ctx.coefficient_constraints(lam)?;
    Ok(phi_c.max.max(phi_j.max))
}

/// Searches random configurations with `∇Θ ≠ 0` and `λ = tan Θ e^{iϑ}` for
/// one that satisfies the coefficient conditions, on `[0, 1]²` with
/// `nodes` points per axis. Returns the smallest violation found together
/// with a constant-`Θ` control.
pub fn no_solution_probe_on(samples: usize, seed: u64, nodes: usize) -> Result<ProbeReport> {
    if samples == 0 {
        return Err(Error::Precondition("no-solution probe needs at least one sample".into()));
    }
    let grid = GridSpec::spanning(nodes, nodes, [0.0, 1.0], [0.0, 1.0])?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = Vec::with_capacity(samples);
    for _ in 0..samples {
        let offset = rng.random_range(0.5..1.0);
        let theta = random_wave(&mut rng, offset, [0.1, 0.3]);
        let gamma = random_phase_angle(&mut rng);
        let omega = random_phase_angle(&mut rng);
        let vartheta = random_phase_angle(&mut rng);
        let ph = PhaseTriple::from_specs(&grid, &theta, &gamma, &omega);
        let lam = LambdaField::tan_theta_phase(&ph, &ScalarField::sample(&grid, |p| vartheta.value(p)));
        violations.push(constraint_violation(&ph, &lam)?);
    }
    let control = {
        let theta = AngleSpec::constant(rng.random_range(0.5..1.0));
        let gamma = random_phase_angle(&mut rng);
        let omega = random_phase_angle(&mut rng);
        let ph = PhaseTriple::from_specs(&grid, &theta, &gamma, &omega);
        let vartheta = ph.gamma.values.zip_map(&ph.omega.values, |g, o| g + o + PI);
        constraint_violation(&ph, &LambdaField::tan_theta_phase(&ph, &vartheta))?
    };
    Ok(ProbeReport {
        samples,
        seed,
        nodes_per_axis: nodes,
        min_violation: violations.iter().copied().fold(f64::INFINITY, f64::min),
        violations,
        control_violation: control,
    })
}

/// [`no_solution_probe_on`] with 33 nodes per axis.
pub fn no_solution_probe(samples: usize, seed: u64) -> Result<ProbeReport> {
    no_solution_probe_on(samples, seed, 33)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_samples_rejected() {
        assert!(matches!(no_solution_probe(0, 1), Err(Error::Precondition(_))));
    }

    #[test]
    fn probe_is_deterministic_per_seed() {
        let a = no_solution_probe_on(3, 11, 17).unwrap();
        let b = no_solution_probe_on(3, 11, 17).unwrap();
        assert_eq!(a.violations, b.violations);
        let c = no_solution_probe_on(3, 12, 17).unwrap();
        assert_ne!(a.violations, c.violations);
    }

    #[test]
    fn control_vanishes_with_spacing() {
        let coarse = no_solution_probe_on(1, 5, 17).unwrap().control_violation;
        let fine = no_solution_probe_on(1, 5, 65).unwrap().control_violation;
        assert!(coarse / fine > 10.0, "{coarse} {fine}");
    }
}
