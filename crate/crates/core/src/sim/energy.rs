use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::phase::Family;
use crate::quaternion::Quaternion;

use super::evolve::{check_stability, rk4_step, STABILITY_LIMIT};
use super::hamiltonian::{ComplexHamiltonian, HamiltonianSpec, LinkHamiltonian};
use super::lattice::{Boundary, Lattice};

/// Relative energy variance above which the state is flagged as not an
/// eigenstate.
pub const EIGEN_VARIANCE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Serialize)]
pub struct EnergyReport {
    pub mode: [usize; 2],
    /// Rayleigh quotient of the complex box mode.
    pub complex_energy: f64,
    /// Rayleigh quotient of `K φ` under the quaternionic operator.
    pub quaternion_energy: f64,
    pub relative_gap: f64,
    /// `Var(H) / ε²` for `K φ`.
    pub relative_variance: f64,
    /// Energy read off the rotation of `⟨Ψ(0), Ψ(t)⟩` over a short run.
    pub phase_rate_energy: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// Box mode `sin(m π x / L) sin(n π y / L)` on the Dirichlet lattice.
pub fn box_mode(lattice: &Lattice, mode: [usize; 2]) -> Result<ScalarField<Complex64>> {
    if lattice.boundary != Boundary::Dirichlet {
        return Err(Error::Precondition("box modes need a Dirichlet lattice".into()));
    }
    let g = &lattice.grid;
    let o = g.origin();
    let lx = (g.nx() + 1) as f64 * g.dx();
    let ly = (g.ny() + 1) as f64 * g.dy();
    let (x0, y0) = (o[0] - g.dx(), o[1] - g.dy());
    Ok(ScalarField::sample(g, |p| {
        let s = (mode[0] as f64 * PI * (p[0] - x0) / lx).sin() * (mode[1] as f64 * PI * (p[1] - y0) / ly).sin();
        Complex64::new(s, 0.0)
    }))
}

/// Compares the energy of a complex box mode `φ` with that of `K φ` under
/// the quaternionic Hamiltonian carrying the family's connection.
pub fn energy_equality_check(
    lattice: &Lattice,
    family: &Family,
    mode: [usize; 2],
    hbar: f64,
    mass: f64,
) -> Result<EnergyReport> {
    if !family.phase.grid().same_nodes(&lattice.grid) {
        return Err(Error::InvalidGrid("family and lattice disagree".into()));
    }
    if mode[0] == 0 || mode[1] == 0 {
        return Err(Error::Precondition("box mode numbers start at 1".into()));
    }
    let phi = box_mode(lattice, mode)?;
    let spec = HamiltonianSpec::with_connection(lattice, family.potentials.clone());
    let hq = LinkHamiltonian::new(lattice, &spec, hbar, mass)?;
    let hc = ComplexHamiltonian::new(lattice, &spec.potential, hbar, mass)?;
    let complex_energy = hc.expectation(&phi.values);
    let k = family.k_field();
    let psi: Vec<Quaternion> = k.values.iter().zip(&phi.values).map(|(k, f)| k.mul_complex_right(*f)).collect();
    let quaternion_energy = hq.expectation(&psi);
    let relative_variance = hq.variance(&psi) / quaternion_energy.powi(2);

    // short run; the rotation angle of the overlap gives ε t / ħ
    let dt = 0.2 * STABILITY_LIMIT / hq.frequency_bound();
    check_stability(&hq, dt)?;
    let steps = 20;
    let mut cur = psi.clone();
    for _ in 0..steps {
        cur = rk4_step(&hq, &cur, dt);
    }
    let overlap = psi.iter().zip(&cur).fold(Quaternion::ZERO, |s, (a, b)| s + a.conj() * *b);
    let phase_rate_energy = -overlap.z.arg() * hbar / (steps as f64 * dt);

    let mut warnings = Vec::new();
    if relative_variance > EIGEN_VARIANCE_TOLERANCE {
        warnings.push(format!("K phi is not an eigenstate: relative variance {relative_variance:.3e}"));
    }
    Ok(EnergyReport {
        mode,
        complex_energy,
        quaternion_energy,
        relative_gap: (quaternion_energy - complex_energy).abs() / complex_energy.abs(),
        relative_variance,
        phase_rate_energy,
        warnings,
    })
}
