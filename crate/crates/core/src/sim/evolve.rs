use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::io::format_f64;
use crate::phase::PotentialPair;
use crate::quaternion::Quaternion;

use super::hamiltonian::{ComplexHamiltonian, LinkHamiltonian};
use super::lattice::{Boundary, Lattice};

/// RK4 is stable on the imaginary axis up to `|ω dt| = 2√2`; keep a margin.
pub const STABILITY_LIMIT: f64 = 2.5;

/// Time integrator. Only classical RK4 is implemented; the tag keeps
/// configs forward compatible.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    #[default]
    Rk4,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationParams {
    #[serde(default = "one")]
    pub hbar: f64,
    #[serde(default = "one")]
    pub mass: f64,
    pub dt: f64,
    pub steps: usize,
    #[serde(default)]
    pub boundary: Boundary,
    /// Record observables every this many steps.
    #[serde(default = "one_usize")]
    pub sample_every: usize,
    #[serde(default)]
    pub scheme: Scheme,
    /// Accepted relative drift of the total probability.
    #[serde(default = "default_norm_tol")]
    pub norm_drift_tolerance: f64,
    /// Accepted continuity residual (interior rows).
    #[serde(default = "default_continuity_tol")]
    pub continuity_tolerance: f64,
    /// Norm growth factor that aborts the run as unstable.
    #[serde(default = "default_growth")]
    pub growth_limit: f64,
}

fn default_norm_tol() -> f64 {
    1e-6
}

fn default_continuity_tol() -> f64 {
    1.0
}

fn default_growth() -> f64 {
    10.0
}

fn one() -> f64 {
    1.0
}

fn one_usize() -> usize {
    1
}

impl SimulationParams {
    pub fn new(dt: f64, steps: usize) -> Self {
        Self {
            hbar: 1.0,
            mass: 1.0,
            dt,
            steps,
            boundary: Boundary::default(),
            sample_every: 1,
            scheme: Scheme::Rk4,
            norm_drift_tolerance: default_norm_tol(),
            continuity_tolerance: default_continuity_tol(),
            growth_limit: default_growth(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt >= 0.0 && self.dt.is_finite()) {
            return Err(Error::Precondition(format!("time step must be non-negative, got {}", self.dt)));
        }
        if !(self.hbar > 0.0 && self.mass > 0.0) {
            return Err(Error::Precondition("hbar and mass must be positive".into()));
        }
        if !(self.growth_limit > 1.0) {
            return Err(Error::Precondition("growth_limit must exceed 1".into()));
        }
        if self.sample_every == 0 {
            return Err(Error::Precondition("sample_every must be at least 1".into()));
        }
        Ok(())
    }
}

/// Checks `dt · ω_max ≤ 2.5` for the discrete operator.
pub fn check_stability(h: &LinkHamiltonian, dt: f64) -> Result<()> {
    let w = h.frequency_bound();
    if dt * w > STABILITY_LIMIT {
        return Err(Error::Precondition(format!(
            "time step {dt} exceeds the stability bound {:.6e} (dt·ω_max = {:.3})",
            STABILITY_LIMIT / w,
            dt * w
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveState {
    pub psi: ScalarField<Quaternion>,
    pub t: f64,
}

impl WaveState {
    pub fn new(psi: ScalarField<Quaternion>) -> Self {
        Self { psi, t: 0.0 }
    }

    /// `K φ` with the complex factor on the right.
    pub fn factorized(k: &ScalarField<Quaternion>, phi: &ScalarField<Complex64>) -> Self {
        Self::new(k.zip_map(phi, |k, f| k.mul_complex_right(f)))
    }
}

pub fn probability_density(psi: &ScalarField<Quaternion>) -> ScalarField<f64> {
    psi.map(|q| q.norm_sqr())
}

pub fn total_probability(lattice: &Lattice, psi: &[Quaternion]) -> f64 {
    psi.iter().map(|q| q.norm_sqr()).sum::<f64>() * lattice.cell_area()
}

/// `j = (1/m) Re(Ψ* ΠΨ)`, with central differences that honor the
/// lattice boundary.
pub fn probability_current(
    lattice: &Lattice,
    psi: &[Quaternion],
    pot: &PotentialPair,
    hbar: f64,
    mass: f64,
) -> VectorField<f64> {
    let grad = lattice.gradient(psi);
    let mut out = VectorField::zeros(&lattice.grid);
    for n in 0..psi.len() {
        let q = pot.q_at(n);
        for a in 0..2 {
            let pi = (grad.comps[a][n] - q[a] * psi[n]).right_mul_i() * -hbar;
            out.comps[a][n] = (psi[n].conj() * pi).re() / mass;
        }
    }
    out
}

/// `max |∂_t ρ + ∇·j|` with `∂_t ρ` supplied by the caller.
fn continuity_max(lattice: &Lattice, drho_dt: &[f64], current: &VectorField<f64>) -> f64 {
    let div = lattice.divergence(current);
    lattice
        .grid
        .active()
        .map(|n| (drho_dt[n] + div.values[n]).abs())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObservableRow {
    pub step: usize,
    pub t: f64,
    pub total_probability: f64,
    pub energy: f64,
    /// Centered in time except at the first and last recorded step, where
    /// a one-sided difference is used.
    pub continuity_residual_max: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ObservableSeries {
    pub rows: Vec<ObservableRow>,
}

impl ObservableSeries {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,t,total_probability,energy,continuity_residual_max\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.step,
                format_f64(r.t),
                format_f64(r.total_probability),
                format_f64(r.energy),
                format_f64(r.continuity_residual_max)
            ));
        }
        out
    }

    /// `max |P(t) − P(0)| / P(0)`.
    pub fn probability_drift(&self) -> f64 {
        let Some(first) = self.rows.first() else { return 0.0 };
        self.rows
            .iter()
            .map(|r| ((r.total_probability - first.total_probability) / first.total_probability).abs())
            .fold(0.0, f64::max)
    }

    /// `max |E(t) − E(0)| / |E(0)|`.
    pub fn energy_drift(&self) -> f64 {
        let Some(first) = self.rows.first() else { return 0.0 };
        let scale = first.energy.abs().max(f64::MIN_POSITIVE);
        self.rows.iter().map(|r| (r.energy - first.energy).abs() / scale).fold(0.0, f64::max)
    }

    /// Largest continuity residual over rows with a centered estimate.
    pub fn continuity_interior_max(&self) -> f64 {
        let n = self.rows.len();
        if n < 3 {
            return self.rows.iter().map(|r| r.continuity_residual_max).fold(0.0, f64::max);
        }
        self.rows[1..n - 1].iter().map(|r| r.continuity_residual_max).fold(0.0, f64::max)
    }
}

/// `∂_t Ψ = −(HΨ) i / ħ`.
fn rhs(h: &LinkHamiltonian, psi: &[Quaternion]) -> Vec<Quaternion> {
    let inv = -1.0 / h.hbar();
    h.apply(psi).into_iter().map(|q| q.right_mul_i() * inv).collect()
}

fn axpy(y: &[Quaternion], a: f64, x: &[Quaternion]) -> Vec<Quaternion> {
    y.iter().zip(x).map(|(&y, &x)| y + x * a).collect()
}

pub(crate) fn rk4_step(h: &LinkHamiltonian, psi: &[Quaternion], dt: f64) -> Vec<Quaternion> {
    let k1 = rhs(h, psi);
    let k2 = rhs(h, &axpy(psi, 0.5 * dt, &k1));
    let k3 = rhs(h, &axpy(psi, 0.5 * dt, &k2));
    let k4 = rhs(h, &axpy(psi, dt, &k3));
    psi.iter()
        .enumerate()
        .map(|(n, &p)| p + (k1[n] + (k2[n] + k3[n]) * 2.0 + k4[n]) * (dt / 6.0))
        .collect()
}

/// Result of [`evolve`]: the final state and the sampled observables.
#[derive(Debug, Clone)]
pub struct Evolution {
    pub state: WaveState,
    pub series: ObservableSeries,
}

/// Integrates `H Ψ = ħ ∂_t Ψ i` with classical RK4.
pub fn evolve(
    lattice: &Lattice,
    h: &LinkHamiltonian,
    pot: &PotentialPair,
    initial: &WaveState,
    params: &SimulationParams,
) -> Result<Evolution> {
    params.validate()?;
    if h.lattice() != lattice || !initial.psi.grid.same_nodes(&lattice.grid) {
        return Err(Error::InvalidGrid("state, operator and lattice disagree".into()));
    }
    check_stability(h, params.dt)?;
    let dt = params.dt;
    let area = lattice.cell_area();
    let current = |psi: &[Quaternion]| probability_current(lattice, psi, pot, params.hbar, params.mass);
    let density = |psi: &[Quaternion]| -> Vec<f64> { psi.iter().map(|q| q.norm_sqr()).collect() };

    let mut psi = initial.psi.values.clone();
    for n in 0..psi.len() {
        if lattice.grid.is_masked(n) {
            psi[n] = Quaternion::ZERO;
        }
    }
    let p0 = total_probability(lattice, &psi);
    let mut prev: Option<Vec<f64>> = None;
    let mut rows = Vec::new();
    let mut rho = density(&psi);
    for step in 0..=params.steps {
        let next = (step < params.steps && dt > 0.0).then(|| rk4_step(h, &psi, dt));
        let record = step % params.sample_every == 0 || step == params.steps;
        if record {
            let rho_next = next.as_deref().map(density);
            let drho: Vec<f64> = match (&prev, &rho_next) {
                (Some(p), Some(nx)) => nx.iter().zip(p).map(|(a, b)| (a - b) / (2.0 * dt)).collect(),
                (None, Some(nx)) => nx.iter().zip(&rho).map(|(a, b)| (a - b) / dt).collect(),
                (Some(p), None) => rho.iter().zip(p).map(|(a, b)| (a - b) / dt).collect(),
                // no motion: the time derivative is taken as zero
                (None, None) => vec![0.0; rho.len()],
            };
            let prob = rho.iter().sum::<f64>() * area;
            rows.push(ObservableRow {
                step,
                t: initial.t + step as f64 * dt,
                total_probability: prob,
                energy: h.expectation(&psi),
                continuity_residual_max: continuity_max(lattice, &drho, &current(&psi)),
            });
        }
        let Some(next) = next else { break };
        let p = total_probability(lattice, &next);
        if !p.is_finite() || p > params.growth_limit * p0 {
            return Err(Error::Unstable { step: step + 1, factor: p / p0 });
        }
        prev = Some(std::mem::replace(&mut rho, density(&next)));
        psi = next;
    }
    Ok(Evolution {
        state: WaveState {
            psi: ScalarField { grid: lattice.grid.clone(), values: psi },
            t: initial.t + params.steps as f64 * dt,
        },
        series: ObservableSeries { rows },
    })
}

/// Reference RK4 for `H φ = i ħ ∂_t φ` on complex data.
pub fn evolve_complex(h: &ComplexHamiltonian, phi: &ScalarField<Complex64>, dt: f64, steps: usize) -> ScalarField<Complex64> {
    let f = |p: &[Complex64]| -> Vec<Complex64> {
        let s = Complex64::new(0.0, -1.0 / h.hbar());
        h.apply(p).into_iter().map(|v| v * s).collect()
    };
    let add = |y: &[Complex64], a: f64, x: &[Complex64]| -> Vec<Complex64> {
        y.iter().zip(x).map(|(&y, &x)| y + x * a).collect()
    };
    let mut psi = phi.values.clone();
    for _ in 0..steps {
        let k1 = f(&psi);
        let k2 = f(&add(&psi, 0.5 * dt, &k1));
        let k3 = f(&add(&psi, 0.5 * dt, &k2));
        let k4 = f(&add(&psi, dt, &k3));
        for n in 0..psi.len() {
            psi[n] += (k1[n] + (k2[n] + k3[n]) * 2.0 + k4[n]) * (dt / 6.0);
        }
    }
    ScalarField { grid: phi.grid.clone(), values: psi }
}
