use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{fd_gradient, ScalarField, VectorField};
use crate::phase::PotentialPair;
use crate::quaternion::Quaternion;

use super::lattice::Lattice;

/// Scalar potential `V` and connection `Q` on the simulation grid.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianSpec {
    pub potential: ScalarField<f64>,
    pub connection: PotentialPair,
}

impl HamiltonianSpec {
    pub fn free(lattice: &Lattice) -> Self {
        Self {
            potential: ScalarField::zeros(&lattice.grid),
            connection: PotentialPair::zero(&lattice.grid),
        }
    }

    pub fn with_connection(lattice: &Lattice, connection: PotentialPair) -> Self {
        Self { potential: ScalarField::zeros(&lattice.grid), connection }
    }
}

/// `H = −(ħ²/2m)(∇ − Q)·(∇ − Q) + V` discretized with link variables.
///
/// The hop from `n` to its forward neighbor `m` along an axis carries
/// `U = exp(−h Q̄_a)` where `Q̄_a` is the average of `Q_a` at the two ends;
/// the reverse hop carries `U*`. Every `U` is a unit quaternion, so the
/// operator is self-adjoint for the quaternionic inner product and the
/// evolution conserves the discrete norm exactly in continuous time.
#[derive(Debug, Clone)]
pub struct LinkHamiltonian {
    lattice: Lattice,
    hbar: f64,
    mass: f64,
    potential: Vec<f64>,
    /// `links[a][n]` is the forward link leaving `n` along axis `a`.
    links: [Vec<Option<(usize, Quaternion)>>; 2],
    /// `back[a][n]` is the neighbor behind `n` and the link entering from it.
    back: [Vec<Option<(usize, Quaternion)>>; 2],
}

impl LinkHamiltonian {
    pub fn new(lattice: &Lattice, spec: &HamiltonianSpec, hbar: f64, mass: f64) -> Result<Self> {
        let g = &lattice.grid;
        if !g.same_nodes(&spec.potential.grid) || !g.same_nodes(spec.connection.grid()) {
            return Err(Error::InvalidGrid("hamiltonian fields live on a different grid".into()));
        }
        if !(hbar > 0.0 && mass > 0.0) {
            return Err(Error::Precondition(format!("hbar and mass must be positive, got {hbar} and {mass}")));
        }
        let mut links: [Vec<Option<(usize, Quaternion)>>; 2] = [vec![None; g.len()], vec![None; g.len()]];
        let mut back: [Vec<Option<(usize, Quaternion)>>; 2] = [vec![None; g.len()], vec![None; g.len()]];
        for a in 0..2 {
            let h = g.spacing(a);
            for n in 0..g.len() {
                if let Some(m) = lattice.neighbor(n, a, 1) {
                    let qn = spec.connection.q_at(n)[a];
                    let qm = spec.connection.q_at(m)[a];
                    let u = ((qn + qm) * (-0.5 * h)).exp()?;
                    links[a][n] = Some((m, u));
                    back[a][m] = Some((n, u.conj()));
                }
            }
        }
        Ok(Self {
            lattice: lattice.clone(),
            hbar,
            mass,
            potential: spec.potential.values.clone(),
            links,
            back,
        })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn apply(&self, psi: &[Quaternion]) -> Vec<Quaternion> {
        let g = &self.lattice.grid;
        let kin = -self.hbar * self.hbar / (2.0 * self.mass);
        (0..g.len())
            .map(|n| {
                if g.is_masked(n) {
                    return Quaternion::ZERO;
                }
                let mut lap = Quaternion::ZERO;
                for a in 0..2 {
                    let inv_h2 = 1.0 / g.spacing(a).powi(2);
                    let mut acc = psi[n] * -2.0;
                    if let Some((m, u)) = self.links[a][n] {
                        acc += u * psi[m];
                    }
                    if let Some((m, u)) = self.back[a][n] {
                        acc += u * psi[m];
                    }
                    lap += acc * inv_h2;
                }
                lap * kin + psi[n] * self.potential[n]
            })
            .collect()
    }

    /// Upper bound on the spectral radius of `H / ħ`.
    pub fn frequency_bound(&self) -> f64 {
        let g = &self.lattice.grid;
        let kinetic = self.hbar / (2.0 * self.mass) * 4.0 * (1.0 / g.dx().powi(2) + 1.0 / g.dy().powi(2));
        let v = self.potential.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        kinetic + v / self.hbar
    }

    /// `Re⟨Ψ, HΨ⟩ / ⟨Ψ, Ψ⟩`.
    pub fn expectation(&self, psi: &[Quaternion]) -> f64 {
        let hpsi = self.apply(psi);
        let num: f64 = psi.iter().zip(&hpsi).map(|(p, h)| (p.conj() * *h).re()).sum();
        let den: f64 = psi.iter().map(|p| p.norm_sqr()).sum();
        num / den
    }

    /// `‖HΨ‖² / ‖Ψ‖² − ⟨H⟩²`, zero for an eigenvector.
    pub fn variance(&self, psi: &[Quaternion]) -> f64 {
        let e = self.expectation(psi);
        let hpsi = self.apply(psi);
        let den: f64 = psi.iter().map(|p| p.norm_sqr()).sum();
        let h2: f64 = hpsi.iter().map(|p| p.norm_sqr()).sum();
        (h2 / den - e * e).max(0.0)
    }
}

/// Ordinary complex `−(ħ²/2m)∇² + V` with the same five-point stencil and
/// boundary handling. Serves as the reference solver for factorized states.
#[derive(Debug, Clone)]
pub struct ComplexHamiltonian {
    lattice: Lattice,
    hbar: f64,
    mass: f64,
    potential: Vec<f64>,
}

impl ComplexHamiltonian {
    pub fn new(lattice: &Lattice, potential: &ScalarField<f64>, hbar: f64, mass: f64) -> Result<Self> {
        if !lattice.grid.same_nodes(&potential.grid) {
            return Err(Error::InvalidGrid("potential lives on a different grid".into()));
        }
        Ok(Self { lattice: lattice.clone(), hbar, mass, potential: potential.values.clone() })
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn apply(&self, phi: &[Complex64]) -> Vec<Complex64> {
        let lat = &self.lattice;
        let g = &lat.grid;
        let kin = -self.hbar * self.hbar / (2.0 * self.mass);
        (0..g.len())
            .map(|n| {
                if g.is_masked(n) {
                    return Complex64::default();
                }
                let mut lap = Complex64::default();
                for a in 0..2 {
                    let at = |s| lat.neighbor(n, a, s).map_or(Complex64::default(), |m| phi[m]);
                    lap += (at(1) + at(-1) - phi[n] * 2.0) / g.spacing(a).powi(2);
                }
                lap * kin + phi[n] * self.potential[n]
            })
            .collect()
    }

    pub fn expectation(&self, phi: &[Complex64]) -> f64 {
        let hphi = self.apply(phi);
        let num: f64 = phi.iter().zip(&hphi).map(|(p, h)| (p.conj() * h).re).sum();
        let den: f64 = phi.iter().map(|p| p.norm_sqr()).sum();
        num / den
    }
}

/// `ΠΦ = −ħ(∇Φ − QΦ) i` with `i` acting from the right, by finite
/// differences on the field grid.
pub fn momentum_apply(psi: &ScalarField<Quaternion>, pot: &PotentialPair, hbar: f64) -> Result<VectorField<Quaternion>> {
    if !psi.grid.same_nodes(pot.grid()) {
        return Err(Error::InvalidGrid("wave function and connection live on different grids".into()));
    }
    let grad = fd_gradient(psi);
    let mut out = VectorField::zeros(&psi.grid);
    for n in 0..psi.grid.len() {
        let q = pot.q_at(n);
        for a in 0..2 {
            out.comps[a][n] = (grad.comps[a][n] - q[a] * psi.values[n]).right_mul_i() * -hbar;
        }
    }
    Ok(out)
}

/// `Π²Φ = Σ_a Π_a(Π_a Φ)` by nesting [`momentum_apply`].
pub fn momentum_squared_apply(
    psi: &ScalarField<Quaternion>,
    pot: &PotentialPair,
    hbar: f64,
) -> Result<ScalarField<Quaternion>> {
    let first = momentum_apply(psi, pot, hbar)?;
    let mut out = ScalarField::zeros(&psi.grid);
    for a in 0..2 {
        let second = momentum_apply(&first.component(a), pot, hbar)?;
        for (o, s) in out.values.iter_mut().zip(&second.comps[a]) {
            *o += *s;
        }
    }
    Ok(out)
}
