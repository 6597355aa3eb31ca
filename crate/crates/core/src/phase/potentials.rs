use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{fd_divergence, fd_gradient, GridSpec, ScalarField, VectorField};
use crate::quaternion::Quaternion;

use super::triple::PhaseTriple;

/// Absolute tolerance on the reality violation accepted by
/// [`potentials_from_phase`].
pub const REALITY_TOLERANCE: f64 = 1e-9;

/// Threshold below which `sin Θ`, `cos Θ` or `|∇Θ|` count as zero.
pub const SINGULAR_TOLERANCE: f64 = 1e-9;

/// The connection `Q = α i + β j`: real `α`, complex `β`.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialPair {
    pub alpha: VectorField<f64>,
    pub beta: VectorField<Complex64>,
}

impl PotentialPair {
    pub fn new(alpha: VectorField<f64>, beta: VectorField<Complex64>) -> Result<Self> {
        if !alpha.grid.same_nodes(&beta.grid) {
            return Err(Error::InvalidGrid("alpha and beta live on different grids".into()));
        }
        Ok(Self { alpha, beta })
    }

    pub fn zero(grid: &GridSpec) -> Self {
        Self {
            alpha: VectorField::zeros(grid),
            beta: VectorField::zeros(grid),
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.alpha.grid
    }

    /// `Q_k = (i α_k, β_k)` at node `n`.
    pub fn q_at(&self, n: usize) -> [Quaternion; 2] {
        [0, 1].map(|a| Quaternion::new(Complex64::new(0.0, self.alpha.comps[a][n]), self.beta.comps[a][n]))
    }

    pub fn q_field(&self) -> VectorField<Quaternion> {
        let g = self.grid();
        let mut x = Vec::with_capacity(g.len());
        let mut y = Vec::with_capacity(g.len());
        for n in 0..g.len() {
            let [qx, qy] = self.q_at(n);
            x.push(qx);
            y.push(qy);
        }
        VectorField { grid: g.clone(), comps: [x, y] }
    }

    /// `η = Q·Q = −(|α|² + Σ_k |β_k|²)`.
    pub fn eta(&self) -> ScalarField<f64> {
        let g = self.grid();
        ScalarField {
            grid: g.clone(),
            values: (0..g.len())
                .map(|n| {
                    -(0..2)
                        .map(|a| self.alpha.comps[a][n].powi(2) + self.beta.comps[a][n].norm_sqr())
                        .sum::<f64>()
                })
                .collect(),
        }
    }

    /// `∇·Q` by finite differences.
    pub fn divergence(&self) -> ScalarField<Quaternion> {
        let da = fd_divergence(&self.alpha);
        let db = fd_divergence(&self.beta);
        da.zip_map(&db, |a, b| Quaternion::new(Complex64::new(0.0, a), b))
    }

    /// Copy with a constant vector added to `α`.
    pub fn with_alpha_offset(&self, offset: [f64; 2]) -> Self {
        Self {
            alpha: self.alpha.map(|v| [v[0] + offset[0], v[1] + offset[1]]),
            beta: self.beta.clone(),
        }
    }
}

/// The proportionality factor `λ` between the complex and `j` parts of the
/// constraint equation, sampled on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaField {
    pub values: ScalarField<Complex64>,
}

impl LambdaField {
    pub fn new(values: ScalarField<Complex64>) -> Result<Self> {
        if let Some(n) = values.grid.active().find(|&n| !values.values[n].is_finite()) {
            return Err(Error::Domain(format!("lambda is not finite at node {n}")));
        }
        Ok(Self { values })
    }

    pub fn constant(grid: &GridSpec, value: Complex64) -> Self {
        Self { values: ScalarField::sample(grid, |_| value) }
    }

    /// `λ = −tan Θ e^{i(Γ+Ω)}`, the choice that removes the reduced
    /// constraint for constant `Θ`.
    pub fn antiphase(ph: &PhaseTriple) -> Self {
        let g = ph.grid();
        Self {
            values: ScalarField {
                grid: g.clone(),
                values: (0..g.len())
                    .map(|n| {
                        let a = ph.angles_at(n);
                        Complex64::from_polar(-a.theta.tan(), a.gamma + a.omega)
                    })
                    .collect(),
            },
        }
    }

    /// `λ = tan Θ e^{iϑ}` for a phase field `ϑ`.
    pub fn tan_theta_phase(ph: &PhaseTriple, vartheta: &ScalarField<f64>) -> Self {
        let g = ph.grid();
        Self {
            values: ScalarField {
                grid: g.clone(),
                values: (0..g.len())
                    .map(|n| Complex64::from_polar(ph.theta.values.values[n].tan(), vartheta.values[n]))
                    .collect(),
            },
        }
    }

    pub fn at(&self, n: usize) -> Complex64 {
        self.values.values[n]
    }

    /// `∇|λ|` by finite differences.
    pub fn grad_modulus(&self) -> VectorField<f64> {
        fd_gradient(&self.values.map(|l| l.norm()))
    }
}

/// `max |(tan²Θ − |λ|²) ∇Θ|` over unmasked nodes. Nodes where `∇Θ` vanishes
/// contribute zero regardless of `Θ`.
pub fn reality_check(ph: &PhaseTriple, lam: &LambdaField) -> Result<f64> {
    let g = ph.grid();
    let mut worst: f64 = 0.0;
    for n in g.active() {
        let gt = ph.theta.grad.at(n);
        let mag = gt[0].hypot(gt[1]);
        if mag == 0.0 {
            continue;
        }
        let theta = ph.theta.values.values[n];
        if theta.cos().abs() < SINGULAR_TOLERANCE {
            return Err(Error::SingularConfiguration { node: n, what: "cos(theta)", value: theta.cos() });
        }
        let t2 = theta.tan().powi(2);
        worst = worst.max((t2 - lam.at(n).norm_sqr()).abs() * mag);
    }
    Ok(worst)
}

/// Potentials solving the gradient constraints for a given phase and `λ`:
///
/// ```text
/// α = (∇Γ + |λ|²∇Ω) / (1 + |λ|²)
/// β = λ / (1 + |λ|²) [2∇Θ / sin 2Θ + i∇(Γ − Ω)]
/// ```
///
/// The imaginary part of `α`, proportional to `(tan²Θ − |λ|²)∇Θ`, must vanish;
/// it is checked by [`reality_check`] and dropped.
pub fn potentials_from_phase(ph: &PhaseTriple, lam: &LambdaField) -> Result<PotentialPair> {
    let violation = reality_check(ph, lam)?;
    if violation > REALITY_TOLERANCE {
        return Err(Error::RealityViolation { max: violation });
    }
    let g = ph.grid();
    let i = Complex64::i();
    let mut alpha = VectorField::zeros(g);
    let mut beta = VectorField::zeros(g);
    for n in g.active() {
        let l = lam.at(n);
        let w = 1.0 / (1.0 + l.norm_sqr());
        let gt = ph.theta.grad.at(n);
        let gg = ph.gamma.grad.at(n);
        let go = ph.omega.grad.at(n);
        let theta_term = if gt == [0.0, 0.0] {
            [0.0, 0.0]
        } else {
            let s2 = (2.0 * ph.theta.values.values[n]).sin();
            if s2.abs() < SINGULAR_TOLERANCE {
                return Err(Error::SingularConfiguration { node: n, what: "sin(2 theta)", value: s2 });
            }
            [2.0 * gt[0] / s2, 2.0 * gt[1] / s2]
        };
        for a in 0..2 {
            alpha.comps[a][n] = w * (gg[a] + l.norm_sqr() * go[a]);
            beta.comps[a][n] = l * w * (theta_term[a] + i * (gg[a] - go[a]));
        }
    }
    Ok(PotentialPair { alpha, beta })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase::AngleSpec;
    use std::f64::consts::FRAC_PI_4;

    fn grid() -> GridSpec {
        GridSpec::spanning(17, 17, [0.0, 1.0], [0.0, 1.0]).unwrap()
    }

    fn wave(a: f64, k: [f64; 2], p: f64) -> AngleSpec {
        AngleSpec::Sinusoid { offset: 0.0, amplitude: a, wavevector: k, phase: p }
    }

    #[test]
    fn eta_is_minus_quaternion_norm_sum_and_matches_q_dot_q() {
        let g = grid();
        let pot = PotentialPair {
            alpha: VectorField::sample(&g, |p| [p[0], -0.5]),
            beta: VectorField::sample(&g, |p| [Complex64::new(0.2, p[1]), Complex64::new(-1.0, 0.3)]),
        };
        let eta = pot.eta();
        for n in 0..g.len() {
            let [qx, qy] = pot.q_at(n);
            let qq = qx * qx + qy * qy;
            assert!((qq.z.re - eta.values[n]).abs() < 1e-14);
            assert!(qq.z.im.abs() < 1e-14 && qq.zeta.norm() < 1e-14);
            assert!(eta.values[n] <= 0.0);
        }
    }

    #[test]
    fn antiphase_lambda_reproduces_closed_form_family() {
        let g = grid();
        let theta = 0.6;
        let ph = PhaseTriple::from_specs(
            &g,
            &AngleSpec::constant(theta),
            &wave(0.7, [1.0, 0.4], 0.2),
            &wave(0.5, [-0.3, 0.9], 1.0),
        );
        let pot = potentials_from_phase(&ph, &LambdaField::antiphase(&ph)).unwrap();
        let (s, c) = f64::sin_cos(theta);
        for n in 0..g.len() {
            let a = ph.angles_at(n);
            let gg = ph.gamma.grad.at(n);
            let go = ph.omega.grad.at(n);
            let f = Complex64::new(0.0, -s * c) * Complex64::from_polar(1.0, a.gamma + a.omega);
            for k in 0..2 {
                assert!((pot.alpha.comps[k][n] - (c * c * gg[k] + s * s * go[k])).abs() < 1e-12);
                assert!((pot.beta.comps[k][n] - f * (gg[k] - go[k])).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_lambda_gives_gamma_gradient() {
        let g = grid();
        let ph = PhaseTriple::from_specs(
            &g,
            &AngleSpec::constant(0.3),
            &AngleSpec::linear(0.0, [0.5, 1.5]),
            &wave(1.0, [2.0, 0.0], 0.0),
        );
        let pot = potentials_from_phase(&ph, &LambdaField::constant(&g, Complex64::default())).unwrap();
        assert!(pot.beta.max_magnitude() == 0.0);
        for n in 0..g.len() {
            assert_eq!(pot.alpha.at(n), [0.5, 1.5]);
        }
    }

    #[test]
    fn reality_check_cases() {
        let g = grid();
        let flat = PhaseTriple::from_specs(
            &g,
            &AngleSpec::constant(0.4),
            &AngleSpec::constant(0.0),
            &AngleSpec::constant(0.0),
        );
        let big = LambdaField::constant(&g, Complex64::new(3.0, -2.0));
        assert_eq!(reality_check(&flat, &big).unwrap(), 0.0);

        let sloped = PhaseTriple::from_specs(
            &g,
            &AngleSpec::linear(0.0, [1.0, 0.0]),
            &AngleSpec::constant(0.0),
            &AngleSpec::constant(0.0),
        );
        let zero = LambdaField::constant(&g, Complex64::default());
        let v = reality_check(&sloped, &zero).unwrap();
        assert!((v - 1f64.tan().powi(2)).abs() < 1e-12);
        assert!(matches!(
            potentials_from_phase(&sloped, &zero),
            Err(Error::RealityViolation { .. })
        ));

        let phase = ScalarField::sample(&g, |p| 0.3 * p[1]);
        let matched = LambdaField::tan_theta_phase(&sloped.clone(), &phase);
        let r = reality_check(&sloped, &matched).unwrap();
        assert!(r < 1e-12, "{r}");
    }

    #[test]
    fn reality_check_flags_theta_at_right_angle_only_with_gradient() {
        let g = grid();
        let half_pi = std::f64::consts::FRAC_PI_2;
        let constant = PhaseTriple::from_specs(
            &g,
            &AngleSpec::constant(half_pi),
            &AngleSpec::constant(0.0),
            &AngleSpec::constant(0.0),
        );
        let lam = LambdaField::constant(&g, Complex64::new(1.0, 0.0));
        assert_eq!(reality_check(&constant, &lam).unwrap(), 0.0);
        let through = PhaseTriple::from_specs(
            &g,
            &AngleSpec::linear(half_pi, [1.0, 0.0]),
            &AngleSpec::constant(0.0),
            &AngleSpec::constant(0.0),
        );
        assert!(matches!(
            reality_check(&through, &lam),
            Err(Error::SingularConfiguration { .. })
        ));
    }

    #[test]
    fn unit_phase_rotation_of_lambda_keeps_reality_and_rotates_beta() {
        let g = grid();
        let ph = PhaseTriple::from_specs(
            &g,
            &AngleSpec::Sinusoid { offset: FRAC_PI_4, amplitude: 0.2, wavevector: [1.0, 0.5], phase: 0.0 },
            &wave(0.6, [0.3, 1.1], 0.4),
            &AngleSpec::linear(0.0, [0.2, -0.7]),
        );
        let phase = ScalarField::sample(&g, |p| p[0] - p[1]);
        let lam = LambdaField::tan_theta_phase(&ph, &phase);
        let rot = Complex64::from_polar(1.0, 0.9);
        let lam_rot = LambdaField { values: lam.values.map(|l| l * rot) };
        let (r0, r1) = (reality_check(&ph, &lam).unwrap(), reality_check(&ph, &lam_rot).unwrap());
        assert!((r0 - r1).abs() < 1e-15);
        let a = potentials_from_phase(&ph, &lam).unwrap();
        let b = potentials_from_phase(&ph, &lam_rot).unwrap();
        for n in 0..g.len() {
            for k in 0..2 {
                assert!((a.beta.comps[k][n] * rot - b.beta.comps[k][n]).norm() < 1e-13);
                assert!((a.alpha.comps[k][n] - b.alpha.comps[k][n]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn alpha_offset_shifts_alpha_only() {
        let g = grid();
        let pot = PotentialPair::zero(&g).with_alpha_offset([0.1, 0.0]);
        assert_eq!(pot.alpha.at(5), [0.1, 0.0]);
        assert_eq!(pot.beta.max_magnitude(), 0.0);
    }
}
