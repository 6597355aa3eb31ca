use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{fd_gradient, fd_laplacian, GridSpec, ScalarField, VectorField};
use crate::quaternion::{k_from_angles, Quaternion, UnitPhaseAngles};

use super::angle::{AngleSpec, SampledAngle};

/// The angle fields `(Θ, Γ, Ω)` of `K = cos Θ e^{iΓ} + sin Θ e^{iΩ} j`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseTriple {
    pub theta: SampledAngle,
    pub gamma: SampledAngle,
    pub omega: SampledAngle,
}

impl PhaseTriple {
    pub fn new(theta: SampledAngle, gamma: SampledAngle, omega: SampledAngle) -> Result<Self> {
        let g = theta.grid();
        if !g.same_nodes(gamma.grid()) || !g.same_nodes(omega.grid()) {
            return Err(Error::InvalidGrid("angle fields live on different grids".into()));
        }
        Ok(Self { theta, gamma, omega })
    }

    pub fn from_specs(grid: &GridSpec, theta: &AngleSpec, gamma: &AngleSpec, omega: &AngleSpec) -> Self {
        Self {
            theta: SampledAngle::from_spec(grid, theta),
            gamma: SampledAngle::from_spec(grid, gamma),
            omega: SampledAngle::from_spec(grid, omega),
        }
    }

    pub fn grid(&self) -> &GridSpec {
        self.theta.grid()
    }

    pub fn angles_at(&self, n: usize) -> UnitPhaseAngles {
        UnitPhaseAngles::new(
            self.theta.values.values[n],
            self.gamma.values.values[n],
            self.omega.values.values[n],
        )
    }

    pub fn k_field(&self) -> ScalarField<Quaternion> {
        let g = self.grid();
        ScalarField {
            grid: g.clone(),
            values: (0..g.len()).map(|n| k_from_angles(self.angles_at(n))).collect(),
        }
    }

    /// `max |∇Θ|` over unmasked nodes.
    pub fn max_theta_gradient(&self) -> f64 {
        self.theta.max_gradient()
    }
}

/// Derivatives of `K` in the form `∇K = p e^{iΓ} + (q e^{iΩ}) j` and
/// `∇²K = u e^{iΓ} + (v e^{iΩ}) j`.
#[derive(Debug, Clone, PartialEq)]
pub struct KDerivatives {
    pub p: VectorField<Complex64>,
    pub q: VectorField<Complex64>,
    pub u: ScalarField<Complex64>,
    pub v: ScalarField<Complex64>,
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

impl KDerivatives {
    /// Closed-form derivatives from the angle gradients and Laplacians.
    pub fn analytic(ph: &PhaseTriple) -> Self {
        let g = ph.grid();
        let i = Complex64::i();
        let len = g.len();
        let (mut px, mut py, mut qx, mut qy) = (
            Vec::with_capacity(len),
            Vec::with_capacity(len),
            Vec::with_capacity(len),
            Vec::with_capacity(len),
        );
        let mut u = Vec::with_capacity(len);
        let mut v = Vec::with_capacity(len);
        for n in 0..len {
            let (s, c) = ph.theta.values.values[n].sin_cos();
            let gt = ph.theta.grad.at(n);
            let gg = ph.gamma.grad.at(n);
            let go = ph.omega.grad.at(n);
            let lt = ph.theta.lap.values[n];
            let lg = ph.gamma.lap.values[n];
            let lo = ph.omega.lap.values[n];
            for a in 0..2 {
                let pa = Complex64::new(-s * gt[a], c * gg[a]);
                let qa = Complex64::new(c * gt[a], s * go[a]);
                if a == 0 {
                    px.push(pa);
                    qx.push(qa);
                } else {
                    py.push(pa);
                    qy.push(qa);
                }
            }
            let tt = dot(gt, gt);
            u.push(
                Complex64::new(-c * (dot(gg, gg) + tt) - s * lt, 0.0)
                    + i * (c * lg - 2.0 * s * dot(gg, gt)),
            );
            v.push(
                Complex64::new(-s * (dot(go, go) + tt) + c * lt, 0.0)
                    + i * (s * lo + 2.0 * c * dot(go, gt)),
            );
        }
        Self {
            p: VectorField { grid: g.clone(), comps: [px, py] },
            q: VectorField { grid: g.clone(), comps: [qx, qy] },
            u: ScalarField { grid: g.clone(), values: u },
            v: ScalarField { grid: g.clone(), values: v },
        }
    }

    /// Derivatives read off finite differences of the sampled `K` field.
    pub fn finite_difference(ph: &PhaseTriple) -> Self {
        let k = ph.k_field();
        let grad = fd_gradient(&k);
        let lap = fd_laplacian(&k);
        let g = ph.grid();
        let rot_g = |n: usize| Complex64::from_polar(1.0, -ph.gamma.values.values[n]);
        let rot_o = |n: usize| Complex64::from_polar(1.0, -ph.omega.values.values[n]);
        let comp = |f: &dyn Fn(usize) -> Complex64| -> Vec<Complex64> { (0..g.len()).map(f).collect() };
        Self {
            p: VectorField {
                grid: g.clone(),
                comps: [
                    comp(&|n| grad.comps[0][n].z * rot_g(n)),
                    comp(&|n| grad.comps[1][n].z * rot_g(n)),
                ],
            },
            q: VectorField {
                grid: g.clone(),
                comps: [
                    comp(&|n| grad.comps[0][n].zeta * rot_o(n)),
                    comp(&|n| grad.comps[1][n].zeta * rot_o(n)),
                ],
            },
            u: ScalarField { grid: g.clone(), values: comp(&|n| lap.values[n].z * rot_g(n)) },
            v: ScalarField { grid: g.clone(), values: comp(&|n| lap.values[n].zeta * rot_o(n)) },
        }
    }

    /// `∇K` reassembled as quaternions.
    pub fn grad_k(&self, ph: &PhaseTriple) -> VectorField<Quaternion> {
        let g = ph.grid();
        let build = |a: usize| -> Vec<Quaternion> {
            (0..g.len())
                .map(|n| {
                    Quaternion::new(
                        self.p.comps[a][n] * Complex64::from_polar(1.0, ph.gamma.values.values[n]),
                        self.q.comps[a][n] * Complex64::from_polar(1.0, ph.omega.values.values[n]),
                    )
                })
                .collect()
        };
        VectorField { grid: g.clone(), comps: [build(0), build(1)] }
    }

    /// `∇²K` reassembled as quaternions.
    pub fn lap_k(&self, ph: &PhaseTriple) -> ScalarField<Quaternion> {
        let g = ph.grid();
        ScalarField {
            grid: g.clone(),
            values: (0..g.len())
                .map(|n| {
                    Quaternion::new(
                        self.u.values[n] * Complex64::from_polar(1.0, ph.gamma.values.values[n]),
                        self.v.values[n] * Complex64::from_polar(1.0, ph.omega.values.values[n]),
                    )
                })
                .collect(),
        }
    }
}

pub fn k_derivatives_analytic(ph: &PhaseTriple) -> KDerivatives {
    KDerivatives::analytic(ph)
}

/// Where the residual evaluators take `∇K` and `∇²K` from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeSource {
    #[default]
    FiniteDifference,
    Analytic,
}

impl DerivativeSource {
    pub fn derivatives(self, ph: &PhaseTriple) -> KDerivatives {
        match self {
            Self::FiniteDifference => KDerivatives::finite_difference(ph),
            Self::Analytic => KDerivatives::analytic(ph),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::convergence_order;
    use std::f64::consts::FRAC_PI_4;

    fn square(n: usize) -> GridSpec {
        GridSpec::spanning(n, n, [0.0, 1.0], [0.0, 1.0]).unwrap()
    }

    #[test]
    fn constant_angles_have_zero_derivatives() {
        let g = square(9);
        let c = AngleSpec::constant(0.4);
        let kd = KDerivatives::analytic(&PhaseTriple::from_specs(&g, &c, &c, &c));
        assert_eq!(kd.p.max_magnitude(), 0.0);
        assert_eq!(kd.q.max_magnitude(), 0.0);
        assert_eq!(kd.u.max_magnitude(), 0.0);
        assert_eq!(kd.v.max_magnitude(), 0.0);
    }

    #[test]
    fn linear_gamma_closed_form() {
        let g = square(17);
        let (theta, k) = (0.6f64, 1.3);
        let ph = PhaseTriple::from_specs(
            &g,
            &AngleSpec::constant(theta),
            &AngleSpec::linear(0.0, [k, 0.0]),
            &AngleSpec::constant(0.0),
        );
        let kd = KDerivatives::analytic(&ph);
        for n in 0..g.len() {
            assert!((kd.p.comps[0][n] - Complex64::new(0.0, k * theta.cos())).norm() < 1e-15);
            assert_eq!(kd.p.comps[1][n], Complex64::default());
            assert_eq!(kd.q.comps[0][n], Complex64::default());
            assert!((kd.u.values[n] - Complex64::new(-theta.cos() * k * k, 0.0)).norm() < 1e-15);
            assert_eq!(kd.v.values[n], Complex64::default());
        }
    }

    #[test]
    fn imaginary_part_of_u_is_cos_theta_laplacian_gamma_when_theta_constant() {
        let g = square(17);
        let wave = AngleSpec::Sinusoid {
            offset: 0.0,
            amplitude: 0.8,
            wavevector: [1.0, 2.0],
            phase: 0.3,
        };
        let ph = PhaseTriple::from_specs(&g, &AngleSpec::constant(FRAC_PI_4), &wave, &wave);
        let kd = KDerivatives::analytic(&ph);
        for n in 0..g.len() {
            let expected = FRAC_PI_4.cos() * ph.gamma.lap.values[n];
            assert!((kd.u.values[n].im - expected).abs() < 1e-14);
        }
    }

    fn general_triple(g: &GridSpec) -> PhaseTriple {
        PhaseTriple::from_specs(
            g,
            &AngleSpec::Sinusoid { offset: 0.7, amplitude: 0.2, wavevector: [1.1, -0.6], phase: 0.1 },
            &AngleSpec::Sum {
                terms: vec![
                    AngleSpec::linear(0.0, [0.9, 0.3]),
                    AngleSpec::Sinusoid { offset: 0.0, amplitude: 0.4, wavevector: [0.5, 1.7], phase: 0.0 },
                ],
            },
            &AngleSpec::Sinusoid { offset: -0.2, amplitude: 0.5, wavevector: [-1.2, 0.8], phase: 0.9 },
        )
    }

    #[test]
    fn reconstructed_derivatives_match_finite_differences_at_second_order() {
        let errs: Vec<(f64, f64, f64)> = [33, 65, 129]
            .iter()
            .map(|&n| {
                let g = square(n);
                let ph = general_triple(&g);
                let kd = KDerivatives::analytic(&ph);
                let grad = kd.grad_k(&ph);
                let lap = kd.lap_k(&ph);
                let k = ph.k_field();
                let fd_grad = fd_gradient(&k);
                let fd_lap = fd_laplacian(&k);
                let mut eg: f64 = 0.0;
                let mut el: f64 = 0.0;
                for m in 0..g.len() {
                    for a in 0..2 {
                        eg = eg.max((grad.comps[a][m] - fd_grad.comps[a][m]).norm());
                    }
                    el = el.max((lap.values[m] - fd_lap.values[m]).norm());
                }
                (g.dx(), eg, el)
            })
            .collect();
        let og = convergence_order(&errs.iter().map(|e| (e.0, e.1)).collect::<Vec<_>>());
        let ol = convergence_order(&errs.iter().map(|e| (e.0, e.2)).collect::<Vec<_>>());
        assert!((og - 2.0).abs() < 0.2, "grad order {og}");
        assert!((ol - 2.0).abs() < 0.2, "lap order {ol}");
    }

    #[test]
    fn finite_difference_source_round_trips_through_reassembly() {
        let g = square(33);
        let ph = general_triple(&g);
        let kd = KDerivatives::finite_difference(&ph);
        let fd_grad = fd_gradient(&ph.k_field());
        let grad = kd.grad_k(&ph);
        for m in 0..g.len() {
            assert!((grad.comps[1][m] - fd_grad.comps[1][m]).norm() < 1e-12);
        }
    }

    #[test]
    fn mismatched_grids_rejected() {
        let a = SampledAngle::constant(&square(5), 0.0);
        let b = SampledAngle::constant(&square(6), 0.0);
        assert!(PhaseTriple::new(a.clone(), b, a).is_err());
    }
}
