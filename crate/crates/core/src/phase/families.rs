use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{fd_curl, ScalarField, VectorField};
use crate::quaternion::Quaternion;

use super::angle::SampledAngle;
use super::potentials::{LambdaField, PotentialPair};
use super::triple::PhaseTriple;

const UNIT_TOLERANCE: f64 = 1e-12;
const DEGENERATE_TOLERANCE: f64 = 1e-9;

/// An exact solution: the phase, the potentials that make it covariantly
/// constant and the `λ` that ties its split equations together.
#[derive(Debug, Clone, PartialEq)]
pub struct Family {
    pub phase: PhaseTriple,
    pub potentials: PotentialPair,
    pub lambda: LambdaField,
}

impl Family {
    pub fn k_field(&self) -> ScalarField<Quaternion> {
        self.phase.k_field()
    }
}

/// `K = e^{iΩ} L` with a constant unit quaternion `L`, `α = ∇Ω`, `β = 0`.
///
/// Written in angle form this is `Θ = atan2(|L_ζ|, |L_z|)`, `Γ = Ω + arg L_z`
/// and `Ω_K = Ω + arg L_ζ`, so `Γ − Ω_K` is constant. `λ` is set to zero.
pub fn family_simple(omega: &SampledAngle, l: Quaternion) -> Result<Family> {
    let norm = l.norm();
    if (norm - 1.0).abs() > UNIT_TOLERANCE {
        return Err(Error::NonUnit { norm });
    }
    let g = omega.grid();
    let arg = |c: Complex64| if c.norm() > 0.0 { c.arg() } else { 0.0 };
    let theta = SampledAngle::constant(g, l.zeta.norm().atan2(l.z.norm()));
    let phase = PhaseTriple::new(theta, omega.shifted(arg(l.z)), omega.shifted(arg(l.zeta)))?;
    let potentials = PotentialPair {
        alpha: omega.grad.clone(),
        beta: VectorField::zeros(g),
    };
    Ok(Family {
        phase,
        potentials,
        lambda: LambdaField::constant(g, Complex64::default()),
    })
}

/// The constant-`Θ` family with `λ = −tan Θ e^{i(Γ+Ω)}`:
///
/// ```text
/// α = cos²Θ ∇Γ + sin²Θ ∇Ω
/// β = −i sinΘ cosΘ e^{i(Γ+Ω)} ∇(Γ − Ω)
/// ```
pub fn family_ab(ph: &PhaseTriple) -> Result<Family> {
    let g = ph.grid();
    let slope = ph.max_theta_gradient();
    if slope > 0.0 {
        return Err(Error::Precondition(format!("theta must be constant, max |grad theta| = {slope:e}")));
    }
    for n in g.active() {
        let theta = ph.theta.values.values[n];
        let (s, c) = theta.sin_cos();
        if s.abs() < DEGENERATE_TOLERANCE || c.abs() < DEGENERATE_TOLERANCE {
            return Err(Error::DegenerateFamily { theta });
        }
    }
    let mut alpha = VectorField::zeros(g);
    let mut beta = VectorField::zeros(g);
    for n in g.active() {
        let a = ph.angles_at(n);
        let (s, c) = a.theta.sin_cos();
        let f = Complex64::new(0.0, -s * c) * Complex64::from_polar(1.0, a.gamma + a.omega);
        for k in 0..2 {
            let gg = ph.gamma.grad.comps[k][n];
            let go = ph.omega.grad.comps[k][n];
            alpha.comps[k][n] = c * c * gg + s * s * go;
            beta.comps[k][n] = f * (gg - go);
        }
    }
    Ok(Family {
        phase: ph.clone(),
        potentials: PotentialPair { alpha, beta },
        lambda: LambdaField::antiphase(ph),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurlFields {
    pub curl_alpha: ScalarField<f64>,
    pub curl_beta: ScalarField<Complex64>,
    /// `−sin 2Θ e^{i(Γ+Ω)} ∇Γ × ∇Ω`
    pub curl_beta_analytic: ScalarField<Complex64>,
}

impl CurlFields {
    /// `max |numeric curl β − analytic curl β|` over unmasked nodes.
    pub fn beta_mismatch(&self) -> f64 {
        self.curl_beta
            .zip_map(&self.curl_beta_analytic, |a, b| a - b)
            .max_magnitude()
    }
}

pub fn curl_fields(pot: &PotentialPair, ph: &PhaseTriple) -> CurlFields {
    let g = ph.grid();
    let analytic = ScalarField {
        grid: g.clone(),
        values: (0..g.len())
            .map(|n| {
                if g.is_masked(n) {
                    return Complex64::default();
                }
                let a = ph.angles_at(n);
                let gg = ph.gamma.grad.at(n);
                let go = ph.omega.grad.at(n);
                let cross = gg[0] * go[1] - gg[1] * go[0];
                Complex64::from_polar(-(2.0 * a.theta).sin() * cross, a.gamma + a.omega)
            })
            .collect(),
    };
    CurlFields {
        curl_alpha: fd_curl(&pot.alpha),
        curl_beta: fd_curl(&pot.beta),
        curl_beta_analytic: analytic,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{convergence_order, GridSpec};
    use crate::phase::{potentials_from_phase, AngleSpec, DerivativeSource, ResidualContext};
    use std::f64::consts::FRAC_PI_4;

    fn square(n: usize) -> GridSpec {
        GridSpec::spanning(n, n, [0.0, 1.0], [0.0, 1.0]).unwrap()
    }

    fn wave(a: f64, k: [f64; 2], p: f64) -> AngleSpec {
        AngleSpec::Sinusoid { offset: 0.0, amplitude: a, wavevector: k, phase: p }
    }

    fn ab_phase(g: &GridSpec, theta: f64) -> PhaseTriple {
        PhaseTriple::from_specs(
            g,
            &AngleSpec::constant(theta),
            &wave(0.9, [1.2, 0.5], 0.3),
            &AngleSpec::Sum { terms: vec![AngleSpec::linear(0.1, [0.4, -0.8]), wave(0.3, [0.2, 1.4], 0.0)] },
        )
    }

    #[test]
    fn simple_family_rejects_non_unit_l() {
        let g = square(9);
        let om = SampledAngle::constant(&g, 0.0);
        let l = Quaternion::from_real4([1.0, 0.0, 0.1, 0.0]);
        assert!(matches!(family_simple(&om, l), Err(Error::NonUnit { .. })));
    }

    #[test]
    fn simple_family_identity_configuration() {
        let g = square(9);
        let fam = family_simple(&SampledAngle::constant(&g, 0.0), Quaternion::ONE).unwrap();
        for k in fam.k_field().values {
            assert!((k - Quaternion::ONE).norm() < 1e-15);
        }
        assert_eq!(fam.potentials.alpha.max_magnitude(), 0.0);
    }

    #[test]
    fn simple_family_k_is_phase_times_l() {
        let g = square(9);
        let om = SampledAngle::from_spec(&g, &wave(1.0, [1.0, 2.0], 0.0));
        let l = Quaternion::from_real4([0.5, -0.5, 0.5, 0.5]);
        let fam = family_simple(&om, l).unwrap();
        let k = fam.k_field();
        for n in 0..g.len() {
            let e = Quaternion::from_complex(Complex64::from_polar(1.0, om.values.values[n]));
            assert!((k.values[n] - e * l).norm() < 1e-14);
        }
    }

    #[test]
    fn simple_family_with_j_does_not_commute_with_i() {
        let g = square(9);
        let om = SampledAngle::from_spec(&g, &AngleSpec::linear(0.0, [1.3, 0.0]));
        let fam = family_simple(&om, Quaternion::J).unwrap();
        let k = fam.k_field().values[10];
        assert!(Quaternion::commutator_norm(k, Quaternion::I) > 1.0);
    }

    #[test]
    fn ab_family_rejects_degenerate_and_sloped_theta() {
        let g = square(9);
        let flat = |t: f64| PhaseTriple::from_specs(&g, &AngleSpec::constant(t), &wave(1.0, [1.0, 0.0], 0.0), &AngleSpec::constant(0.0));
        assert!(matches!(family_ab(&flat(0.0)), Err(Error::DegenerateFamily { .. })));
        assert!(matches!(family_ab(&flat(std::f64::consts::FRAC_PI_2)), Err(Error::DegenerateFamily { .. })));
        let sloped = PhaseTriple::from_specs(&g, &AngleSpec::linear(0.5, [0.1, 0.0]), &AngleSpec::constant(0.0), &AngleSpec::constant(0.0));
        assert!(matches!(family_ab(&sloped), Err(Error::Precondition(_))));
    }

    #[test]
    fn ab_family_closed_form_for_linear_gamma() {
        let g = square(17);
        let k = 1.7;
        let ph = PhaseTriple::from_specs(
            &g,
            &AngleSpec::constant(FRAC_PI_4),
            &AngleSpec::linear(0.0, [k, 0.0]),
            &AngleSpec::constant(0.0),
        );
        let fam = family_ab(&ph).unwrap();
        for n in 0..g.len() {
            let x = g.point(n)[0];
            let expected = Complex64::new(0.0, -0.5) * Complex64::from_polar(1.0, k * x) * k;
            assert!((fam.potentials.beta.comps[0][n] - expected).norm() < 1e-14);
            assert_eq!(fam.potentials.beta.comps[1][n], Complex64::default());
        }
    }

    #[test]
    fn ab_family_matches_general_potentials() {
        let g = square(17);
        let ph = ab_phase(&g, 0.7);
        let fam = family_ab(&ph).unwrap();
        let general = potentials_from_phase(&ph, &fam.lambda).unwrap();
        for n in 0..g.len() {
            for k in 0..2 {
                assert!((fam.potentials.alpha.comps[k][n] - general.alpha.comps[k][n]).abs() < 1e-12);
                assert!((fam.potentials.beta.comps[k][n] - general.beta.comps[k][n]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn ab_family_reduces_to_simple_family_when_phases_move_together() {
        let g = square(17);
        let om = SampledAngle::from_spec(&g, &wave(0.8, [0.7, 1.1], 0.2));
        let ph = PhaseTriple::new(SampledAngle::constant(&g, 0.5), om.clone(), om.clone()).unwrap();
        let fam = family_ab(&ph).unwrap();
        assert_eq!(fam.potentials.beta.max_magnitude(), 0.0);
        let l = crate::quaternion::k_from_angles(crate::UnitPhaseAngles::new(0.5, 0.0, 0.0));
        let simple = family_simple(&om, l).unwrap();
        for n in 0..g.len() {
            for k in 0..2 {
                assert!((fam.potentials.alpha.comps[k][n] - simple.potentials.alpha.comps[k][n]).abs() < 1e-14);
            }
            assert!((fam.k_field().values[n] - simple.k_field().values[n]).norm() < 1e-14);
        }
    }

    #[test]
    fn ab_family_tends_to_complex_phase_as_theta_vanishes() {
        let g = square(9);
        let mut last = f64::INFINITY;
        for theta in [1e-2, 1e-4, 1e-6] {
            let fam = family_ab(&ab_phase(&g, theta)).unwrap();
            let beta = fam.potentials.beta.max_magnitude();
            let alpha = &fam.potentials.alpha;
            let grad_gamma = &fam.phase.gamma.grad;
            let mut dev: f64 = 0.0;
            for k in 0..2 {
                for (a, b) in alpha.comps[k].iter().zip(&grad_gamma.comps[k]) {
                    dev = dev.max((a - b).abs());
                }
            }
            assert!(beta < 10.0 * theta && dev < 5.0 * theta * theta);
            assert!(beta < last);
            last = beta;
        }
    }

    #[test]
    fn certifying_identity_converges_for_both_families() {
        for source in [DerivativeSource::Analytic, DerivativeSource::FiniteDifference] {
            let errs: Vec<(f64, f64, f64)> = [33, 65, 129]
                .iter()
                .map(|&n| {
                    let g = square(n);
                    let fam = family_ab(&ab_phase(&g, 0.6)).unwrap();
                    let ctx = ResidualContext::new(&fam.phase, &fam.potentials, source).unwrap();
                    let ab = ctx.certifying_identity().max;
                    let om = SampledAngle::from_spec(&g, &wave(1.1, [0.6, -0.9], 0.1));
                    let simple = family_simple(&om, Quaternion::from_real4([0.5, 0.5, -0.5, 0.5])).unwrap();
                    let ctx = ResidualContext::new(&simple.phase, &simple.potentials, source).unwrap();
                    (g.dx(), ab, ctx.certifying_identity().max)
                })
                .collect();
            if source == DerivativeSource::Analytic {
                assert!(errs.iter().all(|e| e.1 < 1e-13 && e.2 < 1e-13), "{errs:?}");
            } else {
                let o1 = convergence_order(&errs.iter().map(|e| (e.0, e.1)).collect::<Vec<_>>());
                let o2 = convergence_order(&errs.iter().map(|e| (e.0, e.2)).collect::<Vec<_>>());
                assert!((o1 - 2.0).abs() < 0.2 && (o2 - 2.0).abs() < 0.2, "{o1} {o2}");
            }
        }
    }

    #[test]
    fn curl_of_alpha_vanishes_and_curl_of_beta_matches_closed_form() {
        let errs: Vec<(f64, f64, f64)> = [33, 65, 129]
            .iter()
            .map(|&n| {
                let g = square(n);
                let fam = family_ab(&ab_phase(&g, 0.6)).unwrap();
                let curls = curl_fields(&fam.potentials, &fam.phase);
                (g.dx(), curls.curl_alpha.max_magnitude(), curls.beta_mismatch())
            })
            .collect();
        let oa = convergence_order(&errs.iter().map(|e| (e.0, e.1)).collect::<Vec<_>>());
        let ob = convergence_order(&errs.iter().map(|e| (e.0, e.2)).collect::<Vec<_>>());
        assert!((oa - 2.0).abs() < 0.2, "curl alpha order {oa}");
        assert!((ob - 2.0).abs() < 0.2, "curl beta order {ob}");
    }

    #[test]
    fn parallel_phase_gradients_give_zero_analytic_curl() {
        let g = square(9);
        let ph = PhaseTriple::from_specs(
            &g,
            &AngleSpec::constant(0.4),
            &AngleSpec::linear(0.0, [1.0, 2.0]),
            &AngleSpec::linear(0.0, [-0.5, -1.0]),
        );
        let fam = family_ab(&ph).unwrap();
        let curls = curl_fields(&fam.potentials, &fam.phase);
        assert_eq!(curls.curl_beta_analytic.max_magnitude(), 0.0);
    }
}
