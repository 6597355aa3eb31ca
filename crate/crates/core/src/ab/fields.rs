//! The prescribed phase gradients around the solenoid, the angles they
//! integrate to, the `β` potential and its curl.
//!
//! The prescribed gradients
//!
//! ```text
//! g_Γ = −|α| sin φ / cos²Θ x̂,    g_Ω = |α| cos φ / sin²Θ ŷ
//! ```
//!
//! combine to `cos²Θ g_Γ + sin²Θ g_Ω = α`, but neither is curl free:
//! `curl g_Γ = (c₀/cos²Θ)(r² − 2y²)/r⁴` and `curl g_Ω = (c₀/sin²Θ)(r² − 2x²)/r⁴`.
//! So `Γ` and `Ω` exist only along chosen paths. They are reconstructed
//! by integrating radially along the reference ray and then along the arc
//! of constant `r`, which puts a branch cut on the opposite ray.

use gauss_quad::GaussLegendre;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{fd_curl, fd_gradient, line_integral, GridSpec, Polyline, ScalarField, VectorField};

use super::setup::ABSetup;
use super::solenoid::solenoid_alpha;

const QUADRATURE_DEGREE: usize = 24;

/// Curl comparisons use only nodes with `r ≥ WALL_BAND · R`.
const WALL_BAND: f64 = 1.5;

/// Prescribed `(g_Γ, g_Ω)` at one point.
pub fn phase_gradients_at(setup: &ABSetup, p: [f64; 2]) -> Result<([f64; 2], [f64; 2])> {
    let (r, phi) = setup.solenoid.check_outside(p)?;
    Ok(gradients_polar(setup, r, phi))
}

fn gradients_polar(setup: &ABSetup, r: f64, phi: f64) -> ([f64; 2], [f64; 2]) {
    let a = setup.solenoid.coupling().abs() / r;
    let (c2, s2) = (setup.theta.cos().powi(2), setup.theta.sin().powi(2));
    // |α| is a modulus; the sign of c₀ enters through the orientation of α
    let sign = setup.solenoid.coupling().signum();
    ([-sign * a * phi.sin() / c2, 0.0], [0.0, sign * a * phi.cos() / s2])
}

fn check_grid(setup: &ABSetup, grid: &GridSpec) -> Result<()> {
    for n in grid.active() {
        let p = grid.point(n);
        if setup.solenoid.is_inside(p) {
            return Err(Error::OutsideDomain { x: p[0], y: p[1] });
        }
    }
    Ok(())
}

fn sample_vector<T: crate::field::FieldValue>(
    grid: &GridSpec,
    f: impl Fn([f64; 2]) -> Result<[T; 2]>,
) -> Result<VectorField<T>> {
    let mut out = VectorField::zeros(grid);
    for n in grid.active() {
        let v = f(grid.point(n))?;
        out.comps[0][n] = v[0];
        out.comps[1][n] = v[1];
    }
    Ok(out)
}

fn sample_scalar<T: crate::field::FieldValue>(
    grid: &GridSpec,
    f: impl Fn([f64; 2]) -> Result<T>,
) -> Result<ScalarField<T>> {
    let mut out = ScalarField::zeros(grid);
    for n in grid.active() {
        out.values[n] = f(grid.point(n))?;
    }
    Ok(out)
}

/// Sampled `(g_Γ, g_Ω)`; masked nodes hold zero. Unmasked nodes inside the
/// solenoid are an error.
pub fn ab_phase_gradients(setup: &ABSetup, grid: &GridSpec) -> Result<(VectorField<f64>, VectorField<f64>)> {
    check_grid(setup, grid)?;
    let gg = sample_vector(grid, |p| Ok(phase_gradients_at(setup, p)?.0))?;
    let go = sample_vector(grid, |p| Ok(phase_gradients_at(setup, p)?.1))?;
    Ok((gg, go))
}

/// `Γ`, `Ω` by Gauss-Legendre line integration of the prescribed
/// gradients: radial leg along the reference ray, then the arc.
pub struct AngleReconstruction<'a> {
    setup: &'a ABSetup,
    quad: GaussLegendre,
}

impl<'a> AngleReconstruction<'a> {
    pub fn new(setup: &'a ABSetup) -> Result<Self> {
        let quad = GaussLegendre::new(QUADRATURE_DEGREE).map_err(|e| Error::Domain(format!("quadrature setup: {e}")))?;
        Ok(Self { setup, quad })
    }

    /// `(Γ, Ω)` at `p`, with `φ ∈ (−π, π]` measured from the reference ray.
    pub fn angles(&self, p: [f64; 2]) -> Result<(f64, f64)> {
        let sol = &self.setup.solenoid;
        let (r, phi) = sol.check_outside(p)?;
        let r0 = self.setup.reference.radius;
        // both legs stay at radii ≥ min(r, r₀) > R, so no domain check here
        let radial = |which: usize| -> f64 {
            self.quad.integrate(r0, r, |s| {
                let g = gradients_polar(self.setup, s, 0.0);
                if which == 0 { g.0[0] } else { g.1[0] }
            })
        };
        let arc = |which: usize| -> f64 {
            self.quad.integrate(0.0, phi, |t| {
                let g = gradients_polar(self.setup, r, t);
                let v = if which == 0 { g.0 } else { g.1 };
                r * (-v[0] * t.sin() + v[1] * t.cos())
            })
        };
        Ok((self.setup.reference.gamma + radial(0) + arc(0), self.setup.reference.omega + radial(1) + arc(1)))
    }

    /// `β = −i sinΘ cosΘ e^{i(Γ+Ω)} (g_Γ − g_Ω)`, zero in the complex limit.
    pub fn beta(&self, p: [f64; 2]) -> Result<[Complex64; 2]> {
        if self.setup.complex_limit {
            self.setup.solenoid.check_outside(p)?;
            return Ok([Complex64::default(); 2]);
        }
        let (gg, go) = phase_gradients_at(self.setup, p)?;
        let (g, o) = self.angles(p)?;
        let f = self.prefactor(g + o);
        Ok([f * (gg[0] - go[0]), f * (gg[1] - go[1])])
    }

    fn prefactor(&self, sum: f64) -> Complex64 {
        let (s, c) = self.setup.theta.sin_cos();
        Complex64::new(0.0, -s * c) * Complex64::from_polar(1.0, sum)
    }

    /// `2|α|² sin 2φ / sin 2Θ e^{i(Γ+Ω)}`.
    pub fn beta_curl_analytic(&self, p: [f64; 2]) -> Result<Complex64> {
        if self.setup.complex_limit {
            self.setup.solenoid.check_outside(p)?;
            return Ok(Complex64::default());
        }
        let (r, phi) = self.setup.solenoid.check_outside(p)?;
        let a = self.setup.solenoid.coupling() / r;
        let (g, o) = self.angles(p)?;
        Ok(Complex64::from_polar(2.0 * a * a * (2.0 * phi).sin() / (2.0 * self.setup.theta).sin(), g + o))
    }
}

/// `β` on the grid.
pub fn beta_field(setup: &ABSetup, grid: &GridSpec) -> Result<VectorField<Complex64>> {
    check_grid(setup, grid)?;
    let rec = AngleReconstruction::new(setup)?;
    sample_vector(grid, |p| rec.beta(p))
}

/// Closed-form `z` component of `∇×β` on the grid.
pub fn beta_curl_analytic(setup: &ABSetup, grid: &GridSpec) -> Result<ScalarField<Complex64>> {
    check_grid(setup, grid)?;
    let rec = AngleReconstruction::new(setup)?;
    sample_scalar(grid, |p| rec.beta_curl_analytic(p))
}

/// Closed-form curls of the prescribed gradients.
pub fn phase_gradient_curls_analytic(setup: &ABSetup, p: [f64; 2]) -> Result<(f64, f64)> {
    let (r, phi) = setup.solenoid.check_outside(p)?;
    let c0 = setup.solenoid.coupling();
    let (x, y) = (r * phi.cos(), r * phi.sin());
    let r4 = r.powi(4);
    let (c2, s2) = (setup.theta.cos().powi(2), setup.theta.sin().powi(2));
    Ok((c0 / c2 * (r * r - 2.0 * y * y) / r4, c0 / s2 * (r * r - 2.0 * x * x) / r4))
}

/// Circulations of the prescribed gradients around a circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LoopClosure {
    pub radius: f64,
    pub gamma: f64,
    pub omega: f64,
    /// `π c₀ / cos²Θ`.
    pub gamma_analytic: f64,
    /// `π c₀ / sin²Θ`.
    pub omega_analytic: f64,
}

pub fn loop_closure(setup: &ABSetup, radius: f64, segments: usize) -> Result<LoopClosure> {
    let path = Polyline::circle(setup.solenoid.center, radius, segments, 0.1)?;
    let gamma = line_integral(|p| Ok(phase_gradients_at(setup, p)?.0), &path, 4)?;
    let omega = line_integral(|p| Ok(phase_gradients_at(setup, p)?.1), &path, 4)?;
    let c0 = setup.solenoid.coupling();
    let pi = std::f64::consts::PI;
    Ok(LoopClosure {
        radius,
        gamma,
        omega,
        gamma_analytic: pi * c0 / setup.theta.cos().powi(2),
        omega_analytic: pi * c0 / setup.theta.sin().powi(2),
    })
}

/// Finite-difference curls against their closed forms.
///
/// For `β = f (g_Γ − g_Ω)` with `f = −i sinΘ cosΘ e^{i(Γ+Ω)}` the curl is
///
/// ```text
/// ∇×β = −sin2Θ e^{i(Γ+Ω)} g_Γ × g_Ω                       (closed form)
///     + f (curl g_Γ − curl g_Ω)                            (loop-closure defect)
///     + i f ((∇Γ − g_Γ) + (∇Ω − g_Ω)) × (g_Γ − g_Ω)        (reconstruction mismatch)
/// ```
///
/// where `∇Γ`, `∇Ω` are gradients of the reconstructed angles. The last two
/// lines are the path-dependence term. Comparisons skip masked nodes, the
/// two cells around the mask and the branch cut, and everything inside
/// `r = 1.5 R`.
#[derive(Debug, Clone, Serialize)]
pub struct CurlDiagnostics {
    pub alpha_curl_max: f64,
    pub gamma_curl_error: f64,
    pub gamma_curl_max: f64,
    pub omega_curl_error: f64,
    pub omega_curl_max: f64,
    /// `max |curl β (numeric) − closed form|`.
    pub beta_curl_gap: f64,
    /// `max |path-dependence term|`.
    pub beta_defect_max: f64,
    /// `max |curl β (numeric) − closed form − path-dependence term|`.
    pub beta_curl_residual: f64,
    pub compared_nodes: usize,
    #[serde(skip)]
    pub fields: CurlFieldsSampled,
}

#[derive(Debug, Clone, Default)]
pub struct CurlFieldsSampled {
    pub alpha: Option<VectorField<f64>>,
    pub grad_gamma: Option<VectorField<f64>>,
    pub grad_omega: Option<VectorField<f64>>,
    pub beta: Option<VectorField<Complex64>>,
    pub beta_curl_numeric: Option<ScalarField<Complex64>>,
    pub beta_curl_analytic: Option<ScalarField<Complex64>>,
    pub beta_curl_defect: Option<ScalarField<Complex64>>,
}

fn cross(a: [f64; 2], b: [Complex64; 2]) -> Complex64 {
    b[1] * a[0] - b[0] * a[1]
}

/// Nodes used for comparisons: unmasked, two cells away from the mask, the
/// branch cut and the grid edge, and outside `r = 1.5 R` so the excluded
/// band does not shrink toward the wall under refinement.
fn comparison_nodes(setup: &ABSetup, grid: &GridSpec) -> Vec<usize> {
    let c = setup.solenoid.center;
    let (hx, hy) = (grid.dx(), grid.dy());
    let near_mask = |n: usize| {
        let (i, j) = grid.coords(n);
        (-2isize..=2).any(|di| {
            (-2isize..=2).any(|dj| {
                let (a, b) = (i as isize + di, j as isize + dj);
                a < 0
                    || b < 0
                    || a >= grid.nx() as isize
                    || b >= grid.ny() as isize
                    || grid.is_masked(grid.index(a as usize, b as usize))
            })
        })
    };
    grid.active()
        .filter(|&n| {
            let p = grid.point(n);
            let near_cut = p[0] < c[0] + 2.0 * hx && (p[1] - c[1]).abs() <= 2.0 * hy;
            let far = setup.solenoid.polar(p).0 >= WALL_BAND * setup.solenoid.radius();
            far && !near_cut && !near_mask(n)
        })
        .collect()
}

pub fn curl_diagnostics(setup: &ABSetup, grid: &GridSpec) -> Result<CurlDiagnostics> {
    check_grid(setup, grid)?;
    let rec = AngleReconstruction::new(setup)?;
    let alpha = sample_vector(grid, |p| solenoid_alpha(&setup.solenoid, p))?;
    let (gg, go) = ab_phase_gradients(setup, grid)?;
    let beta = sample_vector(grid, |p| rec.beta(p))?;
    let analytic = sample_scalar(grid, |p| rec.beta_curl_analytic(p))?;
    let angles = sample_vector(grid, |p| {
        let (g, o) = rec.angles(p)?;
        Ok([g, o])
    })?;
    let gamma_rec = angles.component(0);
    let omega_rec = angles.component(1);
    let d_gamma = fd_gradient(&gamma_rec);
    let d_omega = fd_gradient(&omega_rec);
    let curl_alpha = fd_curl(&alpha);
    let curl_gg = fd_curl(&gg);
    let curl_go = fd_curl(&go);
    let numeric = fd_curl(&beta);

    let mut defect = ScalarField::<Complex64>::zeros(grid);
    if !setup.complex_limit {
        let (s, c) = setup.theta.sin_cos();
        for n in grid.active() {
            let p = grid.point(n);
            let (cg, co) = phase_gradient_curls_analytic(setup, p)?;
            let [g, o] = angles.at(n);
            let f = Complex64::new(0.0, -s * c) * Complex64::from_polar(1.0, g + o);
            let diff = [Complex64::from(gg.comps[0][n] - go.comps[0][n]), Complex64::from(gg.comps[1][n] - go.comps[1][n])];
            let mismatch = [
                d_gamma.comps[0][n] - gg.comps[0][n] + d_omega.comps[0][n] - go.comps[0][n],
                d_gamma.comps[1][n] - gg.comps[1][n] + d_omega.comps[1][n] - go.comps[1][n],
            ];
            defect.values[n] = f * (cg - co) + Complex64::i() * f * cross(mismatch, diff);
        }
    }

    let nodes = comparison_nodes(setup, grid);
    let max_over = |f: &dyn Fn(usize) -> f64| nodes.iter().map(|&n| f(n)).fold(0.0, f64::max);
    let mut gamma_curl_error = 0.0f64;
    let mut omega_curl_error = 0.0f64;
    let mut gamma_curl_max = 0.0f64;
    let mut omega_curl_max = 0.0f64;
    for &n in &nodes {
        let (cg, co) = phase_gradient_curls_analytic(setup, grid.point(n))?;
        gamma_curl_error = gamma_curl_error.max((curl_gg.values[n] - cg).abs());
        omega_curl_error = omega_curl_error.max((curl_go.values[n] - co).abs());
        gamma_curl_max = gamma_curl_max.max(cg.abs());
        omega_curl_max = omega_curl_max.max(co.abs());
    }
    Ok(CurlDiagnostics {
        alpha_curl_max: max_over(&|n| curl_alpha.values[n].abs()),
        gamma_curl_error,
        gamma_curl_max,
        omega_curl_error,
        omega_curl_max,
        beta_curl_gap: max_over(&|n| (numeric.values[n] - analytic.values[n]).norm()),
        beta_defect_max: max_over(&|n| defect.values[n].norm()),
        beta_curl_residual: max_over(&|n| (numeric.values[n] - analytic.values[n] - defect.values[n]).norm()),
        compared_nodes: nodes.len(),
        fields: CurlFieldsSampled {
            alpha: Some(alpha),
            grad_gamma: Some(gg),
            grad_omega: Some(go),
            beta: Some(beta),
            beta_curl_numeric: Some(numeric),
            beta_curl_analytic: Some(analytic),
            beta_curl_defect: Some(defect),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ab::solenoid::SolenoidConfig;
    use std::f64::consts::{FRAC_PI_4, PI};

    fn setup(theta: f64) -> ABSetup {
        ABSetup::new(SolenoidConfig::with_flux(0.5, 1.7).unwrap(), theta).unwrap()
    }

    #[test]
    fn gradients_recombine_into_alpha() {
        let s = setup(0.6);
        let (c2, s2) = (0.6f64.cos().powi(2), 0.6f64.sin().powi(2));
        for p in [[1.0, 0.3], [-0.7, 0.9], [0.2, -2.0], [-3.0, -0.1]] {
            let (g, o) = phase_gradients_at(&s, p).unwrap();
            let a = solenoid_alpha(&s.solenoid, p).unwrap();
            for k in 0..2 {
                assert!((c2 * g[k] + s2 * o[k] - a[k]).abs() < 1e-12);
            }
        }
        assert_eq!(phase_gradients_at(&s, [2.0, 0.0]).unwrap().0[0], 0.0);
    }

    #[test]
    fn reconstruction_matches_closed_form() {
        // arc integrals of sin²φ and cos²φ; the radial leg contributes nothing
        let s = setup(0.7);
        let rec = AngleReconstruction::new(&s).unwrap();
        let c0 = s.solenoid.coupling();
        let (c2, s2) = (0.7f64.cos().powi(2), 0.7f64.sin().powi(2));
        for p in [[1.0f64, 0.3], [-0.7, 0.9], [0.2, -2.0], [-3.0, -0.1]] {
            let phi = p[1].atan2(p[0]);
            let (g, o) = rec.angles(p).unwrap();
            assert!((g - c0 / c2 * (phi / 2.0 - (2.0 * phi).sin() / 4.0)).abs() < 1e-12);
            assert!((o - c0 / s2 * (phi / 2.0 + (2.0 * phi).sin() / 4.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn analytic_curl_special_angles() {
        let s = setup(0.6);
        let rec = AngleReconstruction::new(&s).unwrap();
        assert!(rec.beta_curl_analytic([1.0, 0.0]).unwrap().norm() < 1e-15);
        assert!(rec.beta_curl_analytic([0.0, 1.0]).unwrap().norm() < 1e-15);
        let r = 1.3;
        let a = s.solenoid.coupling() / r;
        let v = rec.beta_curl_analytic([r * FRAC_PI_4.cos(), r * FRAC_PI_4.sin()]).unwrap();
        assert!((v.norm() - 2.0 * a * a / 1.2f64.sin()).abs() < 1e-12);
    }

    #[test]
    fn analytic_curl_equals_cross_product_form() {
        let s = setup(0.9);
        let rec = AngleReconstruction::new(&s).unwrap();
        for p in [[1.0, 0.3], [-0.7, 0.9], [0.2, -2.0]] {
            let (g, o) = phase_gradients_at(&s, p).unwrap();
            let (a, b) = rec.angles(p).unwrap();
            let cross = g[0] * o[1] - g[1] * o[0];
            let want = Complex64::from_polar(-(1.8f64).sin() * cross, a + b);
            assert!((rec.beta_curl_analytic(p).unwrap() - want).norm() < 1e-12);
        }
    }

    #[test]
    fn loop_closure_matches_analytic() {
        let s = setup(0.6);
        let l = loop_closure(&s, 1.5, 512).unwrap();
        assert!((l.gamma - l.gamma_analytic).abs() < 1e-5 && (l.omega - l.omega_analytic).abs() < 1e-5, "{l:?}");
        let c2 = 0.6f64.cos().powi(2);
        assert!((c2 * l.gamma + (1.0 - c2) * l.omega - s.solenoid.ab_phase()).abs() < 1e-5);
    }

    #[test]
    fn unmasked_interior_node_is_an_error() {
        let s = setup(0.6);
        let g = GridSpec::spanning(9, 9, [-1.0, 1.0], [-1.0, 1.0]).unwrap();
        assert!(matches!(beta_field(&s, &g), Err(Error::OutsideDomain { .. })));
        assert!(beta_field(&s, &s.mask_grid(g)).is_ok());
    }

    #[test]
    fn curl_decomposition_converges() {
        let s = setup(0.6);
        let run = |n: usize| {
            let g = s.mask_grid(GridSpec::spanning(n, n, [-2.0, 2.0], [-2.0, 2.0]).unwrap());
            curl_diagnostics(&s, &g).unwrap()
        };
        let (a, b) = (run(81), run(161));
        assert!(a.beta_curl_residual / b.beta_curl_residual > 3.0, "{} {}", a.beta_curl_residual, b.beta_curl_residual);
        assert!(a.gamma_curl_error / b.gamma_curl_error > 3.0);
        assert!(b.gamma_curl_max > 0.1 && b.beta_defect_max > 0.1);
        assert!(a.alpha_curl_max / b.alpha_curl_max > 3.0);
        let _ = PI;
    }

    #[test]
    fn complex_limit_has_no_beta() {
        let s = setup(0.6).complex();
        let rec = AngleReconstruction::new(&s).unwrap();
        assert_eq!(rec.beta([1.0, 1.0]).unwrap(), [Complex64::default(); 2]);
    }
}
