use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{fd_divergence, fd_gradient, FieldValue, GridSpec, ScalarField, VectorField};
use crate::quaternion::Quaternion;

use super::potentials::{LambdaField, PotentialPair, SINGULAR_TOLERANCE};
use super::triple::{DerivativeSource, KDerivatives, PhaseTriple};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridMeta {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
}

impl From<&GridSpec> for GridMeta {
    fn from(g: &GridSpec) -> Self {
        Self { nx: g.nx(), ny: g.ny(), dx: g.dx(), dy: g.dy() }
    }
}

/// Max and mean of a residual's pointwise magnitude over unmasked nodes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub equation: String,
    pub max: f64,
    pub mean: f64,
    pub grid: GridMeta,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<serde_json::Value>,
    #[serde(skip)]
    pub field: ScalarField<f64>,
}

impl ResidualReport {
    pub fn from_magnitudes(equation: impl Into<String>, field: ScalarField<f64>) -> Self {
        let g = &field.grid;
        let (mut max, mut sum, mut count) = (0.0f64, 0.0, 0usize);
        for n in g.active() {
            let v = field.values[n];
            max = max.max(v);
            sum += v;
            count += 1;
        }
        Self {
            equation: equation.into(),
            max,
            mean: if count == 0 { 0.0 } else { sum / count as f64 },
            grid: GridMeta::from(g),
            config: None,
            field,
        }
    }

    pub fn from_scalar<T: FieldValue>(equation: impl Into<String>, f: &ScalarField<T>) -> Self {
        Self::from_magnitudes(equation, f.map(|v| v.magnitude()))
    }

    pub fn from_vector<T: FieldValue>(equation: impl Into<String>, v: &VectorField<T>) -> Self {
        let g = &v.grid;
        let mags = (0..g.len())
            .map(|n| v.comps[0][n].magnitude().hypot(v.comps[1][n].magnitude()))
            .collect();
        Self::from_magnitudes(equation, ScalarField { grid: g.clone(), values: mags })
    }

    pub fn with_config(mut self, config: serde_json::Value) -> Self {
        self.config = Some(config);
        self
    }
}

/// Per-node coefficients of the split equations, `∇·Q` and `η` shared by
/// every residual of one configuration.
pub struct ResidualContext<'a> {
    ph: &'a PhaseTriple,
    pot: &'a PotentialPair,
    kd: KDerivatives,
    div_alpha: ScalarField<f64>,
    div_beta: ScalarField<Complex64>,
    eta: ScalarField<f64>,
}

/// Coefficients of `φ` in the complex and `j` equations, written so that
/// the complex part reads `(A e^{iΓ} + B e^{−iΩ}) φ` and the conjugated `j`
/// part `(C e^{−iΩ} − D e^{iΓ}) φ`.
#[derive(Debug, Clone, Copy)]
struct NodeCoefficients {
    a: Complex64,
    b: Complex64,
    c: Complex64,
    d: Complex64,
    /// `p − i cosΘ α`
    grad_complex: [Complex64; 2],
    /// `q̄ + i sinΘ α`
    grad_j: [Complex64; 2],
}

fn cdot(a: [Complex64; 2], b: [Complex64; 2]) -> Complex64 {
    a[0] * b[0] + a[1] * b[1]
}

impl<'a> ResidualContext<'a> {
    pub fn new(ph: &'a PhaseTriple, pot: &'a PotentialPair, source: DerivativeSource) -> Result<Self> {
        if !ph.grid().same_nodes(pot.grid()) {
            return Err(Error::InvalidGrid("phase and potentials live on different grids".into()));
        }
        Ok(Self {
            ph,
            pot,
            kd: source.derivatives(ph),
            div_alpha: fd_divergence(&pot.alpha),
            div_beta: fd_divergence(&pot.beta),
            eta: pot.eta(),
        })
    }

    pub fn grid(&self) -> &GridSpec {
        self.ph.grid()
    }

    pub fn derivatives(&self) -> &KDerivatives {
        &self.kd
    }

    fn trig(&self, n: usize) -> (f64, f64, Complex64, Complex64) {
        let (s, c) = self.ph.theta.values.values[n].sin_cos();
        let eg = Complex64::from_polar(1.0, self.ph.gamma.values.values[n]);
        let eo = Complex64::from_polar(1.0, -self.ph.omega.values.values[n]);
        (s, c, eg, eo)
    }

    fn coefficients(&self, n: usize) -> NodeCoefficients {
        let i = Complex64::i();
        let (s, c, _, _) = self.trig(n);
        let p = self.kd.p.at(n);
        let qb = self.kd.q.at(n).map(|z| z.conj());
        let al = self.pot.alpha.at(n).map(|x| Complex64::new(x, 0.0));
        let be = self.pot.beta.at(n);
        let bb = be.map(|z| z.conj());
        let da = self.div_alpha.values[n];
        let db = self.div_beta.values[n];
        let eta = self.eta.values[n];
        NodeCoefficients {
            a: self.kd.u.values[n] - i * c * da - 2.0 * i * cdot(al, p) + c * eta,
            b: s * db + 2.0 * cdot(be, qb),
            c: self.kd.v.values[n].conj() + i * s * da + 2.0 * i * cdot(al, qb) + s * eta,
            d: c * db.conj() + 2.0 * cdot(bb, p),
            grad_complex: [0, 1].map(|k| p[k] - i * c * al[k]),
            grad_j: [0, 1].map(|k| qb[k] + i * s * al[k]),
        }
    }

    /// `[∇²K − (∇·Q)K − 2Q·∇K + ηK] φ + 2(∇K − QK)·∇φ` by quaternion
    /// arithmetic at one node.
    fn master_at(&self, n: usize, phi: Complex64, gphi: [Complex64; 2]) -> Quaternion {
        let k = self.k_at(n);
        let grad = self.grad_k_at(n);
        let q = self.pot.q_at(n);
        let div_q = Quaternion::new(Complex64::new(0.0, self.div_alpha.values[n]), self.div_beta.values[n]);
        let mut bracket = self.lap_k_at(n) - div_q * k + k.scale(self.eta.values[n]);
        let mut out = Quaternion::ZERO;
        for a in 0..2 {
            bracket -= (q[a] * grad[a]).scale(2.0);
            out += (grad[a] - q[a] * k).mul_complex_right(gphi[a]).scale(2.0);
        }
        out + bracket.mul_complex_right(phi)
    }

    /// `φ∇²K − 2Q·(φ∇K) − (∇·Q − η)φK + 2[∇φ·∇K − (Q·∇φ)K]` at one node.
    fn right_at(&self, n: usize, phi: Complex64, gphi: [Complex64; 2]) -> Quaternion {
        let k = self.k_at(n);
        let grad = self.grad_k_at(n);
        let q = self.pot.q_at(n);
        let div_q = Quaternion::new(Complex64::new(0.0, self.div_alpha.values[n]), self.div_beta.values[n]);
        let f = Quaternion::from_complex(phi);
        let mut out = f * self.lap_k_at(n) - div_q * f * k + (f * k).scale(self.eta.values[n]);
        for a in 0..2 {
            let g = Quaternion::from_complex(gphi[a]);
            out -= (q[a] * (f * grad[a])).scale(2.0);
            out += (g * grad[a] - q[a] * g * k).scale(2.0);
        }
        out
    }

    fn k_at(&self, n: usize) -> Quaternion {
        crate::quaternion::k_from_angles(self.ph.angles_at(n))
    }

    fn grad_k_at(&self, n: usize) -> [Quaternion; 2] {
        let eg = Complex64::from_polar(1.0, self.ph.gamma.values.values[n]);
        let eo = Complex64::from_polar(1.0, self.ph.omega.values.values[n]);
        [0, 1].map(|a| Quaternion::new(self.kd.p.comps[a][n] * eg, self.kd.q.comps[a][n] * eo))
    }

    fn lap_k_at(&self, n: usize) -> Quaternion {
        let eg = Complex64::from_polar(1.0, self.ph.gamma.values.values[n]);
        let eo = Complex64::from_polar(1.0, self.ph.omega.values.values[n]);
        Quaternion::new(self.kd.u.values[n] * eg, self.kd.v.values[n] * eo)
    }

    fn with_phi<T: FieldValue>(
        &self,
        phi: &ScalarField<Complex64>,
        f: impl Fn(usize, Complex64, [Complex64; 2]) -> T,
    ) -> Result<ScalarField<T>> {
        if !phi.grid.same_nodes(self.grid()) {
            return Err(Error::InvalidGrid("phi lives on a different grid".into()));
        }
        let gphi = fd_gradient(phi);
        let g = self.grid();
        Ok(ScalarField {
            grid: g.clone(),
            values: (0..g.len())
                .map(|n| {
                    if g.is_masked(n) {
                        T::default()
                    } else {
                        f(n, phi.values[n], gphi.at(n))
                    }
                })
                .collect(),
        })
    }

    pub fn master_field(&self, phi: &ScalarField<Complex64>) -> Result<ScalarField<Quaternion>> {
        self.with_phi(phi, |n, f, g| self.master_at(n, f, g))
    }

    pub fn master(&self, phi: &ScalarField<Complex64>) -> Result<ResidualReport> {
        Ok(ResidualReport::from_scalar("master", &self.master_field(phi)?))
    }

    /// The complex part and the conjugated `j` part of the master equation,
    /// each assembled from the split coefficients rather than from
    /// quaternion products.
    pub fn split_fields(
        &self,
        phi: &ScalarField<Complex64>,
    ) -> Result<(ScalarField<Complex64>, ScalarField<Complex64>)> {
        let complex = self.with_phi(phi, |n, f, g| {
            let (s, _, eg, eo) = self.trig(n);
            let k = self.coefficients(n);
            let be = self.pot.beta.at(n);
            let grad = [0, 1].map(|a| k.grad_complex[a] * eg + s * be[a] * eo);
            (k.a * eg + k.b * eo) * f + 2.0 * cdot(grad, g)
        })?;
        let jpart = self.with_phi(phi, |n, f, g| {
            let (_, c, eg, eo) = self.trig(n);
            let k = self.coefficients(n);
            let bb = self.pot.beta.at(n).map(|z| z.conj());
            let grad = [0, 1].map(|a| k.grad_j[a] * eo - c * bb[a] * eg);
            (k.c * eo - k.d * eg) * f + 2.0 * cdot(grad, g)
        })?;
        Ok((complex, jpart))
    }

    pub fn split(&self, phi: &ScalarField<Complex64>) -> Result<(ResidualReport, ResidualReport)> {
        let (c, j) = self.split_fields(phi)?;
        Ok((
            ResidualReport::from_scalar("complex_part", &c),
            ResidualReport::from_scalar("j_part", &j),
        ))
    }

    /// The four coefficient conditions tied together by `λ`: the `φ`
    /// coefficients of the complex and `j` equations, and their `∇φ`
    /// coefficients. The `j` conditions are multiplied through by `λ` so
    /// that `λ = 0` stays finite.
    pub fn coefficient_constraints(&self, lam: &LambdaField) -> Result<[ResidualReport; 4]> {
        if !lam.values.grid.same_nodes(self.grid()) {
            return Err(Error::InvalidGrid("lambda lives on a different grid".into()));
        }
        let fields = self.constraint_fields(lam, |n| {
            let (s, c, _, _) = self.trig(n);
            let k = self.coefficients(n);
            let be = self.pot.beta.at(n);
            let bb = be.map(|z| z.conj());
            (k, [0, 1].map(|a| c * bb[a]), [0, 1].map(|a| s * be[a]))
        });
        Ok(fields)
    }

    fn constraint_fields(
        &self,
        lam: &LambdaField,
        at: impl Fn(usize) -> (NodeCoefficients, [Complex64; 2], [Complex64; 2]),
    ) -> [ResidualReport; 4] {
        let g = self.grid();
        let mut phi_c = ScalarField::<Complex64>::zeros(g);
        let mut phi_j = ScalarField::<Complex64>::zeros(g);
        let mut grad_c = VectorField::<Complex64>::zeros(g);
        let mut grad_j = VectorField::<Complex64>::zeros(g);
        for n in g.active() {
            let l = lam.at(n);
            let (k, cbb, sbe) = at(n);
            phi_c.values[n] = k.a + l * k.d;
            phi_j.values[n] = l * k.c - k.b;
            for a in 0..2 {
                grad_c.comps[a][n] = k.grad_complex[a] + l * cbb[a];
                grad_j.comps[a][n] = l * k.grad_j[a] - sbe[a];
            }
        }
        [
            ResidualReport::from_scalar("phi_coefficient_complex", &phi_c),
            ResidualReport::from_scalar("phi_coefficient_j", &phi_j),
            ResidualReport::from_vector("gradient_coefficient_complex", &grad_c),
            ResidualReport::from_vector("gradient_coefficient_j", &grad_j),
        ]
    }

    /// `max |∇K − QK|`, zero exactly when `Q` is the connection of `K`.
    pub fn certifying_identity(&self) -> ResidualReport {
        let g = self.grid();
        let mut v = VectorField::<Quaternion>::zeros(g);
        for n in g.active() {
            let k = self.k_at(n);
            let grad = self.grad_k_at(n);
            let q = self.pot.q_at(n);
            for a in 0..2 {
                v.comps[a][n] = grad[a] - q[a] * k;
            }
        }
        ResidualReport::from_vector("certifying_identity", &v)
    }

    /// Right-form residual for `Φ = φK` as a quaternion field.
    pub fn right_form_field(&self, phi: &ScalarField<Complex64>) -> Result<ScalarField<Quaternion>> {
        self.with_phi(phi, |n, f, g| self.right_at(n, f, g))
    }

    /// Complex part and conjugated `j` part of the right-form residual,
    /// assembled from the split coefficients. Both involve `φ` and `φ̄`.
    pub fn right_form_split_fields(
        &self,
        phi: &ScalarField<Complex64>,
    ) -> Result<(ScalarField<Complex64>, ScalarField<Complex64>)> {
        let complex = self.with_phi(phi, |n, f, g| {
            let (s, _, eg, eo) = self.trig(n);
            let k = self.coefficients(n);
            let be = self.pot.beta.at(n);
            let gb = g.map(|z| z.conj());
            k.a * f * eg
                + k.b * f.conj() * eo
                + 2.0 * (cdot(k.grad_complex, g) * eg + s * cdot(be, gb) * eo)
        })?;
        let jpart = self.with_phi(phi, |n, f, g| {
            let (_, c, eg, eo) = self.trig(n);
            let k = self.coefficients(n);
            let bb = self.pot.beta.at(n).map(|z| z.conj());
            let gb = g.map(|z| z.conj());
            k.c * f.conj() * eo - k.d * f * eg
                + 2.0 * (cdot(k.grad_j, gb) * eo - c * cdot(bb, g) * eg)
        })?;
        Ok((complex, jpart))
    }

    pub fn right_form(&self, phi: &ScalarField<Complex64>) -> Result<(ResidualReport, ResidualReport)> {
        let (c, j) = self.right_form_split_fields(phi)?;
        Ok((
            ResidualReport::from_scalar("right_complex_part", &c),
            ResidualReport::from_scalar("right_j_part", &j),
        ))
    }

    /// The coefficient conditions read off the right form. The right-form
    /// residual is real-linear in `φ`; its coefficients of `φ`, `φ̄`, `∇φ`
    /// and `∇φ̄` are recovered by evaluating it on the probes `1`, `i` and
    /// unit gradients, then mapped onto the same four conditions as the
    /// left form.
    pub fn right_form_constraints(&self, lam: &LambdaField) -> Result<[ResidualReport; 4]> {
        if !lam.values.grid.same_nodes(self.grid()) {
            return Err(Error::InvalidGrid("lambda lives on a different grid".into()));
        }
        let i = Complex64::i();
        let zero = Complex64::default();
        let one = Complex64::new(1.0, 0.0);
        // f(1) = a + b, f(i) = i(a − b)
        let split = |f1: Complex64, fi: Complex64| ((f1 - i * fi) * 0.5, (f1 + i * fi) * 0.5);
        Ok(self.constraint_fields(lam, |n| {
            let (_, _, eg, eo) = self.trig(n);
            let eval = |f: Complex64, g: [Complex64; 2]| {
                let r = self.right_at(n, f, g);
                (r.z, r.zeta.conj())
            };
            let (c1, j1) = eval(one, [zero; 2]);
            let (ci, ji) = eval(i, [zero; 2]);
            let (a3_phi, a3_bar) = split(c1, ci);
            let (a4_phi, a4_bar) = split(j1, ji);
            let mut grad_complex = [zero; 2];
            let mut grad_j = [zero; 2];
            let mut cbb = [zero; 2];
            let mut sbe = [zero; 2];
            for a in 0..2 {
                let mut e = [zero; 2];
                e[a] = one;
                let (cg1, jg1) = eval(zero, e);
                e[a] = i;
                let (cgi, jgi) = eval(zero, e);
                let (c_grad, c_grad_bar) = split(cg1, cgi);
                let (j_grad, j_grad_bar) = split(jg1, jgi);
                grad_complex[a] = c_grad / (2.0 * eg);
                sbe[a] = c_grad_bar / (2.0 * eo);
                cbb[a] = -j_grad / (2.0 * eg);
                grad_j[a] = j_grad_bar / (2.0 * eo);
            }
            let k = NodeCoefficients {
                a: a3_phi / eg,
                b: a3_bar / eo,
                c: a4_bar / eo,
                d: -a4_phi / eg,
                grad_complex,
                grad_j,
            };
            (k, cbb, sbe)
        }))
    }
}

pub fn master_residual(
    ph: &PhaseTriple,
    pot: &PotentialPair,
    phi: &ScalarField<Complex64>,
    source: DerivativeSource,
) -> Result<ResidualReport> {
    ResidualContext::new(ph, pot, source)?.master(phi)
}

pub fn split_residuals(
    ph: &PhaseTriple,
    pot: &PotentialPair,
    phi: &ScalarField<Complex64>,
    source: DerivativeSource,
) -> Result<(ResidualReport, ResidualReport)> {
    ResidualContext::new(ph, pot, source)?.split(phi)
}

/// Coefficient conditions with `p, q, u, v` from the closed-form
/// derivatives.
pub fn coefficient_constraints(
    ph: &PhaseTriple,
    pot: &PotentialPair,
    lam: &LambdaField,
) -> Result<[ResidualReport; 4]> {
    ResidualContext::new(ph, pot, DerivativeSource::Analytic)?.coefficient_constraints(lam)
}

pub fn right_form_residual(
    ph: &PhaseTriple,
    pot: &PotentialPair,
    phi: &ScalarField<Complex64>,
    source: DerivativeSource,
) -> Result<(ResidualReport, ResidualReport)> {
    ResidualContext::new(ph, pot, source)?.right_form(phi)
}

/// Which form of the reduced equation [`reduced_residual`] evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ReducedForm {
    ConstantTheta,
    General,
}

impl ReducedForm {
    pub fn label(self) -> &'static str {
        match self {
            Self::ConstantTheta => "reduced_constant_theta",
            Self::General => "reduced_general",
        }
    }
}

/// The complex equation after eliminating `α`, `β` and the `j` equation.
/// With `∇Θ = 0` on every unmasked node it reduces to
///
/// ```text
/// (|λ|² cosΘ e^{iΓ} + λ sinΘ e^{−iΩ}) / (1 + |λ|²)
///     · [(i∇²G − |∇G|²) φ + 2i ∇G·∇φ],   G = Γ − Ω
/// ```
///
/// otherwise the general form with the `∇Θ`, `∇²Θ` and `∇|λ|` terms is used.
pub fn reduced_residual(
    ph: &PhaseTriple,
    lam: &LambdaField,
    phi: &ScalarField<Complex64>,
) -> Result<(ReducedForm, ResidualReport)> {
    let form = if ph.max_theta_gradient() == 0.0 {
        ReducedForm::ConstantTheta
    } else {
        ReducedForm::General
    };
    let field = reduced_residual_field(ph, lam, phi, form)?;
    Ok((form, ResidualReport::from_scalar(form.label(), &field)))
}

/// `(|λ|² cosΘ e^{iΓ} + λ sinΘ e^{−iΩ}) / (1 + |λ|²)`.
pub fn reduced_prefactor(ph: &PhaseTriple, lam: &LambdaField) -> ScalarField<Complex64> {
    let g = ph.grid();
    ScalarField {
        grid: g.clone(),
        values: (0..g.len())
            .map(|n| {
                let a = ph.angles_at(n);
                let (s, c) = a.theta.sin_cos();
                let l = lam.at(n);
                let m2 = l.norm_sqr();
                (m2 * c * Complex64::from_polar(1.0, a.gamma) + l * s * Complex64::from_polar(1.0, -a.omega))
                    / (1.0 + m2)
            })
            .collect(),
    }
}

pub fn reduced_residual_field(
    ph: &PhaseTriple,
    lam: &LambdaField,
    phi: &ScalarField<Complex64>,
    form: ReducedForm,
) -> Result<ScalarField<Complex64>> {
    let g = ph.grid();
    if !lam.values.grid.same_nodes(g) || !phi.grid.same_nodes(g) {
        return Err(Error::InvalidGrid("lambda or phi lives on a different grid".into()));
    }
    let i = Complex64::i();
    let gphi = fd_gradient(phi);
    let grad_mod = lam.grad_modulus();
    let prefactor = reduced_prefactor(ph, lam);
    let mut out = ScalarField::zeros(g);
    for n in g.active() {
        let gd = [0, 1].map(|a| ph.gamma.grad.comps[a][n] - ph.omega.grad.comps[a][n]);
        let lap_d = ph.gamma.lap.values[n] - ph.omega.lap.values[n];
        let gp = gphi.at(n);
        let f = phi.values[n];
        let bracket = (i * lap_d - (gd[0] * gd[0] + gd[1] * gd[1])) * f
            + 2.0 * i * (gd[0] * gp[0] + gd[1] * gp[1]);
        let mut r = prefactor.values[n] * bracket;
        if form == ReducedForm::General {
            let a = ph.angles_at(n);
            let (s, c) = a.theta.sin_cos();
            let eg = Complex64::from_polar(1.0, a.gamma);
            let eo = Complex64::from_polar(1.0, -a.omega);
            let l = lam.at(n);
            let m = l.norm();
            let w = 1.0 / (1.0 + m * m);
            let gm = grad_mod.at(n);
            let gt = ph.theta.grad.at(n);
            let lt = ph.theta.lap.values[n];
            let mut phi_coef = 2.0 * i * m * w * w * (c * eg - l * s * eo) * (gm[0] * gd[0] + gm[1] * gd[1])
                - (s * eg - l * c * eo) * lt;
            if gt != [0.0, 0.0] {
                for (what, value) in [("sin(theta)", s), ("cos(theta)", c)] {
                    if value.abs() < SINGULAR_TOLERANCE {
                        return Err(Error::SingularConfiguration { node: n, what, value });
                    }
                }
                let s2 = (2.0 * a.theta).sin();
                let gt2 = gt[0] * gt[0] + gt[1] * gt[1];
                phi_coef = phi_coef
                    - 2.0 * i * w * (m * m * s * eg - l * c * eo) * (gd[0] * gt[0] + gd[1] * gt[1])
                    - (c * eg + l * s * eo) * (1.0 + 4.0 / (s2 * s2) * m * m * w * w) * gt2;
                r -= 2.0 * w * (m * m * c * eg - l * s * eo) * (gt[0] * gp[0] + gt[1] * gp[1]) / (s * c);
            }
            r += phi_coef * f;
        }
        out.values[n] = r;
    }
    Ok(out)
}
