//! Finite matrix models of the quaternionic eigenproblem
//! `(H + L j)(φ + χ j) = ε (φ + χ j)` with complex `H`, `L`.
//!
//! Expanding with `j c = c̄ j` gives the complex pair
//!
//! ```text
//! (H − ε) φ = L χ̄
//! (H − ε) χ = −L φ̄
//! ```
//!
//! which in the variables `(φ, χ̄)` is the ordinary eigenproblem of
//! `[[H, −L], [L̄, H̄]]`. That matrix is hermitian when `H` is and `L` is
//! antisymmetric.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quaternion::Quaternion;

type CMat = DMatrix<Complex64>;
/// Complex column vector.
pub type CVec = DVector<Complex64>;

const STRUCTURE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixModel {
    pub h: CMat,
    pub l: CMat,
}

/// One eigenpair `ε, φ + χ j`, normalized so `‖φ‖² + ‖χ‖² = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuaternionEigenpair {
    pub epsilon: f64,
    pub phi: CVec,
    pub chi: CVec,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SplitResidual {
    /// `‖(H + Lj − ε)(φ + χj)‖` evaluated with quaternion arithmetic.
    pub quaternion: f64,
    /// `‖(H − ε)φ − Lχ̄‖`.
    pub complex_part: f64,
    /// `‖(H − ε)χ + Lφ̄‖`.
    pub j_part: f64,
    /// `|quaternion² − complex_part² − j_part²|`; zero up to rounding.
    pub identity_gap: f64,
}

fn frob(m: &CMat) -> f64 {
    m.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

fn vnorm(v: &CVec) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

fn conj_v(v: &CVec) -> CVec {
    v.map(|c| c.conj())
}

fn conj_m(m: &CMat) -> CMat {
    m.map(|c| c.conj())
}

impl MatrixModel {
    pub fn new(h: CMat, l: CMat) -> Result<Self> {
        let n = h.nrows();
        if n == 0 || h.ncols() != n || l.shape() != (n, n) {
            return Err(Error::Precondition(format!(
                "H and L must be square and of equal size, got {:?} and {:?}",
                h.shape(),
                l.shape()
            )));
        }
        let skew = frob(&(&h - h.adjoint()));
        if skew > STRUCTURE_TOLERANCE * frob(&h).max(1.0) {
            return Err(Error::Precondition(format!("H is not hermitian: ‖H − H†‖ = {skew:e}")));
        }
        Ok(Self { h, l })
    }

    pub fn dim(&self) -> usize {
        self.h.nrows()
    }

    /// `(H + Lj) v` computed entry by entry in quaternion arithmetic.
    pub fn quaternion_apply(&self, v: &[Quaternion]) -> Vec<Quaternion> {
        let n = self.dim();
        (0..n)
            .map(|r| {
                (0..n).fold(Quaternion::ZERO, |acc, c| acc + Quaternion::new(self.h[(r, c)], self.l[(r, c)]) * v[c])
            })
            .collect()
    }

    /// `[[H, −L], [L̄, H̄]]` acting on `(φ, χ̄)`.
    pub fn doubled(&self) -> CMat {
        let n = self.dim();
        let mut d = CMat::zeros(2 * n, 2 * n);
        d.view_mut((0, 0), (n, n)).copy_from(&self.h);
        d.view_mut((0, n), (n, n)).copy_from(&(-&self.l));
        d.view_mut((n, 0), (n, n)).copy_from(&conj_m(&self.l));
        d.view_mut((n, n), (n, n)).copy_from(&conj_m(&self.h));
        d
    }

    /// `‖L + Lᵀ‖`, zero when the doubled matrix is hermitian.
    pub fn antisymmetry_defect(&self) -> f64 {
        frob(&(&self.l + self.l.transpose()))
    }

    /// All eigenpairs from the doubled matrix. Each `ε` appears twice.
    pub fn eigenpairs(&self) -> Result<Vec<QuaternionEigenpair>> {
        let defect = self.antisymmetry_defect();
        if defect > STRUCTURE_TOLERANCE * frob(&self.l).max(1.0) {
            return Err(Error::Precondition(format!(
                "L is not antisymmetric (‖L + Lᵀ‖ = {defect:e}); the doubled matrix is not hermitian and ε need not be real"
            )));
        }
        let n = self.dim();
        // nalgebra before 0.34 returned wrong eigenvectors for clustered
        // spectra, which every doubled matrix has
        let eig = self.doubled().symmetric_eigen();
        let mut out: Vec<QuaternionEigenpair> = (0..2 * n)
            .map(|k| {
                let v = eig.eigenvectors.column(k);
                let phi = v.rows(0, n).into_owned();
                let chi = conj_v(&v.rows(n, n).into_owned());
                let s = (vnorm(&phi).powi(2) + vnorm(&chi).powi(2)).sqrt();
                QuaternionEigenpair { epsilon: eig.eigenvalues[k], phi: phi / Complex64::from(s), chi: chi / Complex64::from(s) }
            })
            .collect();
        out.sort_by(|a, b| a.epsilon.total_cmp(&b.epsilon));
        Ok(out)
    }

    pub fn commutator(&self) -> CMat {
        &self.h * &self.l - &self.l * &self.h
    }
}

pub fn eigen_split_residual(model: &MatrixModel, pair: &QuaternionEigenpair) -> SplitResidual {
    let n = model.dim();
    let eps = Complex64::from(pair.epsilon);
    let shifted = &model.h - CMat::identity(n, n) * eps;
    let c1 = &shifted * &pair.phi - &model.l * conj_v(&pair.chi);
    let c2 = &shifted * &pair.chi + &model.l * conj_v(&pair.phi);
    let v: Vec<Quaternion> = (0..n).map(|k| Quaternion::new(pair.phi[k], pair.chi[k])).collect();
    let q = model
        .quaternion_apply(&v)
        .iter()
        .zip(&v)
        .map(|(a, b)| (*a - b.scale(pair.epsilon)).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let (a, b) = (vnorm(&c1), vnorm(&c2));
    SplitResidual { quaternion: q, complex_part: a, j_part: b, identity_gap: (q * q - a * a - b * b).abs() }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecoupleReport {
    pub epsilon: f64,
    /// The derivation needs a real `H`; with complex `H` the residuals are
    /// reported but carry no guarantee.
    pub h_is_real: bool,
    pub commutator_norm: f64,
    /// `‖[(H − ε)² + L L̄] φ − θ χ̄‖` with `θ = [H, L]` (zero here).
    pub phi_residual: f64,
    /// `‖[(H − ε)² + L L̄] χ + θ φ̄‖`.
    pub chi_residual: f64,
    /// The same operator with `(H − ε)` in place of `(H − ε)²`, for contrast.
    pub unsquared_phi_residual: f64,
}

fn h_is_real(model: &MatrixModel) -> bool {
    model.h.iter().all(|c| c.im.abs() <= STRUCTURE_TOLERANCE)
}

fn require_real_h(model: &MatrixModel) -> Result<()> {
    let imag = model.h.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
    if imag > STRUCTURE_TOLERANCE {
        return Err(Error::Precondition(format!("decoupling needs a real H, max |Im H| = {imag:e}")));
    }
    Ok(())
}

fn decoupled_residuals(model: &MatrixModel, pair: &QuaternionEigenpair, theta: &CMat) -> (f64, f64, f64) {
    let n = model.dim();
    let shifted = &model.h - CMat::identity(n, n) * Complex64::from(pair.epsilon);
    let llbar = &model.l * conj_m(&model.l);
    let op = &shifted * &shifted + &llbar;
    let r_phi = &op * &pair.phi - theta * conj_v(&pair.chi);
    let r_chi = &op * &pair.chi + theta * conj_v(&pair.phi);
    let r_flat = (&shifted + &llbar) * &pair.phi;
    (vnorm(&r_phi), vnorm(&r_chi), vnorm(&r_flat))
}

/// Fourth-order equations for commuting `H`, `L`. They follow from the
/// split pair only when `H` is real; see [`DecoupleReport::h_is_real`].
pub fn decouple_commuting(model: &MatrixModel, pair: &QuaternionEigenpair) -> Result<DecoupleReport> {
    let theta = model.commutator();
    let c = frob(&theta);
    if c > STRUCTURE_TOLERANCE * frob(&model.h).max(1.0) * frob(&model.l).max(1.0) {
        return Err(Error::Precondition(format!("H and L do not commute: ‖[H, L]‖ = {c:e}")));
    }
    let (phi_residual, chi_residual, unsquared_phi_residual) = decoupled_residuals(model, pair, &theta);
    Ok(DecoupleReport {
        epsilon: pair.epsilon,
        h_is_real: h_is_real(model),
        commutator_norm: c,
        phi_residual,
        chi_residual,
        unsquared_phi_residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NonCommutingReport {
    /// `tr θ / n`, the only scalar `θ` could equal.
    pub scalar: f64,
    /// `|tr θ|`; zero for any finite matrices since `tr(HL) = tr(LH)`.
    pub trace: f64,
    /// `‖θ − (tr θ / n) I‖`.
    pub deviation: f64,
    pub phi_residual: f64,
    pub chi_residual: f64,
}

/// The non-commuting variant assumes `[H, L] = θ I` for a scalar `θ`.
/// Finite matrices have `tr [H, L] = 0`, so the only admissible scalar is
/// zero; any nonzero commutator fails the precondition.
pub fn decouple_noncommuting(model: &MatrixModel, pair: &QuaternionEigenpair) -> Result<NonCommutingReport> {
    require_real_h(model)?;
    let n = model.dim();
    let theta = model.commutator();
    let tr = theta.trace();
    let scalar = tr / Complex64::from(n as f64);
    let deviation = frob(&(&theta - CMat::identity(n, n) * scalar));
    if deviation > STRUCTURE_TOLERANCE * frob(&model.h).max(1.0) * frob(&model.l).max(1.0) {
        return Err(Error::Precondition(format!(
            "[H, L] is not a multiple of the identity: ‖θ − (tr θ/n) I‖ = {deviation:e}, tr θ = {:e}",
            tr.norm()
        )));
    }
    let scalar_theta = CMat::identity(n, n) * scalar;
    let (phi_residual, chi_residual, _) = decoupled_residuals(model, pair, &scalar_theta);
    Ok(NonCommutingReport { scalar: scalar.re, trace: tr.norm(), deviation, phi_residual, chi_residual })
}

fn random_orthogonal(n: usize, rng: &mut ChaCha8Rng) -> CMat {
    let m = DMatrix::<f64>::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    m.qr().q().map(Complex64::from)
}

fn random_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

/// Random hermitian `H` and complex antisymmetric `L`.
pub fn random_model(dim: usize, seed: u64) -> Result<MatrixModel> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = CMat::from_fn(dim, dim, |_, _| random_complex(&mut rng));
    let b = CMat::from_fn(dim, dim, |_, _| random_complex(&mut rng));
    let h = (&a + a.adjoint()) * Complex64::from(0.5);
    let l = (&b - b.transpose()) * Complex64::from(0.5);
    MatrixModel::new(h, l)
}

/// Real symmetric `H = O diag(h_k I₂) Oᵀ` and antisymmetric
/// `L = O diag(l_k J) Oᵀ` with `J = [[0, 1], [−1, 0]]`; the two commute.
pub fn random_commuting_model(dim: usize, seed: u64) -> Result<MatrixModel> {
    if dim == 0 || !dim.is_multiple_of(2) {
        return Err(Error::Precondition(format!("commuting model needs an even dimension, got {dim}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let o = random_orthogonal(dim, &mut rng);
    let mut hd = CMat::zeros(dim, dim);
    let mut ld = CMat::zeros(dim, dim);
    for k in 0..dim / 2 {
        let hk = Complex64::from(rng.random_range(-2.0..2.0));
        let lk = random_complex(&mut rng);
        hd[(2 * k, 2 * k)] = hk;
        hd[(2 * k + 1, 2 * k + 1)] = hk;
        ld[(2 * k, 2 * k + 1)] = lk;
        ld[(2 * k + 1, 2 * k)] = -lk;
    }
    let ot = o.transpose();
    MatrixModel::new(&o * hd * &ot, &o * ld * &ot)
}
