//! Quaternions in symplectic form `q = z + ζ j`, with `z, ζ` complex.
//!
//! The multiplication rule follows from `ij = -ji` and `c j = j c̄` for any
//! complex `c`:
//!
//! ```text
//! (a_z + a_ζ j)(b_z + b_ζ j) = (a_z b_z - a_ζ conj(b_ζ)) + (a_z b_ζ + a_ζ conj(b_z)) j
//! ```
//!
//! The real 4-vector view `a + b i + c j + d k` (with `k = ij`) maps to
//! `z = a + b i`, `ζ = c + d i`.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Tolerance on the real part when a pure quaternion is required.
pub const PURE_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, PartialEq, Default)]
pub struct Quaternion {
    pub z: Complex64,
    pub zeta: Complex64,
}

/// Serialized as the real tuple `[re, i, j, k]`.
impl Serialize for Quaternion {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_real4().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Quaternion {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Ok(Self::from_real4(<[f64; 4]>::deserialize(d)?))
    }
}

impl fmt::Debug for Quaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({} + {}i) + ({} + {}i)j",
            self.z.re, self.z.im, self.zeta.re, self.zeta.im
        )
    }
}

impl Quaternion {
    pub const ZERO: Self = Self::new(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    pub const ONE: Self = Self::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
    pub const I: Self = Self::new(Complex64::new(0.0, 1.0), Complex64::new(0.0, 0.0));
    pub const J: Self = Self::new(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
    pub const K: Self = Self::new(Complex64::new(0.0, 0.0), Complex64::new(0.0, 1.0));

    pub const fn new(z: Complex64, zeta: Complex64) -> Self {
        Self { z, zeta }
    }

    /// Embeds a complex number as `c + 0 j`.
    pub const fn from_complex(c: Complex64) -> Self {
        Self::new(c, Complex64::new(0.0, 0.0))
    }

    pub const fn from_real(r: f64) -> Self {
        Self::from_complex(Complex64::new(r, 0.0))
    }

    /// Builds `a + b i + c j + d k`.
    pub const fn from_real4(v: [f64; 4]) -> Self {
        Self::new(Complex64::new(v[0], v[1]), Complex64::new(v[2], v[3]))
    }

    pub fn to_real4(self) -> [f64; 4] {
        [self.z.re, self.z.im, self.zeta.re, self.zeta.im]
    }

    /// Scalar (real) part.
    pub fn re(self) -> f64 {
        self.z.re
    }

    pub fn norm_sqr(self) -> f64 {
        self.z.norm_sqr() + self.zeta.norm_sqr()
    }

    pub fn norm(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `q* = conj(z) - ζ j`.
    pub fn conj(self) -> Self {
        Self::new(self.z.conj(), -self.zeta)
    }

    /// Right multiplication by the complex unit, `q|i = q i = (i z, -i ζ)`.
    pub fn right_mul_i(self) -> Self {
        let i = Complex64::i();
        Self::new(i * self.z, -i * self.zeta)
    }

    /// `q c` for complex `c`: `(z c, ζ conj(c))`.
    pub fn mul_complex_right(self, c: Complex64) -> Self {
        Self::new(self.z * c, self.zeta * c.conj())
    }

    /// `c q` for complex `c`: `(c z, c ζ)`.
    pub fn complex_mul_left(self, c: Complex64) -> Self {
        Self::new(c * self.z, c * self.zeta)
    }

    pub fn scale(self, s: f64) -> Self {
        Self::new(self.z * s, self.zeta * s)
    }

    pub fn is_finite(self) -> bool {
        self.z.is_finite() && self.zeta.is_finite()
    }

    pub fn inverse(self) -> Result<Self> {
        let n2 = self.norm_sqr();
        if n2 == 0.0 || !n2.is_finite() {
            return Err(Error::Domain(format!(
                "cannot invert quaternion with squared norm {n2}"
            )));
        }
        Ok(self.conj().scale(1.0 / n2))
    }

    /// Exponential of a pure quaternion: `cos|u| + (u/|u|) sin|u|`.
    pub fn exp(self) -> Result<Self> {
        if self.z.re.abs() > PURE_TOLERANCE {
            return Err(Error::Domain(format!(
                "exp requires a pure quaternion, real part is {:e}",
                self.z.re
            )));
        }
        let u = Self::new(Complex64::new(0.0, self.z.im), self.zeta);
        Ok(u.exp_pure_unchecked())
    }

    pub(crate) fn exp_pure_unchecked(self) -> Self {
        let angle = self.norm();
        if angle < 1e-8 {
            // cos x ~ 1 - x²/2, sin x / x ~ 1 - x²/6
            let c = 1.0 - 0.5 * angle * angle;
            let s = 1.0 - angle * angle / 6.0;
            return Self::from_real(c) + self.scale(s);
        }
        Self::from_real(angle.cos()) + self.scale(angle.sin() / angle)
    }

    /// Commutator norm `|ab - ba|`.
    pub fn commutator_norm(a: Self, b: Self) -> f64 {
        (a * b - b * a).norm()
    }
}

impl Add for Quaternion {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.z + rhs.z, self.zeta + rhs.zeta)
    }
}

impl AddAssign for Quaternion {
    fn add_assign(&mut self, rhs: Self) {
        self.z += rhs.z;
        self.zeta += rhs.zeta;
    }
}

impl Sub for Quaternion {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.z - rhs.z, self.zeta - rhs.zeta)
    }
}

impl SubAssign for Quaternion {
    fn sub_assign(&mut self, rhs: Self) {
        self.z -= rhs.z;
        self.zeta -= rhs.zeta;
    }
}

impl Neg for Quaternion {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.z, -self.zeta)
    }
}

impl Mul for Quaternion {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self::new(
            self.z * rhs.z - self.zeta * rhs.zeta.conj(),
            self.z * rhs.zeta + self.zeta * rhs.z.conj(),
        )
    }
}

impl Mul<f64> for Quaternion {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        self.scale(rhs)
    }
}

impl From<Complex64> for Quaternion {
    fn from(c: Complex64) -> Self {
        Self::from_complex(c)
    }
}

/// The three real angles of the unit phase quaternion
/// `K = cos Θ e^{iΓ} + sin Θ e^{iΩ} j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitPhaseAngles {
    pub theta: f64,
    pub gamma: f64,
    pub omega: f64,
}

impl UnitPhaseAngles {
    pub fn new(theta: f64, gamma: f64, omega: f64) -> Self {
        Self {
            theta,
            gamma,
            omega,
        }
    }

    pub fn to_quaternion(self) -> Quaternion {
        k_from_angles(self)
    }

    /// Inverse of [`k_from_angles`] for a unit quaternion. Angles are
    /// returned with `Θ ∈ [0, π/2]`; `Γ` (resp. `Ω`) is 0 when its
    /// component vanishes.
    pub fn from_unit(q: Quaternion) -> Result<Self> {
        let n = q.norm();
        if (n - 1.0).abs() > 1e-12 {
            return Err(Error::NonUnit { norm: n });
        }
        let theta = q.zeta.norm().atan2(q.z.norm());
        let gamma = if q.z.norm() > 0.0 { q.z.arg() } else { 0.0 };
        let omega = if q.zeta.norm() > 0.0 { q.zeta.arg() } else { 0.0 };
        Ok(Self::new(theta, gamma, omega))
    }
}

/// `K(Θ, Γ, Ω) = (cos Θ e^{iΓ}, sin Θ e^{iΩ})`.
pub fn k_from_angles(a: UnitPhaseAngles) -> Quaternion {
    let (s, c) = a.theta.sin_cos();
    Quaternion::new(
        Complex64::from_polar(c, a.gamma),
        Complex64::from_polar(s, a.omega),
    )
}
