use crate::error::{Error, Result};
use crate::quaternion::{Quaternion, PURE_TOLERANCE};

/// Piecewise-linear path.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    points: Vec<[f64; 2]>,
    closed: bool,
}

impl Polyline {
    pub fn new(points: Vec<[f64; 2]>, closed: bool) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Precondition(format!(
                "a polyline needs at least 2 points, got {}",
                points.len()
            )));
        }
        if points.iter().any(|p| !(p[0].is_finite() && p[1].is_finite())) {
            return Err(Error::Precondition("polyline points must be finite".into()));
        }
        if closed {
            let (a, b) = (points[0], points[points.len() - 1]);
            if (a[0] - b[0]).hypot(a[1] - b[1]) > 1e-12 {
                return Err(Error::Precondition(
                    "closed polyline must end where it starts".into(),
                ));
            }
        }
        Ok(Self { points, closed })
    }

    pub fn open(points: Vec<[f64; 2]>) -> Result<Self> {
        Self::new(points, false)
    }

    /// Regular polygon with `segments` edges inscribed in a circle,
    /// counter-clockwise from angle `start`.
    pub fn circle(center: [f64; 2], radius: f64, segments: usize, start: f64) -> Result<Self> {
        if segments < 3 {
            return Err(Error::Precondition("a circle needs at least 3 segments".into()));
        }
        let mut pts: Vec<[f64; 2]> = (0..segments)
            .map(|k| {
                let a = start + std::f64::consts::TAU * k as f64 / segments as f64;
                [center[0] + radius * a.cos(), center[1] + radius * a.sin()]
            })
            .collect();
        pts.push(pts[0]);
        Self::new(pts, true)
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn start(&self) -> [f64; 2] {
        self.points[0]
    }

    pub fn end(&self) -> [f64; 2] {
        self.points[self.points.len() - 1]
    }

    pub fn reversed(&self) -> Self {
        let mut pts = self.points.clone();
        pts.reverse();
        Self {
            points: pts,
            closed: self.closed,
        }
    }

    /// Concatenation; `other` must start where `self` ends.
    pub fn then(&self, other: &Self) -> Result<Self> {
        let (a, b) = (self.end(), other.start());
        if (a[0] - b[0]).hypot(a[1] - b[1]) > 1e-12 {
            return Err(Error::Precondition("paths do not join".into()));
        }
        let mut pts = self.points.clone();
        pts.extend_from_slice(&other.points[1..]);
        let s = pts[0];
        let e = pts[pts.len() - 1];
        let closed = (s[0] - e[0]).hypot(s[1] - e[1]) <= 1e-12;
        Self::new(pts, closed)
    }

    pub fn length(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| (w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1]))
            .sum()
    }

    /// Sub-segments `(midpoint, delta)` after splitting each segment into
    /// `refinement` equal parts.
    pub fn subsegments(&self, refinement: usize) -> impl Iterator<Item = ([f64; 2], [f64; 2])> + '_ {
        let r = refinement.max(1);
        self.points.windows(2).flat_map(move |w| {
            let d = [(w[1][0] - w[0][0]) / r as f64, (w[1][1] - w[0][1]) / r as f64];
            (0..r).map(move |k| {
                let t = k as f64 + 0.5;
                ([w[0][0] + t * d[0], w[0][1] + t * d[1]], d)
            })
        })
    }
}

/// Midpoint-rule line integral `Σ v(mid)·Δl` over the polyline segments,
/// each split into `refinement` parts.
pub fn line_integral(
    v: impl Fn([f64; 2]) -> Result<[f64; 2]>,
    path: &Polyline,
    refinement: usize,
) -> Result<f64> {
    let mut sum = 0.0;
    for (mid, d) in path.subsegments(refinement) {
        let f = v(mid)?;
        sum += f[0] * d[0] + f[1] * d[1];
    }
    Ok(sum)
}

/// Ordered product of `exp(Q(mid)·Δl)` along the path. The factor of the
/// first sub-segment acts first; later factors multiply on the left.
pub fn path_ordered_product(
    connection: impl Fn([f64; 2]) -> Result<[Quaternion; 2]>,
    path: &Polyline,
    refinement: usize,
) -> Result<Quaternion> {
    if refinement == 0 {
        return Err(Error::Precondition("refinement must be at least 1".into()));
    }
    let mut u = Quaternion::ONE;
    for (mid, d) in path.subsegments(refinement) {
        let q = connection(mid)?;
        for comp in q {
            if comp.re().abs() > PURE_TOLERANCE {
                return Err(Error::NonPureConnection {
                    x: mid[0],
                    y: mid[1],
                    real_part: comp.re(),
                });
            }
        }
        let step = q[0].scale(d[0]) + q[1].scale(d[1]);
        let pure = Quaternion::new(num_complex::Complex64::new(0.0, step.z.im), step.zeta);
        u = pure.exp_pure_unchecked() * u;
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    #[test]
    fn polyline_validation() {
        assert!(Polyline::open(vec![[0.0, 0.0]]).is_err());
        assert!(Polyline::new(vec![[0.0, 0.0], [1.0, 0.0]], true).is_err());
        assert!(Polyline::new(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 0.0]], true).is_ok());
        assert!(Polyline::open(vec![[0.0, f64::NAN], [1.0, 0.0]]).is_err());
    }

    #[test]
    fn constant_field_along_segment() {
        let p = Polyline::open(vec![[0.0, 0.0], [3.0, 0.0]]).unwrap();
        let v = line_integral(|_| Ok([1.0, 0.0]), &p, 1).unwrap();
        assert!((v - 3.0).abs() < 1e-15);
    }

    /// Solenoid potential with unit flux outside the core.
    fn vortex(p: [f64; 2]) -> Result<[f64; 2]> {
        let r2 = p[0] * p[0] + p[1] * p[1];
        Ok([-p[1] / (2.0 * PI * r2), p[0] / (2.0 * PI * r2)])
    }

    #[test]
    fn circulation_matches_enclosed_flux_with_second_order_error() {
        let errs: Vec<(f64, f64)> = [64, 128, 256]
            .iter()
            .map(|&n| {
                let c = Polyline::circle([0.0, 0.0], 1.3, n, 0.2).unwrap();
                (1.0 / n as f64, (line_integral(vortex, &c, 1).unwrap() - 1.0).abs())
            })
            .collect();
        assert!(errs[2].1 < 1e-4);
        let order = crate::field::convergence_order(&errs);
        assert!((order - 2.0).abs() < 0.1, "order {order}");
        let c = Polyline::circle([0.0, 0.0], 1.3, 64, 0.0).unwrap();
        let fwd = line_integral(vortex, &c, 3).unwrap();
        let back = line_integral(vortex, &c.reversed(), 3).unwrap();
        assert!((fwd + back).abs() < 1e-14);
    }

    #[test]
    fn abelian_product_is_exact_along_open_path() {
        // Q = i ∇Ω with Ω = 0.7x - 0.2y² : product = e^{i(Ω(end) - Ω(start))}
        let omega = |p: [f64; 2]| 0.7 * p[0] - 0.2 * p[1] * p[1];
        let conn = |p: [f64; 2]| {
            Ok([
                Quaternion::from_complex(Complex64::new(0.0, 0.7)),
                Quaternion::from_complex(Complex64::new(0.0, -0.4 * p[1])),
            ])
        };
        let path = Polyline::open(vec![[0.0, 0.0], [1.0, 0.5], [2.0, -1.0]]).unwrap();
        let u = path_ordered_product(conn, &path, 50).unwrap();
        let expected = Complex64::from_polar(1.0, omega([2.0, -1.0]) - omega([0.0, 0.0]));
        // midpoint rule is exact for the linear-in-y gradient along straight segments
        assert!((u.z - expected).norm() < 1e-12);
        assert!(u.zeta.norm() < 1e-15);
    }

    fn nonabelian(p: [f64; 2]) -> Result<[Quaternion; 2]> {
        Ok([
            Quaternion::new(Complex64::new(0.0, p[1]), Complex64::new(0.3, 0.1 * p[0])),
            Quaternion::new(Complex64::new(0.0, -0.5), Complex64::new(p[0].sin(), 0.2)),
        ])
    }

    #[test]
    fn product_with_reversal_is_identity_and_norm_is_one() {
        let path = Polyline::open(vec![[0.0, 0.0], [1.0, 0.5], [2.0, -1.0]]).unwrap();
        let there = path_ordered_product(nonabelian, &path, 37).unwrap();
        let back = path_ordered_product(nonabelian, &path.reversed(), 37).unwrap();
        assert!(((back * there) - Quaternion::ONE).norm() < 1e-10);
        for r in [1, 10, 1000] {
            let u = path_ordered_product(nonabelian, &path, r).unwrap();
            assert!((u.norm() - 1.0).abs() < 1e-12);
        }
        let whole = path.then(&path.reversed()).unwrap();
        assert!(whole.is_closed());
        let u = path_ordered_product(nonabelian, &whole, 37).unwrap();
        assert!((u - Quaternion::ONE).norm() < 1e-10);
    }

    #[test]
    fn refinement_doubling_shrinks_error() {
        let path = Polyline::open(vec![[0.0, 0.0], [1.0, 0.5], [2.0, -1.0]]).unwrap();
        let reference = path_ordered_product(nonabelian, &path, 4096).unwrap();
        let e1 = (path_ordered_product(nonabelian, &path, 8).unwrap() - reference).norm();
        let e2 = (path_ordered_product(nonabelian, &path, 16).unwrap() - reference).norm();
        assert!(e1 / e2 >= 3.0, "ratio {}", e1 / e2);
    }

    #[test]
    fn rejects_non_pure_connection() {
        let path = Polyline::open(vec![[0.0, 0.0], [1.0, 0.0]]).unwrap();
        let bad = |_| Ok([Quaternion::from_real(0.1), Quaternion::ZERO]);
        assert!(matches!(
            path_ordered_product(bad, &path, 4),
            Err(Error::NonPureConnection { .. })
        ));
    }
}
