use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{GridSpec, Polyline};

use super::solenoid::SolenoidConfig;

/// `Θ` must stay this far from `0` and `π/2`.
pub const THETA_MARGIN: f64 = 1e-6;

/// Where the angle reconstruction starts. The reference ray is the
/// positive `x` direction from the solenoid axis; the branch cut of the
/// reconstructed `Γ`, `Ω` is the opposite ray.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AngleReference {
    /// Distance of the reference point from the axis.
    pub radius: f64,
    #[serde(default)]
    pub gamma: f64,
    #[serde(default)]
    pub omega: f64,
}

/// Two-path interferometer. The source sits on the branch-cut ray at
/// distance `source_distance` left of the axis, the screen is the
/// vertical segment `screen_distance` to the right. Path 1 passes above
/// through `(0, waypoint_offset)`, path 2 below through its mirror image
/// (coordinates relative to the axis).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathGeometry {
    pub source_distance: f64,
    pub screen_distance: f64,
    pub screen_half_width: f64,
    pub screen_points: usize,
    pub waypoint_offset: f64,
    /// Minimum distance every path keeps from the solenoid surface.
    pub clearance: f64,
}

impl PathGeometry {
    /// A symmetric layout scaled to the solenoid radius.
    pub fn scaled(radius: f64) -> Self {
        Self {
            source_distance: 6.0 * radius,
            screen_distance: 6.0 * radius,
            screen_half_width: 3.0 * radius,
            screen_points: 61,
            waypoint_offset: 2.0 * radius,
            clearance: 0.25 * radius,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HolonomySettings {
    /// Subsegments per polyline segment on the first pass.
    #[serde(default = "default_initial")]
    pub initial_refinement: usize,
    /// Accepted change `|ΔK₁| + |ΔK₂|` between successive doublings.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_doublings")]
    pub max_doublings: usize,
}

fn default_initial() -> usize {
    16
}

fn default_tolerance() -> f64 {
    1e-7
}

fn default_doublings() -> usize {
    14
}

impl Default for HolonomySettings {
    fn default() -> Self {
        Self { initial_refinement: default_initial(), tolerance: default_tolerance(), max_doublings: default_doublings() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ABSetup {
    pub solenoid: SolenoidConfig,
    /// Constant `Θ ∈ (0, π/2)`.
    pub theta: f64,
    /// Drop `β` and keep only the abelian connection `α i`.
    #[serde(default)]
    pub complex_limit: bool,
    pub reference: AngleReference,
    pub geometry: PathGeometry,
    #[serde(default)]
    pub holonomy: HolonomySettings,
}

fn segment_distance(c: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let t = if len2 > 0.0 { (((c[0] - a[0]) * d[0] + (c[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0) } else { 0.0 };
    (a[0] + t * d[0] - c[0]).hypot(a[1] + t * d[1] - c[1])
}

impl ABSetup {
    /// Default geometry and reference for the given solenoid and `Θ`.
    pub fn new(solenoid: SolenoidConfig, theta: f64) -> Result<Self> {
        let r = solenoid.radius();
        let s = Self {
            solenoid,
            theta,
            complex_limit: false,
            reference: AngleReference { radius: 2.0 * r, gamma: 0.0, omega: 0.0 },
            geometry: PathGeometry::scaled(r),
            holonomy: HolonomySettings::default(),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn complex(mut self) -> Self {
        self.complex_limit = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.theta >= THETA_MARGIN && self.theta <= FRAC_PI_2 - THETA_MARGIN) {
            return Err(Error::DegenerateFamily { theta: self.theta });
        }
        let g = &self.geometry;
        let r = self.solenoid.radius();
        for (name, v) in [
            ("source_distance", g.source_distance),
            ("screen_distance", g.screen_distance),
            ("waypoint_offset", g.waypoint_offset),
            ("screen_half_width", g.screen_half_width),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Precondition(format!("{name} must be positive, got {v}")));
            }
        }
        if !(g.clearance >= 0.0) {
            return Err(Error::Precondition("clearance must be non-negative".into()));
        }
        if g.screen_points < 3 {
            return Err(Error::Precondition("the fringe fit needs at least 3 screen points".into()));
        }
        if !(self.reference.radius > r) {
            return Err(Error::Precondition(format!(
                "reference radius {} must lie outside the solenoid (R = {r})",
                self.reference.radius
            )));
        }
        let h = &self.holonomy;
        if h.initial_refinement == 0 || !(h.tolerance > 0.0) {
            return Err(Error::Precondition("holonomy refinement and tolerance must be positive".into()));
        }
        for y in self.screen_coordinates() {
            self.check_screen_point(y)?;
        }
        Ok(())
    }

    /// Checks that both paths to the screen point at `y` keep the
    /// configured clearance from the solenoid.
    pub fn check_screen_point(&self, y: f64) -> Result<()> {
        let r = self.solenoid.radius();
        let g = &self.geometry;
        for path in self.path_pair(y)? {
            let d = path
                .points()
                .windows(2)
                .map(|w| segment_distance(self.solenoid.center, w[0], w[1]))
                .fold(f64::INFINITY, f64::min);
            if d < r + g.clearance {
                return Err(Error::Precondition(format!(
                    "path to screen point y = {y} passes within {:.3e} of the solenoid surface (clearance {})",
                    d - r,
                    g.clearance
                )));
            }
        }
        Ok(())
    }

    /// Screen ordinates relative to the axis.
    pub fn screen_coordinates(&self) -> Vec<f64> {
        let g = &self.geometry;
        let n = g.screen_points;
        (0..n).map(|k| -g.screen_half_width + 2.0 * g.screen_half_width * k as f64 / (n - 1) as f64).collect()
    }

    pub fn source(&self) -> [f64; 2] {
        let c = self.solenoid.center;
        [c[0] - self.geometry.source_distance, c[1]]
    }

    pub fn screen_point(&self, y: f64) -> [f64; 2] {
        let c = self.solenoid.center;
        [c[0] + self.geometry.screen_distance, c[1] + y]
    }

    /// Upper and lower path from the source to the screen point at `y`.
    pub fn path_pair(&self, y: f64) -> Result<[Polyline; 2]> {
        let c = self.solenoid.center;
        let w = self.geometry.waypoint_offset;
        let (s, e) = (self.source(), self.screen_point(y));
        Ok([Polyline::open(vec![s, [c[0], c[1] + w], e])?, Polyline::open(vec![s, [c[0], c[1] - w], e])?])
    }

    /// Masks every node inside or on the solenoid.
    pub fn mask_grid(&self, grid: GridSpec) -> GridSpec {
        let cfg = self.solenoid.clone();
        grid.extend_mask(move |p| cfg.is_inside(p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> ABSetup {
        ABSetup::new(SolenoidConfig::with_flux(0.5, 1.0).unwrap(), 0.6).unwrap()
    }

    #[test]
    fn default_layout_is_valid_and_symmetric() {
        let s = setup();
        let [a, b] = s.path_pair(0.0).unwrap();
        assert_eq!(a.points()[1][1], -b.points()[1][1]);
        assert!((a.length() - b.length()).abs() < 1e-14);
        assert_eq!(s.screen_coordinates().len(), 61);
    }

    #[test]
    fn theta_near_edges_rejected() {
        let sol = SolenoidConfig::with_flux(0.5, 1.0).unwrap();
        assert!(matches!(ABSetup::new(sol.clone(), 0.0), Err(Error::DegenerateFamily { .. })));
        assert!(ABSetup::new(sol, FRAC_PI_2).is_err());
    }

    #[test]
    fn paths_through_the_solenoid_rejected() {
        let mut s = setup();
        s.geometry.waypoint_offset = 0.4;
        assert!(matches!(s.validate(), Err(Error::Precondition(_))));
    }
}
