use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{path_ordered_product, Polyline};
use crate::quaternion::Quaternion;

use super::fields::AngleReconstruction;
use super::setup::ABSetup;
use super::solenoid::solenoid_alpha;

/// `Q_k = α_k i + β_k j` at a point outside the solenoid.
pub fn connection_at(rec: &AngleReconstruction<'_>, setup: &ABSetup, p: [f64; 2]) -> Result<[Quaternion; 2]> {
    let a = solenoid_alpha(&setup.solenoid, p)?;
    let b = rec.beta(p)?;
    Ok([0, 1].map(|k| Quaternion::new(Complex64::new(0.0, a[k]), b[k])))
}

/// Holonomies along two paths, refined together until a doubling changes
/// them by less than the configured tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HolonomyPair {
    pub k1: Quaternion,
    pub k2: Quaternion,
    /// Subsegments per polyline segment of the accepted result.
    pub refinement: usize,
    /// `|ΔK₁| + |ΔK₂|` of the last doubling.
    pub change: f64,
    /// Witness change over the last doubling.
    pub witness_change: f64,
}

impl HolonomyPair {
    /// `|K₁K₂ − K₂K₁|`.
    pub fn witness(&self) -> f64 {
        noncommutativity_witness(self.k1, self.k2)
    }

    /// `K₁* K₂`, whose complex part sets the fringe offset.
    pub fn relative(&self) -> Quaternion {
        self.k1.conj() * self.k2
    }
}

pub fn noncommutativity_witness(k1: Quaternion, k2: Quaternion) -> f64 {
    Quaternion::commutator_norm(k1, k2)
}

/// Adaptive pair holonomy for arbitrary paths.
pub fn holonomy_of_paths(setup: &ABSetup, paths: [&Polyline; 2]) -> Result<HolonomyPair> {
    let rec = AngleReconstruction::new(setup)?;
    let conn = |p: [f64; 2]| connection_at(&rec, setup, p);
    let cfg = &setup.holonomy;
    let mut r = cfg.initial_refinement;
    let mut k = [path_ordered_product(conn, paths[0], r)?, path_ordered_product(conn, paths[1], r)?];
    let mut change = f64::INFINITY;
    for _ in 0..cfg.max_doublings {
        r *= 2;
        let next = [path_ordered_product(conn, paths[0], r)?, path_ordered_product(conn, paths[1], r)?];
        change = (next[0] - k[0]).norm() + (next[1] - k[1]).norm();
        let witness_change =
            (noncommutativity_witness(next[0], next[1]) - noncommutativity_witness(k[0], k[1])).abs();
        k = next;
        if change < cfg.tolerance {
            return Ok(HolonomyPair { k1: k[0], k2: k[1], refinement: r, change, witness_change });
        }
    }
    Err(Error::NotConverged { change, refinement: r })
}

/// Holonomies of the upper and lower path to the screen point at `y`.
pub fn holonomy_pair(setup: &ABSetup, y: f64) -> Result<HolonomyPair> {
    let [a, b] = setup.path_pair(y)?;
    holonomy_of_paths(setup, [&a, &b])
}

/// Holonomy once around a circle centered on the axis, starting and ending
/// on the branch-cut ray. Outside the complex limit `β` jumps across the
/// cut; starting there keeps the jump at the loop's end points, so no
/// midpoint straddles it and the product still converges at second order.
/// The value still depends on the cut convention.
pub fn loop_holonomy(setup: &ABSetup, radius: f64, segments: usize) -> Result<HolonomyPair> {
    let circle = Polyline::circle(setup.solenoid.center, radius, segments, std::f64::consts::PI)?;
    // a trivial second path keeps the pair machinery
    let stub = Polyline::open(vec![circle.start(), circle.start()])?;
    holonomy_of_paths(setup, [&circle, &stub])
}
