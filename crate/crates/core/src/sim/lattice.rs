use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::field::{FieldValue, GridSpec, ScalarField, VectorField};

/// How the evolution treats values beyond the grid edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    /// The grid wraps; the period is `n · h` on each axis.
    #[default]
    Periodic,
    /// The wave function vanishes one spacing beyond the outermost nodes.
    Dirichlet,
}

/// A grid together with its boundary rule. Masked nodes always act as
/// hard walls.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    pub grid: GridSpec,
    pub boundary: Boundary,
}

impl Lattice {
    pub fn new(grid: GridSpec, boundary: Boundary) -> Self {
        Self { grid, boundary }
    }

    /// `n × n` interior nodes of the box `[0, length]²` with walls on its
    /// edges, spacing `length / (n + 1)`.
    pub fn dirichlet_box(n: usize, length: f64) -> Result<Self> {
        let h = length / (n + 1) as f64;
        Ok(Self::new(GridSpec::new(n, n, h, h, [h, h])?, Boundary::Dirichlet))
    }

    /// `n × n` nodes covering one period `[0, length)²`.
    pub fn periodic_square(n: usize, length: f64) -> Result<Self> {
        let h = length / n as f64;
        Ok(Self::new(GridSpec::new(n, n, h, h, [0.0, 0.0])?, Boundary::Periodic))
    }

    /// Neighbor one step along `axis`, `None` when it is a wall.
    pub fn neighbor(&self, n: usize, axis: usize, step: isize) -> Option<usize> {
        if self.grid.is_masked(n) {
            return None;
        }
        let g = &self.grid;
        let (i, j) = g.coords(n);
        let (pos, count) = if axis == 0 { (i, g.nx()) } else { (j, g.ny()) };
        let mut target = pos as isize + step;
        if target < 0 || target >= count as isize {
            match self.boundary {
                Boundary::Dirichlet => return None,
                Boundary::Periodic => target = target.rem_euclid(count as isize),
            }
        }
        let m = if axis == 0 { g.index(target as usize, j) } else { g.index(i, target as usize) };
        (!g.is_masked(m)).then_some(m)
    }

    /// Central difference with walls read as zero.
    pub fn gradient<T: FieldValue>(&self, f: &[T]) -> VectorField<T> {
        let g = &self.grid;
        let comp = |axis: usize| -> Vec<T> {
            let h = g.spacing(axis);
            (0..g.len())
                .map(|n| {
                    if g.is_masked(n) {
                        return T::default();
                    }
                    let at = |s| self.neighbor(n, axis, s).map_or(T::default(), |m| f[m]);
                    (at(1) - at(-1)) * (0.5 / h)
                })
                .collect()
        };
        VectorField { grid: g.clone(), comps: [comp(0), comp(1)] }
    }

    pub fn divergence<T: FieldValue>(&self, v: &VectorField<T>) -> ScalarField<T> {
        let dx = self.gradient(&v.comps[0]);
        let dy = self.gradient(&v.comps[1]);
        ScalarField {
            grid: self.grid.clone(),
            values: dx.comps[0].iter().zip(&dy.comps[1]).map(|(&a, &b)| a + b).collect(),
        }
    }

    /// Cell area used for `∫ · dV`.
    pub fn cell_area(&self) -> f64 {
        self.grid.dx() * self.grid.dy()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn periodic_neighbors_wrap_and_dirichlet_neighbors_stop() {
        let p = Lattice::periodic_square(4, 1.0).unwrap();
        assert_eq!(p.neighbor(0, 0, -1), Some(3));
        assert_eq!(p.neighbor(12, 1, 1), Some(0));
        let d = Lattice::dirichlet_box(4, 1.0).unwrap();
        assert_eq!(d.neighbor(0, 0, -1), None);
        assert_eq!(d.grid.point(0), [0.2, 0.2]);
    }

    #[test]
    fn periodic_gradient_of_plane_wave_is_second_order() {
        let errs: Vec<f64> = [32, 64]
            .iter()
            .map(|&n| {
                let lat = Lattice::periodic_square(n, 2.0).unwrap();
                let k = std::f64::consts::PI;
                let f = ScalarField::sample(&lat.grid, |p| (k * p[0]).sin());
                let g = lat.gradient(&f.values);
                (0..lat.grid.len())
                    .map(|m| (g.comps[0][m] - k * (k * lat.grid.point(m)[0]).cos()).abs())
                    .fold(0.0, f64::max)
            })
            .collect();
        assert!((errs[0] / errs[1] - 4.0).abs() < 0.1, "{errs:?}");
    }

    #[test]
    fn dirichlet_gradient_sees_zero_walls() {
        let lat = Lattice::dirichlet_box(31, 1.0).unwrap();
        let pi = std::f64::consts::PI;
        let f = ScalarField::sample(&lat.grid, |p| (pi * p[0]).sin());
        let g = lat.gradient(&f.values);
        let err = (0..lat.grid.len())
            .map(|m| (g.comps[0][m] - pi * (pi * lat.grid.point(m)[0]).cos()).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-2);
    }
}
