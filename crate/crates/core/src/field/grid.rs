use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quaternion::Quaternion;

/// Uniform 2D node grid. Node `(i, j)` sits at `origin + (i dx, j dy)` and
/// has flat index `j * nx + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    nx: usize,
    ny: usize,
    dx: f64,
    dy: f64,
    origin: [f64; 2],
    mask: Option<Arc<[bool]>>,
}

impl GridSpec {
    pub fn new(nx: usize, ny: usize, dx: f64, dy: f64, origin: [f64; 2]) -> Result<Self> {
        if nx < 3 || ny < 3 {
            return Err(Error::InvalidGrid(format!(
                "node counts must be at least 3, got {nx} x {ny}"
            )));
        }
        if !(dx > 0.0 && dy > 0.0 && dx.is_finite() && dy.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "spacings must be positive and finite, got dx = {dx}, dy = {dy}"
            )));
        }
        if !(origin[0].is_finite() && origin[1].is_finite()) {
            return Err(Error::InvalidGrid("origin must be finite".into()));
        }
        Ok(Self {
            nx,
            ny,
            dx,
            dy,
            origin,
            mask: None,
        })
    }

    /// Grid covering `[x0, x1] x [y0, y1]` with nodes on both edges.
    pub fn spanning(nx: usize, ny: usize, x: [f64; 2], y: [f64; 2]) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::InvalidGrid(format!(
                "node counts must be at least 3, got {nx} x {ny}"
            )));
        }
        let dx = (x[1] - x[0]) / (nx - 1) as f64;
        let dy = (y[1] - y[0]) / (ny - 1) as f64;
        Self::new(nx, ny, dx, dy, [x[0], y[0]])
    }

    /// Marks every node for which `excluded` returns true.
    pub fn with_mask(mut self, excluded: impl Fn([f64; 2]) -> bool) -> Self {
        let mask: Vec<bool> = (0..self.len()).map(|n| excluded(self.point(n))).collect();
        self.mask = if mask.iter().any(|&m| m) {
            Some(mask.into())
        } else {
            None
        };
        self
    }

    /// Adds more excluded nodes to an existing mask.
    pub fn extend_mask(self, excluded: impl Fn([f64; 2]) -> bool) -> Self {
        let previous = self.mask.clone();
        self.with_mask(excluded).merge_mask(previous)
    }

    fn merge_mask(mut self, other: Option<Arc<[bool]>>) -> Self {
        self.mask = match (self.mask.take(), other) {
            (None, None) => None,
            (Some(m), None) | (None, Some(m)) => Some(m),
            (Some(a), Some(b)) => Some(a.iter().zip(b.iter()).map(|(x, y)| *x || *y).collect()),
        };
        self
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn dy(&self) -> f64 {
        self.dy
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        if axis == 0 {
            self.dx
        } else {
            self.dy
        }
    }

    pub fn origin(&self) -> [f64; 2] {
        self.origin
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn coords(&self, n: usize) -> (usize, usize) {
        (n % self.nx, n / self.nx)
    }

    pub fn point(&self, n: usize) -> [f64; 2] {
        let (i, j) = self.coords(n);
        [
            self.origin[0] + i as f64 * self.dx,
            self.origin[1] + j as f64 * self.dy,
        ]
    }

    pub fn is_masked(&self, n: usize) -> bool {
        self.mask.as_ref().is_some_and(|m| m[n])
    }

    pub fn has_mask(&self) -> bool {
        self.mask.is_some()
    }

    /// Indices of nodes that are not masked.
    pub fn active(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&n| !self.is_masked(n))
    }

    /// Neighbor of `n` offset by `step` along `axis`, if it exists and is
    /// not masked.
    pub fn neighbor(&self, n: usize, axis: usize, step: isize) -> Option<usize> {
        let (i, j) = self.coords(n);
        let (pos, count) = if axis == 0 { (i, self.nx) } else { (j, self.ny) };
        let target = pos as isize + step;
        if target < 0 || target >= count as isize {
            return None;
        }
        let m = if axis == 0 {
            self.index(target as usize, j)
        } else {
            self.index(i, target as usize)
        };
        (!self.is_masked(m)).then_some(m)
    }

    /// Geometric equality ignoring the mask.
    pub fn same_nodes(&self, other: &Self) -> bool {
        self.nx == other.nx
            && self.ny == other.ny
            && self.dx == other.dx
            && self.dy == other.dy
            && self.origin == other.origin
    }

    /// Whether `p` lies inside the grid rectangle.
    pub fn contains(&self, p: [f64; 2]) -> bool {
        let x1 = self.origin[0] + (self.nx - 1) as f64 * self.dx;
        let y1 = self.origin[1] + (self.ny - 1) as f64 * self.dy;
        let eps = 1e-12 * (1.0 + x1.abs().max(y1.abs()));
        p[0] >= self.origin[0] - eps && p[0] <= x1 + eps && p[1] >= self.origin[1] - eps && p[1] <= y1 + eps
    }
}

/// Values a field can hold at a node.
pub trait FieldValue:
    Copy + Default + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + Send + Sync
{
    /// Column suffixes used for CSV export.
    const COMPONENTS: &'static [&'static str];

    fn push_components(&self, out: &mut Vec<f64>);

    /// Magnitude used by residual norms.
    fn magnitude(&self) -> f64;
}

impl FieldValue for f64 {
    const COMPONENTS: &'static [&'static str] = &[""];

    fn push_components(&self, out: &mut Vec<f64>) {
        out.push(*self);
    }

    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl FieldValue for Complex64 {
    const COMPONENTS: &'static [&'static str] = &["_re", "_im"];

    fn push_components(&self, out: &mut Vec<f64>) {
        out.push(self.re);
        out.push(self.im);
    }

    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

impl FieldValue for Quaternion {
    const COMPONENTS: &'static [&'static str] = &["_a", "_b", "_c", "_d"];

    fn push_components(&self, out: &mut Vec<f64>) {
        out.extend_from_slice(&self.to_real4());
    }

    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

/// Per-node scalar values over a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField<T> {
    pub grid: GridSpec,
    pub values: Vec<T>,
}

/// Per-node 2-component vectors over a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField<T> {
    pub grid: GridSpec,
    pub comps: [Vec<T>; 2],
}

impl<T: FieldValue> ScalarField<T> {
    pub fn new(grid: GridSpec, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "field has {} values for {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    /// Samples `f` at every node; masked nodes hold the default value.
    pub fn sample(grid: &GridSpec, f: impl Fn([f64; 2]) -> T) -> Self {
        let values = (0..grid.len())
            .map(|n| if grid.is_masked(n) { T::default() } else { f(grid.point(n)) })
            .collect();
        Self {
            grid: grid.clone(),
            values,
        }
    }

    pub fn zeros(grid: &GridSpec) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![T::default(); grid.len()],
        }
    }

    pub fn map<U: FieldValue>(&self, f: impl Fn(T) -> U) -> ScalarField<U> {
        ScalarField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map<S: FieldValue, U: FieldValue>(
        &self,
        other: &ScalarField<S>,
        f: impl Fn(T, S) -> U,
    ) -> ScalarField<U> {
        debug_assert!(self.grid.same_nodes(&other.grid));
        ScalarField {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(other.values.iter())
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// Maximum magnitude over unmasked nodes.
    pub fn max_magnitude(&self) -> f64 {
        self.grid
            .active()
            .map(|n| self.values[n].magnitude())
            .fold(0.0, f64::max)
    }
}

impl<T: FieldValue> VectorField<T> {
    pub fn new(grid: GridSpec, x: Vec<T>, y: Vec<T>) -> Result<Self> {
        if x.len() != grid.len() || y.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "vector field components have {} and {} values for {} nodes",
                x.len(),
                y.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, comps: [x, y] })
    }

    pub fn sample(grid: &GridSpec, f: impl Fn([f64; 2]) -> [T; 2]) -> Self {
        let mut x = Vec::with_capacity(grid.len());
        let mut y = Vec::with_capacity(grid.len());
        for n in 0..grid.len() {
            let v = if grid.is_masked(n) {
                [T::default(); 2]
            } else {
                f(grid.point(n))
            };
            x.push(v[0]);
            y.push(v[1]);
        }
        Self {
            grid: grid.clone(),
            comps: [x, y],
        }
    }

    pub fn zeros(grid: &GridSpec) -> Self {
        Self {
            grid: grid.clone(),
            comps: [vec![T::default(); grid.len()], vec![T::default(); grid.len()]],
        }
    }

    pub fn at(&self, n: usize) -> [T; 2] {
        [self.comps[0][n], self.comps[1][n]]
    }

    pub fn component(&self, axis: usize) -> ScalarField<T> {
        ScalarField {
            grid: self.grid.clone(),
            values: self.comps[axis].clone(),
        }
    }

    pub fn map<U: FieldValue>(&self, f: impl Fn([T; 2]) -> [U; 2]) -> VectorField<U> {
        let mut x = Vec::with_capacity(self.grid.len());
        let mut y = Vec::with_capacity(self.grid.len());
        for n in 0..self.grid.len() {
            let v = f(self.at(n));
            x.push(v[0]);
            y.push(v[1]);
        }
        VectorField {
            grid: self.grid.clone(),
            comps: [x, y],
        }
    }

    /// Maximum Euclidean magnitude over unmasked nodes.
    pub fn max_magnitude(&self) -> f64 {
        self.grid
            .active()
            .map(|n| {
                let v = self.at(n);
                (v[0].magnitude().powi(2) + v[1].magnitude().powi(2)).sqrt()
            })
            .fold(0.0, f64::max)
    }
}

impl VectorField<f64> {
    /// Bilinear interpolation. Fails outside the grid or when any of the
    /// four surrounding nodes is masked.
    pub fn interpolate(&self, p: [f64; 2]) -> Result<[f64; 2]> {
        let g = &self.grid;
        if !g.contains(p) {
            return Err(Error::OutsideDomain { x: p[0], y: p[1] });
        }
        let fx = ((p[0] - g.origin[0]) / g.dx).clamp(0.0, (g.nx - 1) as f64);
        let fy = ((p[1] - g.origin[1]) / g.dy).clamp(0.0, (g.ny - 1) as f64);
        let i = (fx.floor() as usize).min(g.nx - 2);
        let j = (fy.floor() as usize).min(g.ny - 2);
        let (tx, ty) = (fx - i as f64, fy - j as f64);
        let corners = [
            (g.index(i, j), (1.0 - tx) * (1.0 - ty)),
            (g.index(i + 1, j), tx * (1.0 - ty)),
            (g.index(i, j + 1), (1.0 - tx) * ty),
            (g.index(i + 1, j + 1), tx * ty),
        ];
        let mut out = [0.0; 2];
        for (n, w) in corners {
            if g.is_masked(n) {
                return Err(Error::OutsideDomain { x: p[0], y: p[1] });
            }
            out[0] += w * self.comps[0][n];
            out[1] += w * self.comps[1][n];
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_small_or_degenerate_grids() {
        assert!(GridSpec::new(2, 5, 1.0, 1.0, [0.0, 0.0]).is_err());
        assert!(GridSpec::new(5, 5, 0.0, 1.0, [0.0, 0.0]).is_err());
        assert!(GridSpec::new(5, 5, 1.0, -1.0, [0.0, 0.0]).is_err());
        assert!(GridSpec::new(5, 5, f64::NAN, 1.0, [0.0, 0.0]).is_err());
        assert!(GridSpec::spanning(1, 5, [0.0, 1.0], [0.0, 1.0]).is_err());
    }

    #[test]
    fn indexing_and_neighbors() {
        let g = GridSpec::spanning(4, 3, [0.0, 3.0], [0.0, 2.0]).unwrap();
        assert_eq!(g.point(g.index(2, 1)), [2.0, 1.0]);
        assert_eq!(g.coords(7), (3, 1));
        assert_eq!(g.neighbor(0, 0, -1), None);
        assert_eq!(g.neighbor(0, 1, 1), Some(4));
        let masked = g.with_mask(|p| p == [1.0, 0.0]);
        assert_eq!(masked.neighbor(0, 0, 1), None);
        assert_eq!(masked.active().count(), 11);
    }

    #[test]
    fn field_length_checked() {
        let g = GridSpec::spanning(3, 3, [0.0, 1.0], [0.0, 1.0]).unwrap();
        assert!(ScalarField::new(g.clone(), vec![0.0; 8]).is_err());
        assert!(VectorField::new(g, vec![0.0; 9], vec![0.0; 10]).is_err());
    }

    #[test]
    fn bilinear_interpolation_is_exact_for_linear_fields() {
        let g = GridSpec::spanning(5, 5, [0.0, 1.0], [0.0, 1.0]).unwrap();
        let v = VectorField::sample(&g, |p| [2.0 * p[0] - p[1], 0.5]);
        let out = v.interpolate([0.33, 0.71]).unwrap();
        assert!((out[0] - (0.66 - 0.71)).abs() < 1e-14);
        assert!(v.interpolate([1.2, 0.5]).is_err());
    }
}
