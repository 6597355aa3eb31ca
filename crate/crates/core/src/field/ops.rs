//! Second-order finite differences on [`GridSpec`] fields.
//!
//! Interior nodes use central stencils. Where a neighbor is missing (grid
//! edge or masked node) the stencil switches to a one-sided second-order
//! formula, so masked nodes are never read. Masked nodes themselves get the
//! default value.

use super::grid::{FieldValue, GridSpec, ScalarField, VectorField};

fn first_derivative<T: FieldValue>(grid: &GridSpec, f: &[T], axis: usize) -> Vec<T> {
    let h = grid.spacing(axis);
    (0..grid.len())
        .map(|n| {
            if grid.is_masked(n) {
                return T::default();
            }
            let at = |s: isize| grid.neighbor(n, axis, s);
            let pair = |s: isize| at(s).zip(at(2 * s));
            match (at(-1), at(1)) {
                (Some(m), Some(p)) => (f[p] - f[m]) * (0.5 / h),
                _ => {
                    if let Some((p1, p2)) = pair(1) {
                        (f[p1] * 4.0 - f[n] * 3.0 - f[p2]) * (0.5 / h)
                    } else if let Some((m1, m2)) = pair(-1) {
                        (f[n] * 3.0 - f[m1] * 4.0 + f[m2]) * (0.5 / h)
                    } else if let Some(p) = at(1) {
                        (f[p] - f[n]) * (1.0 / h)
                    } else if let Some(m) = at(-1) {
                        (f[n] - f[m]) * (1.0 / h)
                    } else {
                        T::default()
                    }
                }
            }
        })
        .collect()
}

fn second_derivative<T: FieldValue>(grid: &GridSpec, f: &[T], axis: usize) -> Vec<T> {
    let h2 = grid.spacing(axis).powi(2);
    (0..grid.len())
        .map(|n| {
            if grid.is_masked(n) {
                return T::default();
            }
            let at = |s: isize| grid.neighbor(n, axis, s);
            let run = |s: isize, len: isize| -> Option<Vec<usize>> {
                (1..=len).map(|k| at(k * s)).collect()
            };
            match (at(-1), at(1)) {
                (Some(m), Some(p)) => (f[m] + f[p] - f[n] * 2.0) * (1.0 / h2),
                _ => {
                    for s in [1isize, -1] {
                        if let Some(r) = run(s, 3) {
                            return (f[n] * 2.0 - f[r[0]] * 5.0 + f[r[1]] * 4.0 - f[r[2]]) * (1.0 / h2);
                        }
                    }
                    for s in [1isize, -1] {
                        if let Some(r) = run(s, 2) {
                            return (f[n] - f[r[0]] * 2.0 + f[r[1]]) * (1.0 / h2);
                        }
                    }
                    T::default()
                }
            }
        })
        .collect()
}

/// Partial derivative along `axis` (0 = x, 1 = y).
pub fn fd_partial<T: FieldValue>(f: &ScalarField<T>, axis: usize) -> ScalarField<T> {
    ScalarField {
        grid: f.grid.clone(),
        values: first_derivative(&f.grid, &f.values, axis),
    }
}

pub fn fd_gradient<T: FieldValue>(f: &ScalarField<T>) -> VectorField<T> {
    VectorField {
        grid: f.grid.clone(),
        comps: [
            first_derivative(&f.grid, &f.values, 0),
            first_derivative(&f.grid, &f.values, 1),
        ],
    }
}

pub fn fd_divergence<T: FieldValue>(v: &VectorField<T>) -> ScalarField<T> {
    let dx = first_derivative(&v.grid, &v.comps[0], 0);
    let dy = first_derivative(&v.grid, &v.comps[1], 1);
    ScalarField {
        grid: v.grid.clone(),
        values: dx.into_iter().zip(dy).map(|(a, b)| a + b).collect(),
    }
}

/// z-component of the curl, `∂x v_y − ∂y v_x`.
pub fn fd_curl<T: FieldValue>(v: &VectorField<T>) -> ScalarField<T> {
    let dvy = first_derivative(&v.grid, &v.comps[1], 0);
    let dvx = first_derivative(&v.grid, &v.comps[0], 1);
    ScalarField {
        grid: v.grid.clone(),
        values: dvy.into_iter().zip(dvx).map(|(a, b)| a - b).collect(),
    }
}

pub fn fd_laplacian<T: FieldValue>(f: &ScalarField<T>) -> ScalarField<T> {
    let xx = second_derivative(&f.grid, &f.values, 0);
    let yy = second_derivative(&f.grid, &f.values, 1);
    ScalarField {
        grid: f.grid.clone(),
        values: xx.into_iter().zip(yy).map(|(a, b)| a + b).collect(),
    }
}

/// Least-squares slope of `log(error)` against `log(h)`.
pub fn convergence_order(samples: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = samples.iter().map(|&(h, e)| (h.ln(), e.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn unit_square(n: usize) -> GridSpec {
        GridSpec::spanning(n, n, [0.0, 1.0], [0.0, 1.0]).unwrap()
    }

    #[test]
    fn gradient_of_linear_and_constant() {
        let g = unit_square(7);
        let grad = fd_gradient(&ScalarField::sample(&g, |p| p[0]));
        for n in 0..g.len() {
            assert!((grad.comps[0][n] - 1.0).abs() < 1e-13);
            assert!(grad.comps[1][n].abs() < 1e-13);
        }
        let grad = fd_gradient(&ScalarField::sample(&g, |_| 4.2));
        assert!(grad.max_magnitude() < 1e-12);
    }

    #[test]
    fn divergence_and_curl_of_simple_fields() {
        let g = unit_square(9);
        let c = VectorField::sample(&g, |_| [1.5, -0.5]);
        assert!(fd_divergence(&c).max_magnitude() < 1e-12);
        let rot = VectorField::sample(&g, |p| [-p[1], p[0]]);
        let curl = fd_curl(&rot);
        for n in 0..g.len() {
            assert!((curl.values[n] - 2.0).abs() < 1e-12);
        }
    }

    fn sin_errors(n: usize, k: f64) -> (f64, f64, f64) {
        let g = unit_square(n);
        // phase offset keeps f'''' nonzero at the walls, where the one-sided
        // stencil's leading error term lives
        let f = ScalarField::sample(&g, |p| (k * p[0] + 0.4).sin());
        let grad = fd_gradient(&f);
        let lap = fd_laplacian(&f);
        let mut eg: f64 = 0.0;
        let mut el: f64 = 0.0;
        for m in 0..g.len() {
            let x = g.point(m)[0];
            eg = eg.max((grad.comps[0][m] - k * (k * x + 0.4).cos()).abs());
            el = el.max((lap.values[m] + k * k * (k * x + 0.4).sin()).abs());
        }
        (g.dx(), eg, el)
    }

    #[test]
    fn second_order_convergence_of_gradient_and_laplacian() {
        let k = 3.0;
        let runs: Vec<_> = [33, 65, 129].iter().map(|&n| sin_errors(n, k)).collect();
        let og = convergence_order(&runs.iter().map(|r| (r.0, r.1)).collect::<Vec<_>>());
        let ol = convergence_order(&runs.iter().map(|r| (r.0, r.2)).collect::<Vec<_>>());
        assert!((og - 2.0).abs() < 0.2, "gradient order {og}");
        assert!((ol - 2.0).abs() < 0.2, "laplacian order {ol}");
    }

    #[test]
    fn divergence_and_curl_converge_at_second_order() {
        let errs: Vec<(f64, f64, f64)> = [17, 33, 65]
            .iter()
            .map(|&n| {
                let g = unit_square(n);
                let v = VectorField::sample(&g, |p| [(2.0 * p[1]).sin() * p[0], (p[0] * p[1]).cos()]);
                let div = fd_divergence(&v);
                let curl = fd_curl(&v);
                let mut ed: f64 = 0.0;
                let mut ec: f64 = 0.0;
                for m in 0..g.len() {
                    let [x, y] = g.point(m);
                    let d = (2.0 * y).sin() - x * (x * y).sin();
                    let c = -y * (x * y).sin() - 2.0 * x * (2.0 * y).cos();
                    ed = ed.max((div.values[m] - d).abs());
                    ec = ec.max((curl.values[m] - c).abs());
                }
                (g.dx(), ed, ec)
            })
            .collect();
        let od = convergence_order(&errs.iter().map(|r| (r.0, r.1)).collect::<Vec<_>>());
        let oc = convergence_order(&errs.iter().map(|r| (r.0, r.2)).collect::<Vec<_>>());
        assert!((od - 2.0).abs() < 0.2, "divergence order {od}");
        assert!((oc - 2.0).abs() < 0.2, "curl order {oc}");
    }

    #[test]
    fn curl_of_gradient_vanishes() {
        // Per-axis stencils commute on a tensor grid, so this holds to rounding.
        for n in [17, 65] {
            let g = unit_square(n);
            let f = ScalarField::sample(&g, |p| (1.3 * p[0] + 0.7 * p[1] * p[1]).sin());
            assert!(fd_curl(&fd_gradient(&f)).max_magnitude() < 1e-10);
        }
    }

    #[test]
    fn masked_nodes_are_never_read() {
        // Put garbage inside a masked disk; derivatives outside must stay clean.
        let base = unit_square(41);
        let inside = |p: [f64; 2]| (p[0] - 0.5).powi(2) + (p[1] - 0.5).powi(2) < 0.04;
        let g = base.with_mask(inside);
        let mut f = ScalarField::sample(&g, |p| Complex64::new(p[0] * p[0], p[1]));
        for n in 0..g.len() {
            if g.is_masked(n) {
                f.values[n] = Complex64::new(1e30, -1e30);
            }
        }
        let grad = fd_gradient(&f);
        let lap = fd_laplacian(&f);
        for n in g.active() {
            let [x, _] = g.point(n);
            assert!((grad.comps[0][n] - Complex64::new(2.0 * x, 0.0)).norm() < 1e-10);
            assert!((grad.comps[1][n] - Complex64::new(0.0, 1.0)).norm() < 1e-10);
            assert!((lap.values[n] - Complex64::new(2.0, 0.0)).norm() < 1e-8);
        }
        for n in 0..g.len() {
            if g.is_masked(n) {
                assert_eq!(grad.comps[0][n], Complex64::default());
            }
        }
    }

    #[test]
    fn order_estimate_recovers_power_law() {
        let s: Vec<_> = [0.1, 0.05, 0.025].iter().map(|&h: &f64| (h, 3.0 * h.powi(2))).collect();
        assert!((convergence_order(&s) - 2.0).abs() < 1e-12);
    }
}
