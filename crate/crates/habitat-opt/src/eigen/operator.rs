//! Stencil operators `A = -Δ + diag(mass) - shift` on periodic cells and
//! zero-boundary boxes.

use crate::grid::{PeriodicGrid, MAX_DIMS};
use std::sync::Arc;

/// Matrix-free symmetric linear operator.
pub trait LinOp {
    fn len(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// Wrap-around neighbors on every axis.
    Periodic,
    /// Missing neighbors read as zero (homogeneous Dirichlet just outside
    /// the box).
    DirichletBox,
}

/// Second-order centered `-Δ` plus a diagonal mass term and a scalar shift:
/// `(A x)ⱼ = Σᵢ (2xⱼ - x(j-eᵢ) - x(j+eᵢ))/hᵢ² + (massⱼ - shift)·xⱼ`.
pub struct Stencil {
    grid: Arc<PeriodicGrid>,
    boundary: Boundary,
    mass: Vec<f64>,
    pub shift: f64,
    inv_h2: [f64; MAX_DIMS],
}

impl Stencil {
    pub fn new(grid: Arc<PeriodicGrid>, boundary: Boundary, mass: Vec<f64>) -> Self {
        assert_eq!(mass.len(), grid.node_count());
        let mut inv_h2 = [0.0; MAX_DIMS];
        for axis in 0..grid.dims() {
            inv_h2[axis] = 1.0 / (grid.spacing(axis) * grid.spacing(axis));
        }
        Stencil { grid, boundary, mass, shift: 0.0, inv_h2 }
    }

    pub fn grid(&self) -> &Arc<PeriodicGrid> {
        &self.grid
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn mass_min(&self) -> f64 {
        self.mass.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn mass_max(&self) -> f64 {
        self.mass.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Gershgorin-type bound on the operator norm of `-Δ + diag(mass)`;
    /// residual tolerances are taken relative to this scale.
    pub fn operator_scale(&self) -> f64 {
        let lap: f64 = (0..self.grid.dims()).map(|a| 4.0 * self.inv_h2[a]).sum();
        let m = self.mass.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        lap + m
    }

    fn apply_1d(&self, x: &[f64], y: &mut [f64]) {
        let n = self.grid.points(0);
        let c = self.inv_h2[0];
        let per = self.boundary == Boundary::Periodic;
        for j in 0..n {
            let xm = if j > 0 {
                x[j - 1]
            } else if per {
                x[n - 1]
            } else {
                0.0
            };
            let xp = if j + 1 < n {
                x[j + 1]
            } else if per {
                x[0]
            } else {
                0.0
            };
            y[j] = (2.0 * x[j] - xm - xp) * c + (self.mass[j] - self.shift) * x[j];
        }
    }

    fn apply_2d(&self, x: &[f64], y: &mut [f64]) {
        let n0 = self.grid.points(0);
        let n1 = self.grid.points(1);
        let c0 = self.inv_h2[0];
        let c1 = self.inv_h2[1];
        let shift = self.shift;
        let per = self.boundary == Boundary::Periodic;
        for j0 in 0..n0 {
            let row = j0 * n1;
            let up_ok = per || j0 > 0;
            let dn_ok = per || j0 + 1 < n0;
            let up = if j0 > 0 { row - n1 } else { (n0 - 1) * n1 };
            let dn = if j0 + 1 < n0 { row + n1 } else { 0 };
            let (xs, ms, ys) = (&x[row..row + n1], &self.mass[row..row + n1], &mut y[row..row + n1]);
            // interior of the row
            for k in 1..n1 - 1 {
                let mut v = (2.0 * xs[k] - xs[k - 1] - xs[k + 1]) * c1;
                let mut vert = 2.0 * xs[k];
                if up_ok {
                    vert -= x[up + k];
                }
                if dn_ok {
                    vert -= x[dn + k];
                }
                v += vert * c0;
                ys[k] = v + (ms[k] - shift) * xs[k];
            }
            for k in [0, n1 - 1] {
                let xm = if k > 0 {
                    xs[k - 1]
                } else if per {
                    xs[n1 - 1]
                } else {
                    0.0
                };
                let xp = if k + 1 < n1 {
                    xs[k + 1]
                } else if per {
                    xs[0]
                } else {
                    0.0
                };
                let mut v = (2.0 * xs[k] - xm - xp) * c1;
                let mut vert = 2.0 * xs[k];
                if up_ok {
                    vert -= x[up + k];
                }
                if dn_ok {
                    vert -= x[dn + k];
                }
                v += vert * c0;
                ys[k] = v + (ms[k] - shift) * xs[k];
            }
        }
    }

    fn apply_3d(&self, x: &[f64], y: &mut [f64]) {
        let n0 = self.grid.points(0);
        let n1 = self.grid.points(1);
        let n2 = self.grid.points(2);
        let (c0, c1, c2) = (self.inv_h2[0], self.inv_h2[1], self.inv_h2[2]);
        let shift = self.shift;
        let per = self.boundary == Boundary::Periodic;
        let plane = n1 * n2;
        for j0 in 0..n0 {
            for j1 in 0..n1 {
                let row = j0 * plane + j1 * n2;
                for j2 in 0..n2 {
                    let j = row + j2;
                    let mut v = 2.0 * (c0 + c1 + c2) * x[j] + (self.mass[j] - shift) * x[j];
                    // axis 0
                    if j0 > 0 {
                        v -= c0 * x[j - plane];
                    } else if per {
                        v -= c0 * x[j + (n0 - 1) * plane];
                    }
                    if j0 + 1 < n0 {
                        v -= c0 * x[j + plane];
                    } else if per {
                        v -= c0 * x[j - (n0 - 1) * plane];
                    }
                    // axis 1
                    if j1 > 0 {
                        v -= c1 * x[j - n2];
                    } else if per {
                        v -= c1 * x[j + (n1 - 1) * n2];
                    }
                    if j1 + 1 < n1 {
                        v -= c1 * x[j + n2];
                    } else if per {
                        v -= c1 * x[j - (n1 - 1) * n2];
                    }
                    // axis 2
                    if j2 > 0 {
                        v -= c2 * x[j - 1];
                    } else if per {
                        v -= c2 * x[j + n2 - 1];
                    }
                    if j2 + 1 < n2 {
                        v -= c2 * x[j + 1];
                    } else if per {
                        v -= c2 * x[j - (n2 - 1)];
                    }
                    y[j] = v;
                }
            }
        }
    }
}

impl LinOp for Stencil {
    fn len(&self) -> usize {
        self.mass.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.len());
        debug_assert_eq!(y.len(), self.len());
        match self.grid.dims() {
            1 => self.apply_1d(x, y),
            2 => self.apply_2d(x, y),
            _ => self.apply_3d(x, y),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::ScalarField;

    #[test]
    fn periodic_apply_matches_field_laplacian() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for dims in 1..=3 {
            let grid = match dims {
                1 => PeriodicGrid::new(1, &[1.3], &[16]).unwrap(),
                2 => PeriodicGrid::new(2, &[1.0, 0.7], &[12, 10]).unwrap(),
                _ => PeriodicGrid::new(3, &[1.0, 0.9, 1.1], &[8, 10, 12]).unwrap(),
            };
            let f = ScalarField::from_fn(grid.clone(), |_| rng.gen_range(-1.0..1.0));
            let lap = f.laplacian();
            let op = Stencil::new(grid.clone(), Boundary::Periodic, vec![0.0; grid.node_count()]);
            let mut y = vec![0.0; grid.node_count()];
            op.apply(f.values(), &mut y);
            for j in 0..y.len() {
                assert!((y[j] + lap.values()[j]).abs() < 1e-9, "dims {dims} node {j}");
            }
        }
    }

    #[test]
    fn apply_is_symmetric() {
        use crate::util::dot;
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for boundary in [Boundary::Periodic, Boundary::DirichletBox] {
            let grid = PeriodicGrid::new(2, &[1.0, 1.0], &[10, 14]).unwrap();
            let mass: Vec<f64> = (0..grid.node_count()).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let op = Stencil::new(grid.clone(), boundary, mass);
            let a: Vec<f64> = (0..grid.node_count()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let b: Vec<f64> = (0..grid.node_count()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut aa = vec![0.0; a.len()];
            let mut ab = vec![0.0; a.len()];
            op.apply(&a, &mut aa);
            op.apply(&b, &mut ab);
            let lhs = dot(&aa, &b);
            let rhs = dot(&ab, &a);
            assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(1.0), "{boundary:?}");
        }
    }

    #[test]
    fn dirichlet_eigenvector_is_sine_mode() {
        // The box Laplacian with zero ghost values has eigenvectors
        // sin(πk(j+1)/(n+1)) with eigenvalue (2-2cos(πk/(n+1)))/h².
        let n = 16;
        let grid = PeriodicGrid::new(1, &[1.0], &[n]).unwrap();
        let op = Stencil::new(grid.clone(), Boundary::DirichletBox, vec![0.0; n]);
        let h = grid.spacing(0);
        for k in [1usize, 3] {
            let x: Vec<f64> = (0..n)
                .map(|j| (std::f64::consts::PI * k as f64 * (j + 1) as f64 / (n + 1) as f64).sin())
                .collect();
            let mut y = vec![0.0; n];
            op.apply(&x, &mut y);
            let lam = (2.0 - 2.0 * (std::f64::consts::PI * k as f64 / (n + 1) as f64).cos()) / (h * h);
            for j in 0..n {
                assert!((y[j] - lam * x[j]).abs() < 1e-9 * lam, "k={k} j={j}");
            }
        }
    }
}
