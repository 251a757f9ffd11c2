//! Dense direct eigensolves of the assembled stencil matrix.
//!
//! This is the oracle side of the dual route: it assembles the same finite
//! difference operator as an explicit symmetric matrix and diagonalizes it
//! with a dense solver, sharing no code with the iterative path beyond the
//! grid geometry. The weighted eigenvalue `λ₁` is found by plain bisection
//! on the smallest-eigenvalue curve, not by the Newton scheme the fast path
//! uses.

use super::operator::Boundary;
use crate::grid::{PeriodicGrid, ScalarField};
use nalgebra::{DMatrix, DVector};
use std::sync::Arc;

/// Assemble `-Δ + diag(mass)` as a dense symmetric matrix.
pub fn assemble(grid: &Arc<PeriodicGrid>, mass: &[f64], boundary: Boundary) -> DMatrix<f64> {
    let n = grid.node_count();
    let dims = grid.dims();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let k = grid.unflat(j);
        let mut diag = mass[j];
        for axis in 0..dims {
            let inv_h2 = 1.0 / (grid.spacing(axis) * grid.spacing(axis));
            diag += 2.0 * inv_h2;
            for d in [-1isize, 1] {
                let kk_raw = k[axis] as isize + d;
                match boundary {
                    Boundary::Periodic => {
                        let mut kk = k;
                        kk[axis] = grid.wrap(axis, k[axis], d);
                        a[(j, grid.flat(kk))] += -inv_h2;
                    }
                    Boundary::DirichletBox => {
                        if kk_raw >= 0 && (kk_raw as usize) < grid.points(axis) {
                            let mut kk = k;
                            kk[axis] = kk_raw as usize;
                            a[(j, grid.flat(kk))] += -inv_h2;
                        }
                        // otherwise the neighbor is a zero ghost value
                    }
                }
            }
        }
        a[(j, j)] += diag;
    }
    a
}

/// Smallest eigenvalue and (sign-normalized, unit) eigenvector of
/// `-Δ - λ·m` by dense symmetric diagonalization.
pub fn dense_mu1(m: &ScalarField, lam: f64, boundary: Boundary) -> (f64, DVector<f64>) {
    let grid = m.grid();
    let mass: Vec<f64> = m.values().iter().map(|&v| -lam * v).collect();
    let a = assemble(grid, &mass, boundary);
    let eig = a.symmetric_eigen();
    let mut best = 0;
    for i in 1..eig.eigenvalues.len() {
        if eig.eigenvalues[i] < eig.eigenvalues[best] {
            best = i;
        }
    }
    let mut v = eig.eigenvectors.column(best).into_owned();
    if v.sum() < 0.0 {
        v = -v;
    }
    (eig.eigenvalues[best], v)
}

/// Positive principal eigenvalue of `-Δu = λ m u` by bisection on
/// `λ ↦ μ₁(-Δ - λm)`, entirely on the dense route.
pub fn dense_lambda1(m: &ScalarField, boundary: Boundary, rel_tol: f64) -> Option<f64> {
    let mu = |lam: f64| dense_mu1(m, lam, boundary).0;
    // Grow until the curve turns negative.
    let mut hi = 1.0;
    let mut lo = 0.0;
    for _ in 0..64 {
        if mu(hi) < 0.0 {
            break;
        }
        lo = hi;
        hi *= 2.0;
        if hi > 1e9 {
            return None;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mu(mid) < 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= rel_tol * hi {
            break;
        }
    }
    Some(0.5 * (lo + hi))
}
