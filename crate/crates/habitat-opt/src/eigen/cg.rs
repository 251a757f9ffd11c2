//! Preconditioned conjugate gradient for the shifted stencil solves.

use super::operator::LinOp;
use crate::util::dot;

/// Application of an SPD preconditioner `z ≈ M⁻¹ r`.
pub trait Precond {
    fn solve(&mut self, r: &[f64], z: &mut [f64]);
}

/// Identity preconditioner.
pub struct NoPrecond;

impl Precond for NoPrecond {
    fn solve(&mut self, r: &[f64], z: &mut [f64]) {
        z.copy_from_slice(r);
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CgOutcome {
    pub iterations: usize,
    pub rel_residual: f64,
    pub converged: bool,
    /// `pᵀAp ≤ 0` encountered: the operator is not positive definite at the
    /// current shift. The eigensolver reacts by lowering the shift.
    pub indefinite: bool,
}

/// Reusable CG work buffers.
pub struct CgWork {
    r: Vec<f64>,
    z: Vec<f64>,
    p: Vec<f64>,
    ap: Vec<f64>,
}

impl CgWork {
    pub fn new(n: usize) -> Self {
        CgWork { r: vec![0.0; n], z: vec![0.0; n], p: vec![0.0; n], ap: vec![0.0; n] }
    }
}

/// Solve `A x = b` for symmetric positive definite `A`, starting from the
/// current contents of `x`. Convergence is `‖r‖ ≤ rel_tol·‖b‖`.
pub fn pcg(
    op: &impl LinOp,
    precond: &mut impl Precond,
    b: &[f64],
    x: &mut [f64],
    rel_tol: f64,
    max_iter: usize,
    w: &mut CgWork,
) -> CgOutcome {
    let n = b.len();
    let b_norm = dot(b, b).sqrt().max(f64::MIN_POSITIVE);
    op.apply(x, &mut w.ap);
    for j in 0..n {
        w.r[j] = b[j] - w.ap[j];
    }
    let mut r_norm2 = dot(&w.r, &w.r);
    if r_norm2.sqrt() <= rel_tol * b_norm {
        return CgOutcome { iterations: 0, rel_residual: r_norm2.sqrt() / b_norm, converged: true, indefinite: false };
    }
    precond.solve(&w.r, &mut w.z);
    w.p.copy_from_slice(&w.z);
    let mut rho = dot(&w.r, &w.z);
    for it in 1..=max_iter {
        op.apply(&w.p, &mut w.ap);
        let pap = dot(&w.p, &w.ap);
        if !(pap > 0.0) {
            return CgOutcome {
                iterations: it,
                rel_residual: r_norm2.sqrt() / b_norm,
                converged: false,
                indefinite: true,
            };
        }
        let alpha = rho / pap;
        for j in 0..n {
            x[j] += alpha * w.p[j];
            w.r[j] -= alpha * w.ap[j];
        }
        r_norm2 = dot(&w.r, &w.r);
        if r_norm2.sqrt() <= rel_tol * b_norm {
            return CgOutcome { iterations: it, rel_residual: r_norm2.sqrt() / b_norm, converged: true, indefinite: false };
        }
        precond.solve(&w.r, &mut w.z);
        let rho_next = dot(&w.r, &w.z);
        let beta = rho_next / rho;
        rho = rho_next;
        for j in 0..n {
            w.p[j] = w.z[j] + beta * w.p[j];
        }
    }
    CgOutcome { iterations: max_iter, rel_residual: r_norm2.sqrt() / b_norm, converged: false, indefinite: false }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::operator::{Boundary, Stencil};
    use crate::grid::PeriodicGrid;

    #[test]
    fn solves_shifted_laplacian() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let grid = PeriodicGrid::new(2, &[1.0, 1.0], &[16, 16]).unwrap();
        let n = grid.node_count();
        // A = -Δ + 5 is SPD.
        let op = Stencil::new(grid, Boundary::Periodic, vec![5.0; n]);
        let x_true: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut b = vec![0.0; n];
        op.apply(&x_true, &mut b);
        let mut x = vec![0.0; n];
        let mut w = CgWork::new(n);
        let out = pcg(&op, &mut NoPrecond, &b, &mut x, 1e-12, 10_000, &mut w);
        assert!(out.converged, "{out:?}");
        let err: f64 = x.iter().zip(&x_true).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        assert!(err < 1e-7, "err {err}");
    }

    #[test]
    fn flags_indefinite_operator() {
        let grid = PeriodicGrid::new(1, &[1.0], &[16]).unwrap();
        let n = grid.node_count();
        // -Δ - 10 has negative eigenvalue for the constant mode.
        let op = Stencil::new(grid, Boundary::Periodic, vec![-10.0; n]);
        let b = vec![1.0; n];
        let mut x = vec![0.0; n];
        let mut w = CgWork::new(n);
        let out = pcg(&op, &mut NoPrecond, &b, &mut x, 1e-12, 1000, &mut w);
        assert!(out.indefinite);
    }
}
