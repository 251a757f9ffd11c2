//! Shifted inverse iteration for the smallest eigenpair of a stencil
//! operator, with FFT-preconditioned CG inner solves.
//!
//! The shift trails the Rayleigh quotient from below by a residual-scaled
//! margin, so the inner operator stays positive definite while the
//! convergence factor `(μ₁-σ)/(μ₂-σ)` shrinks with the residual. A CG
//! breakdown (non-positive curvature) signals that the shift overtook `μ₁`;
//! the margin is then widened and the solve retried.

use super::cg::{pcg, CgWork};
use super::operator::{LinOp, Stencil};
use super::spectral::SpectralPrecond;
use super::SolverError;
use crate::util::{dot, norm2};

pub struct InverseOptions {
    /// Residual tolerance relative to the operator scale.
    pub tol_rel: f64,
    pub max_outer: usize,
    pub max_cg: usize,
    /// Inner CG tolerance as a fraction of the outer residual target.
    pub cg_factor: f64,
}

impl Default for InverseOptions {
    fn default() -> Self {
        InverseOptions { tol_rel: 1e-10, max_outer: 100, max_cg: 20_000, cg_factor: 1e-2 }
    }
}

pub struct SmallestPair {
    /// Rayleigh-quotient eigenvalue estimate.
    pub value: f64,
    /// Unit 2-norm eigenvector.
    pub vector: Vec<f64>,
    /// Final residual `‖Au - μu‖₂` relative to the operator scale.
    pub residual_rel: f64,
    pub outer_iters: usize,
    pub cg_iters: usize,
}

/// Compute the smallest eigenpair of `A = -Δ + diag(mass)`.
///
/// `op.shift` is used internally and reset to zero on return. `start`, when
/// given, seeds the iteration (warm starts from a nearby problem typically
/// converge in one or two solves).
pub fn smallest_eigenpair(
    op: &mut Stencil,
    precond: &mut SpectralPrecond,
    start: Option<&[f64]>,
    opts: &InverseOptions,
) -> Result<SmallestPair, SolverError> {
    let n = op.len();
    let scale = op.operator_scale();
    let mass_min = op.mass_min();
    let mass_max = op.mass_max();

    let mut u: Vec<f64> = match start {
        Some(s) => s.to_vec(),
        None => vec![1.0; n],
    };
    let nrm = norm2(&u);
    if !(nrm > 0.0) {
        return Err(SolverError::BadStart);
    }
    for v in &mut u {
        *v /= nrm;
    }

    let mut au = vec![0.0; n];
    let mut x = vec![0.0; n];
    let mut work = CgWork::new(n);
    let mut cg_total = 0usize;
    let mut last_res = f64::INFINITY;

    for outer in 0..opts.max_outer {
        op.shift = 0.0;
        op.apply(&u, &mut au);
        let rho = dot(&au, &u);
        // residual r = Au - ρu
        let mut res2 = 0.0;
        for j in 0..n {
            let r = au[j] - rho * u[j];
            res2 += r * r;
        }
        let res = res2.sqrt();
        last_res = res / scale;
        if last_res <= opts.tol_rel {
            let u = ensure_positive(op, precond, u, &mut work, opts, mass_min, scale)?;
            op.shift = 0.0;
            return Ok(SmallestPair {
                value: rho,
                vector: u,
                residual_rel: last_res,
                outer_iters: outer,
                cg_iters: cg_total,
            });
        }

        // Shift strictly below μ₁: trail the Rayleigh quotient by a margin,
        // never below the Gershgorin floor.
        let floor = mass_min - 1e-3 * scale;
        let mut margin = (4.0 * res).max(1e-9 * scale);
        let mut solved = false;
        while !solved {
            let sigma = (rho - margin).max(floor);
            op.shift = sigma;
            precond.tau = (mass_max - sigma).max(1e-9 * scale);
            x.copy_from_slice(&u);
            let cg_tol = (opts.cg_factor * opts.tol_rel * scale / (res + opts.tol_rel * scale))
                .clamp(opts.cg_factor * opts.tol_rel, 0.05);
            let out = pcg(op, precond, &u, &mut x, cg_tol, opts.max_cg, &mut work);
            cg_total += out.iterations;
            if out.indefinite {
                // Shift overtook the smallest eigenvalue; widen the margin.
                margin = 4.0 * margin + 1e-6 * scale;
                if sigma <= floor {
                    return Err(SolverError::NonConvergence {
                        iterations: outer,
                        residual: last_res,
                    });
                }
                continue;
            }
            if !out.converged && out.rel_residual > 0.5 {
                return Err(SolverError::CgFailure {
                    iterations: out.iterations,
                    residual: out.rel_residual,
                });
            }
            solved = true;
        }
        // Normalize, keep orientation aligned with the previous iterate.
        let s = dot(&x, &u);
        let nrm = norm2(&x);
        if !(nrm > 0.0 && nrm.is_finite()) {
            return Err(SolverError::NonConvergence { iterations: outer, residual: last_res });
        }
        let flip = if s < 0.0 { -1.0 } else { 1.0 };
        for (uj, xj) in u.iter_mut().zip(&x) {
            *uj = flip * xj / nrm;
        }
    }
    Err(SolverError::NonConvergence { iterations: opts.max_outer, residual: last_res })
}

/// Principal eigenvectors are positive. The converged iterate can carry
/// sign dirt only if it stagnated away from the Perron direction; a couple
/// of deep-shift inverse steps (an M-matrix regime, positivity-improving)
/// repair it, otherwise the solve is reported as not converged.
fn ensure_positive(
    op: &mut Stencil,
    precond: &mut SpectralPrecond,
    mut u: Vec<f64>,
    work: &mut CgWork,
    opts: &InverseOptions,
    mass_min: f64,
    scale: f64,
) -> Result<Vec<f64>, SolverError> {
    let mean: f64 = u.iter().sum();
    if mean < 0.0 {
        for v in &mut u {
            *v = -*v;
        }
    }
    if u.iter().all(|&v| v > 0.0) {
        return Ok(u);
    }
    let n = u.len();
    let mut x = vec![0.0; n];
    for _ in 0..3 {
        let sigma = mass_min - 1e-3 * scale;
        op.shift = sigma;
        precond.tau = (op.mass_max() - sigma).max(1e-9 * scale);
        x.copy_from_slice(&u);
        let out = pcg(op, precond, &u, &mut x, 1e-10, opts.max_cg, work);
        if out.indefinite {
            break;
        }
        let nrm = norm2(&x);
        for (uj, xj) in u.iter_mut().zip(&x) {
            *uj = xj / nrm;
        }
        if u.iter().all(|&v| v > 0.0) {
            return Ok(u);
        }
    }
    if u.iter().all(|&v| v > 0.0) {
        Ok(u)
    } else {
        Err(SolverError::NotPositive)
    }
}
