//! Principal eigenvalue solvers for the periodic habitat operator.
//!
//! Two eigenvalues organize the theory. For a weight `m` and dispersal
//! `λ ≥ 0`, `μ₁(m, λ)` is the smallest eigenvalue of the symmetric periodic
//! operator `-Δ - λm`; it is concave in `λ`, vanishes at `λ = 0` (constant
//! eigenfunction), and initially increases when `∫m < 0`. When the habitat
//! is intermediate (`∫m < 0 < max m`), the unique positive root of
//! `μ₁(m, ·)` is the positive principal eigenvalue `λ₁(m)` of the weighted
//! problem `-Δu = λ m u`, and the survival threshold is `d*(m) = 1/λ₁(m)`:
//! the population persists exactly for diffusion rates `d < d*`.
//!
//! `μ₁` is computed by shifted inverse iteration with FFT-preconditioned CG
//! solves; `λ₁` by a bracketed, derivative-accelerated root find on
//! `μ₁(m, ·)` (the derivative `-∫m u_λ²` comes free from the eigenvector).
//! The other principal eigenvalue of the weighted problem is identically 0
//! under the negative-average assumption and is not computed.

pub mod cg;
pub mod dense;
mod inverse;
pub mod operator;
pub mod spectral;

use crate::grid::{GridError, ScalarField};
use crate::util::dot;
use inverse::{smallest_eigenpair, InverseOptions};
use operator::{Boundary, Stencil};
use serde::{Deserialize, Serialize};
use spectral::SpectralPrecond;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("eigensolver did not reach tolerance ({iterations} iterations, residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("inner CG solve failed ({iterations} iterations, residual {residual:.3e})")]
    CgFailure { iterations: usize, residual: f64 },
    #[error("converged iterate is not a positive eigenfunction")]
    NotPositive,
    #[error("initial vector has zero norm")]
    BadStart,
    #[error("habitat is {0:?}: the positive principal eigenvalue exists only in the intermediate case (negative average, positive somewhere)")]
    NotIntermediateHabitat(HabitatClass),
    #[error("no sign change of mu1 below lambda_max = {lambda_max:.3e}")]
    BracketFailure { lambda_max: f64 },
    #[error("lambda must be nonnegative and finite, got {0}")]
    BadLambda(f64),
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Solver tolerances. Residuals are measured relative to a Gershgorin bound
/// on the operator norm (an absolute 1e-10 would be below the attainable
/// floating-point floor on fine grids).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveOptions {
    pub residual_tol: f64,
    pub max_outer: usize,
    pub max_cg_iters: usize,
    /// Inner CG tolerance as a fraction of the outer target.
    pub cg_tol_factor: f64,
    pub lambda_rel_tol: f64,
    pub max_lambda_evals: usize,
    pub lambda_max: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            residual_tol: 1e-10,
            max_outer: 100,
            max_cg_iters: 20_000,
            cg_tol_factor: 1e-2,
            lambda_rel_tol: 1e-10,
            max_lambda_evals: 200,
            lambda_max: 1e6,
        }
    }
}

/// Eigenvalue and positive, `∫u² = 1` normalized eigenfunction.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub value: f64,
    pub function: ScalarField,
    pub residual: f64,
}

/// Habitat trichotomy by sign of `max m` and `∫m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HabitatClass {
    /// `m ≤ 0` everywhere: extinction for every diffusion rate.
    HostileEverywhere,
    /// `∫m ≥ 0` with `max m > 0`: persistence for every diffusion rate.
    FavorableOnAverage,
    /// `∫m < 0 < max m`: a finite positive threshold `d*` exists.
    Intermediate,
}

/// Classify a habitat weight by the sign tests on `max m` and `∫ m`.
pub fn classify(m: &ScalarField) -> HabitatClass {
    if m.max() <= 0.0 {
        HabitatClass::HostileEverywhere
    } else if m.integrate() >= 0.0 {
        HabitatClass::FavorableOnAverage
    } else {
        HabitatClass::Intermediate
    }
}

/// One `μ₁` evaluation along the `λ` root find.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LambdaEval {
    pub lambda: f64,
    pub mu: f64,
    pub residual: f64,
    pub outer_iters: usize,
    pub cg_iters: usize,
}

/// Per-solve diagnostics, serialized as a JSON record next to results.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SolveDiagnostics {
    pub evals: Vec<LambdaEval>,
    pub bracket: Option<(f64, f64)>,
    pub total_cg_iters: usize,
}

/// Weighted principal eigenpair: `-Δu = λ₁ m u` with `∫ m u² = 1`.
#[derive(Debug, Clone)]
pub struct WeightedEigenResult {
    pub lambda1: f64,
    /// Positive eigenfunction, renormalized so `∫ m u² = 1`.
    pub eigenfunction: ScalarField,
    /// The weight the problem was solved for.
    pub weight: ScalarField,
    /// Residual of `-Δu - λ₁ m u` relative to the operator scale.
    pub residual: f64,
    pub diagnostics: SolveDiagnostics,
}

impl WeightedEigenResult {
    /// The same eigenfunction rescaled to `∫ u² = 1`.
    pub fn unit_l2_eigenfunction(&self) -> ScalarField {
        let nrm = self.eigenfunction.l2_norm_sq().sqrt();
        let mut f = self.eigenfunction.clone();
        f.scale(1.0 / nrm);
        f
    }
}

/// Smallest eigenvalue `μ₁` and positive normalized eigenfunction of
/// `-Δ - λm` with periodic wrap.
///
/// `μ₁(m, 0) = 0` with the constant eigenfunction, exactly: the constant
/// vector spans the kernel of the discrete Laplacian, so this case is
/// returned in closed form rather than iterated.
pub fn mu1(m: &ScalarField, lam: f64, opts: &SolveOptions) -> Result<EigenPair, SolverError> {
    mu1_with_start(m, lam, opts, None)
}

/// [`mu1`] with a warm-start eigenfunction from a nearby problem.
pub fn mu1_with_start(
    m: &ScalarField,
    lam: f64,
    opts: &SolveOptions,
    start: Option<&ScalarField>,
) -> Result<EigenPair, SolverError> {
    mu1_counted(m, lam, opts, start).map(|(pair, _, _)| pair)
}

fn mu1_counted(
    m: &ScalarField,
    lam: f64,
    opts: &SolveOptions,
    start: Option<&ScalarField>,
) -> Result<(EigenPair, usize, usize), SolverError> {
    if !(lam.is_finite() && lam >= 0.0) {
        return Err(SolverError::BadLambda(lam));
    }
    let grid = m.grid().clone();
    if lam == 0.0 {
        let c = 1.0 / grid.volume().sqrt();
        return Ok((
            EigenPair { value: 0.0, function: ScalarField::constant(grid, c), residual: 0.0 },
            0,
            0,
        ));
    }
    let mass: Vec<f64> = m.values().iter().map(|&v| -lam * v).collect();
    let mut op = Stencil::new(grid.clone(), Boundary::Periodic, mass);
    let mut precond = SpectralPrecond::new(&grid, Boundary::Periodic);
    let iopts = InverseOptions {
        tol_rel: opts.residual_tol,
        max_outer: opts.max_outer,
        max_cg: opts.max_cg_iters,
        cg_factor: opts.cg_tol_factor,
    };
    let start_vec = start.map(|f| f.values().to_vec());
    let pair = smallest_eigenpair(&mut op, &mut precond, start_vec.as_deref(), &iopts)?;
    let cell = grid.cell_volume();
    let scale = 1.0 / cell.sqrt();
    let function = ScalarField::from_raw(grid, pair.vector.iter().map(|&v| v * scale).collect());
    Ok((
        EigenPair { value: pair.value, function, residual: pair.residual_rel },
        pair.outer_iters,
        pair.cg_iters,
    ))
}

/// Rayleigh quotient pieces `(∫|∇u|², ∫ m u²)`; the caller judges validity
/// of the ratio (no hidden filtering of sign-indefinite denominators).
pub fn rayleigh(u: &ScalarField, m: &ScalarField) -> (f64, f64) {
    let num = u.dirichlet_energy();
    let den: f64 = {
        let terms: Vec<f64> =
            u.values().iter().zip(m.values()).map(|(&uv, &mv)| mv * uv * uv).collect();
        crate::util::pairwise_sum(&terms) * u.grid().cell_volume()
    };
    (num, den)
}

/// Positive principal eigenvalue `λ₁(m)` of the weighted periodic problem,
/// for intermediate habitats: the unique positive root of `λ ↦ μ₁(m, λ)`.
pub fn lambda1(m: &ScalarField, opts: &SolveOptions) -> Result<WeightedEigenResult, SolverError> {
    lambda1_with_hint(m, opts, None)
}

/// [`lambda1`] with warm-start data `(λ guess, eigenfunction)` from a nearby
/// weight, e.g. the previous iterate of the shape optimizer.
pub fn lambda1_with_hint(
    m: &ScalarField,
    opts: &SolveOptions,
    hint: Option<(f64, &ScalarField)>,
) -> Result<WeightedEigenResult, SolverError> {
    let class = classify(m);
    if class != HabitatClass::Intermediate {
        return Err(SolverError::NotIntermediateHabitat(class));
    }
    let mut diag = SolveDiagnostics::default();
    let mut warm: Option<ScalarField> = hint.map(|(_, u)| u.clone());

    // One μ₁ evaluation, recording diagnostics and refreshing the warm start.
    let mut eval = |lam: f64, warm: &mut Option<ScalarField>, diag: &mut SolveDiagnostics| -> Result<(f64, f64, ScalarField), SolverError> {
        let pair = mu1_with_start(m, lam, opts, warm.as_ref())?;
        // dμ/dλ = -∫ m u² for the L²-normalized eigenfunction.
        let terms: Vec<f64> = pair
            .function
            .values()
            .iter()
            .zip(m.values())
            .map(|(&uv, &mv)| mv * uv * uv)
            .collect();
        let deriv = -crate::util::pairwise_sum(&terms) * m.grid().cell_volume();
        diag.evals.push(LambdaEval {
            lambda: lam,
            mu: pair.value,
            residual: pair.residual,
            outer_iters: 0,
            cg_iters: 0,
        });
        *warm = Some(pair.function.clone());
        Ok((pair.value, deriv, pair.function))
    };

    // Bracket: μ₁(0) = 0, μ₁ > 0 on (0, λ₁), μ₁ < 0 beyond. Grow until the
    // sign flips.
    let mut lo = 0.0f64;
    let mut hi = hint.map(|(l, _)| l).filter(|l| l.is_finite() && *l > 0.0).unwrap_or(1.0);
    let mut best: Option<(f64, f64, f64, ScalarField)> = None; // (λ, μ, μ', u)
    let mut evals = 0usize;
    loop {
        let (mu, dmu, u) = eval(hi, &mut warm, &mut diag)?;
        evals += 1;
        if mu < 0.0 {
            best = Some((hi, mu, dmu, u));
            break;
        }
        lo = hi;
        hi *= 4.0;
        if hi > opts.lambda_max {
            return Err(SolverError::BracketFailure { lambda_max: opts.lambda_max });
        }
        if evals > opts.max_lambda_evals {
            return Err(SolverError::BracketFailure { lambda_max: hi });
        }
    }
    diag.bracket = Some((lo, hi));

    // Safeguarded Newton from the negative side: for the concave μ₁(λ) the
    // tangent from a point right of the root lands right of the root, so the
    // sequence decreases monotonically onto λ₁.
    let (mut lam, mut mu, mut dmu, mut u_best) = best.unwrap();
    while evals < opts.max_lambda_evals {
        let interval_done = (hi - lo) <= opts.lambda_rel_tol * hi;
        if interval_done {
            break;
        }
        let newton = if dmu < 0.0 { lam - mu / dmu } else { f64::NAN };
        let next = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        // Stop when the proposed move is below tolerance.
        if (lam - next).abs() <= opts.lambda_rel_tol * lam && mu.abs() <= 1e-3 * lam * dmu.abs() {
            break;
        }
        let (mu_n, dmu_n, u_n) = eval(next, &mut warm, &mut diag)?;
        evals += 1;
        if mu_n < 0.0 {
            hi = next;
            lam = next;
            mu = mu_n;
            dmu = dmu_n;
            u_best = u_n;
        } else {
            lo = next;
        }
        diag.bracket = Some((lo, hi));
    }

    // Renormalize to ∫ m u² = 1: positive at the root.
    let grid = m.grid().clone();
    let terms: Vec<f64> =
        u_best.values().iter().zip(m.values()).map(|(&uv, &mv)| mv * uv * uv).collect();
    let weighted = crate::util::pairwise_sum(&terms) * grid.cell_volume();
    if !(weighted > 0.0) {
        return Err(SolverError::NonConvergence { iterations: evals, residual: weighted });
    }
    let mut u = u_best;
    u.scale(1.0 / weighted.sqrt());

    // Residual of the weighted equation at the returned λ.
    let residual = weighted_residual(&u, m, lam);
    Ok(WeightedEigenResult { lambda1: lam, eigenfunction: u, weight: m.clone(), residual, diagnostics: diag })
}

/// `‖-Δu - λ m u‖₂ / (scale·‖u‖₂)` with the Gershgorin operator scale.
pub fn weighted_residual(u: &ScalarField, m: &ScalarField, lam: f64) -> f64 {
    let grid = u.grid().clone();
    let mass: Vec<f64> = m.values().iter().map(|&v| -lam * v).collect();
    let op = Stencil::new(grid, Boundary::Periodic, mass);
    let mut au = vec![0.0; u.len()];
    operator::LinOp::apply(&op, u.values(), &mut au);
    let r2: f64 = au.iter().map(|&v| v * v).sum();
    let u2 = dot(u.values(), u.values());
    (r2.sqrt() / u2.sqrt()) / op.operator_scale()
}

/// Survival threshold `d*(m) = 1/λ₁(m)`: persistence below, extinction at
/// or above.
pub fn survival_threshold(m: &ScalarField, opts: &SolveOptions) -> Result<f64, SolverError> {
    Ok(1.0 / lambda1(m, opts)?.lambda1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::PeriodicGrid;
    use approx::assert_relative_eq;
    use std::sync::Arc;

    fn bang_bang_1d(n: usize, a: f64, beta: f64) -> (Arc<PeriodicGrid>, ScalarField) {
        let g = PeriodicGrid::new(1, &[1.0], &[n]).unwrap();
        let m = ScalarField::from_fn(g.clone(), |x| if x[0].abs() < a { 1.0 } else { -beta });
        (g, m)
    }

    #[test]
    fn mu1_at_lambda_zero_is_exactly_zero() {
        let (g, m) = bang_bang_1d(64, 0.15, 1.0);
        let pair = mu1(&m, 0.0, &SolveOptions::default()).unwrap();
        assert_eq!(pair.value, 0.0);
        let expect = 1.0 / g.volume().sqrt();
        assert!(pair.function.values().iter().all(|&v| v == expect));
    }

    #[test]
    fn mu1_constant_weight_is_minus_lambda_c() {
        let g = PeriodicGrid::new(1, &[1.0], &[64]).unwrap();
        for c in [0.7, -0.4] {
            let m = ScalarField::constant(g.clone(), c);
            let pair = mu1(&m, 3.0, &SolveOptions::default()).unwrap();
            // Constant start is the exact eigenvector: residual 0, value -λc.
            assert_relative_eq!(pair.value, -3.0 * c, epsilon = 1e-12);
            assert!(pair.residual <= 1e-12);
        }
    }

    #[test]
    fn mu1_matches_dense_oracle_1d() {
        let (_, m) = bang_bang_1d(256, 0.15, 1.0);
        let lam = 20.0;
        let pair = mu1(&m, lam, &SolveOptions::default()).unwrap();
        let (mu_dense, _) = dense::dense_mu1(&m, lam, Boundary::Periodic);
        assert_relative_eq!(pair.value, mu_dense, max_relative = 1e-8);
        assert!(pair.function.min() > 0.0, "principal eigenfunction positive");
        assert_relative_eq!(pair.function.l2_norm_sq(), 1.0, max_relative = 1e-10);
    }

    #[test]
    fn mu1_positive_for_small_lambda_when_average_negative() {
        let (_, m) = bang_bang_1d(64, 0.15, 1.0);
        let pair = mu1(&m, 1e-3, &SolveOptions::default()).unwrap();
        assert!(pair.value > 0.0);
    }

    #[test]
    fn mu1_concave_in_lambda() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
        let (_, m) = bang_bang_1d(64, 0.15, 1.0);
        let opts = SolveOptions::default();
        for _ in 0..20 {
            let la = rng.gen_range(0.1..60.0);
            let lc = la + rng.gen_range(0.5..40.0);
            let lb = 0.5 * (la + lc);
            let fa = mu1(&m, la, &opts).unwrap().value;
            let fb = mu1(&m, lb, &opts).unwrap().value;
            let fc = mu1(&m, lc, &opts).unwrap().value;
            assert!(fb >= 0.5 * (fa + fc) - 1e-9, "concavity violated at ({la},{lb},{lc})");
        }
    }

    #[test]
    fn classify_trichotomy() {
        let g = PeriodicGrid::new(1, &[1.0], &[16]).unwrap();
        assert_eq!(classify(&ScalarField::constant(g.clone(), -1.0)), HabitatClass::HostileEverywhere);
        assert_eq!(classify(&ScalarField::constant(g.clone(), 1.0)), HabitatClass::FavorableOnAverage);
        let m = ScalarField::from_fn(g, |x| if x[0].abs() < 0.2 { 1.0 } else { -1.0 });
        assert_eq!(classify(&m), HabitatClass::Intermediate);
    }

    /// Transcendental matching oracle for the 1D cell problem:
    /// `√λ tan(√λ a) = √(λβ) tanh(√(λβ)(L/2 - a))`.
    pub(crate) fn lambda1_oracle_1d(l: f64, a: f64, beta: f64) -> f64 {
        let pole = (std::f64::consts::FRAC_PI_2 / a).powi(2);
        let f = |lam: f64| {
            let s = lam.sqrt();
            let sb = (lam * beta).sqrt();
            s * (s * a).tan() - sb * (sb * (l / 2.0 - a)).tanh()
        };
        crate::util::bisect(pole * 1e-10, pole * (1.0 - 1e-12), 1e-13 * pole, 300, f).unwrap()
    }

    #[test]
    fn oracle_matches_reference_value() {
        // 25-digit reference for L=1, a=0.15, β=1.
        assert_relative_eq!(lambda1_oracle_1d(1.0, 0.15, 1.0), 25.40494911545656, max_relative = 1e-12);
        assert_relative_eq!(lambda1_oracle_1d(1.0, 0.15, 2.0), 40.413360205198723, max_relative = 1e-12);
    }

    #[test]
    fn lambda1_matches_transcendental_oracle() {
        let (_, m) = bang_bang_1d(1024, 0.15, 1.0);
        let res = lambda1(&m, &SolveOptions::default()).unwrap();
        let oracle = lambda1_oracle_1d(1.0, 0.15, 1.0);
        let rel = (res.lambda1 - oracle).abs() / oracle;
        assert!(rel < 1e-2, "lambda1 {} vs oracle {oracle}, rel {rel}", res.lambda1);
        // Weighted normalization and residual contracts.
        let terms: Vec<f64> = res
            .eigenfunction
            .values()
            .iter()
            .zip(m.values())
            .map(|(&uv, &mv)| mv * uv * uv)
            .collect();
        let wnorm = crate::util::pairwise_sum(&terms) * m.grid().cell_volume();
        assert_relative_eq!(wnorm, 1.0, max_relative = 1e-9);
        assert!(res.residual <= 1e-9);
        assert!(res.eigenfunction.min() > 0.0);
    }

    #[test]
    fn lambda1_translation_invariant() {
        let (g, m) = bang_bang_1d(512, 0.15, 1.0);
        let opts = SolveOptions::default();
        let l0 = lambda1(&m, &opts).unwrap().lambda1;
        let mt = ScalarField::from_values(g, m.shifted([137, 0, 0]).values().to_vec()).unwrap();
        let l1 = lambda1(&mt, &opts).unwrap().lambda1;
        assert_relative_eq!(l0, l1, max_relative = 1e-10);
    }

    #[test]
    fn lambda1_invariant_under_start_scaling() {
        let (_, m) = bang_bang_1d(256, 0.15, 1.0);
        let opts = SolveOptions::default();
        let base = lambda1(&m, &opts).unwrap();
        let mut scaled = base.eigenfunction.clone();
        scaled.scale(2.0);
        let warm = lambda1_with_hint(&m, &opts, Some((base.lambda1, &scaled))).unwrap();
        assert_relative_eq!(base.lambda1, warm.lambda1, max_relative = 1e-10);
    }

    #[test]
    fn lambda1_rejects_wrong_class() {
        let g = PeriodicGrid::new(1, &[1.0], &[32]).unwrap();
        let hostile = ScalarField::constant(g.clone(), -1.0);
        assert!(matches!(
            lambda1(&hostile, &SolveOptions::default()),
            Err(SolverError::NotIntermediateHabitat(HabitatClass::HostileEverywhere))
        ));
        let favorable = ScalarField::constant(g, 0.5);
        assert!(matches!(
            lambda1(&favorable, &SolveOptions::default()),
            Err(SolverError::NotIntermediateHabitat(HabitatClass::FavorableOnAverage))
        ));
    }

    #[test]
    fn rayleigh_consistency() {
        let (g, m) = bang_bang_1d(256, 0.15, 1.0);
        let res = lambda1(&m, &SolveOptions::default()).unwrap();
        let (num, den) = rayleigh(&res.eigenfunction, &m);
        assert_relative_eq!(num / den, res.lambda1, max_relative = 1e-8);
        // Constant field: zero energy, c²∫m.
        let c = ScalarField::constant(g, 2.0);
        let (num, den) = rayleigh(&c, &m);
        assert_eq!(num, 0.0);
        assert_relative_eq!(den, 4.0 * m.integrate(), max_relative = 1e-12);
    }

    #[test]
    fn survival_threshold_is_reciprocal() {
        let (_, m) = bang_bang_1d(256, 0.15, 1.0);
        let opts = SolveOptions::default();
        let l = lambda1(&m, &opts).unwrap().lambda1;
        let d = survival_threshold(&m, &opts).unwrap();
        assert_relative_eq!(d, 1.0 / l, max_relative = 1e-12);
    }

    #[test]
    fn lambda1_monotone_under_weight_improvement() {
        // Nested favorable sets: m ≤ m' pointwise ⇒ λ₁(m) ≥ λ₁(m').
        let opts = SolveOptions::default();
        let (_, m_small) = bang_bang_1d(256, 0.10, 1.0);
        let (_, m_big) = bang_bang_1d(256, 0.18, 1.0);
        let ls = lambda1(&m_small, &opts).unwrap().lambda1;
        let lb = lambda1(&m_big, &opts).unwrap().lambda1;
        assert!(ls > lb);
    }
}
