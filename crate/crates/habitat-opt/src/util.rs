//! Small numeric helpers shared across the crate.

/// Pairwise (cascade) summation. Error grows like `O(log n)` in the number
/// of terms instead of `O(n)` for a running sum, which keeps quadrature and
/// inner products honest on multi-million-node grids.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const BASE: usize = 64;
    if xs.len() <= BASE {
        let mut acc = 0.0;
        for &x in xs {
            acc += x;
        }
        return acc;
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Pairwise-accumulated dot product.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    const BASE: usize = 64;
    fn rec(a: &[f64], b: &[f64]) -> f64 {
        if a.len() <= BASE {
            let mut acc = 0.0;
            for (x, y) in a.iter().zip(b) {
                acc += x * y;
            }
            return acc;
        }
        let mid = a.len() / 2;
        rec(&a[..mid], &b[..mid]) + rec(&a[mid..], &b[mid..])
    }
    rec(a, b)
}

/// Euclidean norm via pairwise accumulation.
pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Ordinary least squares fit `y ≈ intercept + slope * x`.
///
/// Returns `(slope, intercept, r_squared)`. With fewer than two distinct
/// abscissae the fit is degenerate and `r_squared` is 0.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    if x.len() < 2 {
        return (0.0, y.first().copied().unwrap_or(0.0), 0.0);
    }
    let xm = pairwise_sum(x) / n;
    let ym = pairwise_sum(y) / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        sxx += (xi - xm) * (xi - xm);
        sxy += (xi - xm) * (yi - ym);
        syy += (yi - ym) * (yi - ym);
    }
    if sxx == 0.0 {
        return (0.0, ym, 0.0);
    }
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, intercept, r2)
}

/// Bisection root finder on a bracketing interval.
///
/// `f(lo)` and `f(hi)` must have opposite signs. Iterates until the interval
/// is below `xtol` (absolute) or `max_iter` bisections have run, and returns
/// the midpoint of the final bracket.
pub fn bisect(mut lo: f64, mut hi: f64, xtol: f64, max_iter: usize, f: impl Fn(f64) -> f64) -> Option<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    if flo.signum() == fhi.signum() {
        return None;
    }
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return Some(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        if (hi - lo).abs() <= xtol {
            break;
        }
    }
    Some(0.5 * (lo + hi))
}
