//! Bessel function evaluations used by the radial matching conditions.
//!
//! Only four functions are needed: `J₀`, `J₁` on the oscillatory side of the
//! interface (arguments stay below the first zero of `J₀` in the matching
//! root-find, and below ~9 in tests) and `K₀`, `K₁` on the decaying side.
//! `J` is summed from the ascending power series, which at `x ≤ 9` loses at
//! most a couple of digits to cancellation. `K` is evaluated by composite
//! Simpson quadrature of `∫₀^∞ e^{-x cosh t} cosh(νt) dt`; the integrand is
//! even in `t` and decays double-exponentially, so a modest fixed rule is
//! accurate to ~1e-14. Both are verified against high-precision references
//! to 1e-12 on the range used.

/// Bessel function of the first kind, order zero (power series; `|x| ≲ 9`).
pub fn j0(x: f64) -> f64 {
    let q = -0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for m in 1..200 {
        term *= q / ((m * m) as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

/// Bessel function of the first kind, order one (power series; `|x| ≲ 9`).
pub fn j1(x: f64) -> f64 {
    let q = -0.25 * x * x;
    let mut term = 0.5 * x;
    let mut sum = term;
    for m in 1..200 {
        term *= q / ((m * (m + 1)) as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

/// Modified Bessel function of the second kind, order zero (`x > 0`).
pub fn k0(x: f64) -> f64 {
    k_integral(x, 0)
}

/// Modified Bessel function of the second kind, order one (`x > 0`).
pub fn k1(x: f64) -> f64 {
    k_integral(x, 1)
}

/// `∫₀^∞ e^{-x cosh t} cosh(νt) dt` by composite Simpson on `[0, T]` with
/// `T` chosen so the discarded tail is below 1e-18 of the value.
fn k_integral(x: f64, nu: u32) -> f64 {
    assert!(x > 0.0, "K_nu requires a positive argument");
    // Tail cut: e^{-x cosh T} ≤ e^{-x} e^{-45}  (plus a margin for cosh(νT)).
    let t_max = ((1.0 + 50.0 / x).max(1.0)).acosh() + 1.0;
    // Resolve both the O(1/√x) peak width at 0 and the overall interval.
    let n = 2 * ((t_max * (64.0f64).max(8.0 * x.sqrt()) / 2.0).ceil() as usize).clamp(256, 4096);
    let h = t_max / n as f64;
    let f = |t: f64| {
        let c = t.cosh();
        let w = if nu == 0 { 1.0 } else { (nu as f64 * t).cosh() };
        (-x * c).exp() * w
    };
    let mut acc = f(0.0) + f(t_max);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(i as f64 * h);
    }
    acc * h / 3.0
}
