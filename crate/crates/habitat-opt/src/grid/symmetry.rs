//! Exact reflection-symmetry utilities.
//!
//! The reflection group is generated by `xᵢ ↦ -xᵢ` per axis; on the grid
//! these are exact index permutations (`k ↦ (n-k) mod n`). Nodes fall into
//! orbits of size up to `2^dims`; the fixed nodes per axis are `k = 0`
//! (the seam `±L/2`) and `k = n/2` (the origin). Everything here works with
//! whole orbits so that symmetry statements hold bit-for-bit, not just to
//! rounding.

use super::{IndicatorSet, PeriodicGrid, ScalarField, MAX_DIMS};
use std::sync::Arc;

/// Orbit members of a representative multi-index, in a fixed enumeration
/// order. Representatives have `kᵢ ≤ nᵢ/2` on every axis.
fn orbit_members(grid: &PeriodicGrid, rep: [usize; MAX_DIMS], out: &mut Vec<usize>) {
    out.clear();
    let dims = grid.dims();
    let mut stack = [[0usize; MAX_DIMS]; 8];
    stack[0] = rep;
    let mut len = 1;
    for axis in 0..dims {
        let k = rep[axis];
        let r = grid.reflect(axis, k);
        if r != k {
            for i in 0..len {
                let mut m = stack[i];
                m[axis] = r;
                stack[len + i] = m;
            }
            len *= 2;
        }
    }
    for m in stack.iter().take(len) {
        out.push(grid.flat(*m));
    }
}

/// Visit every reflection orbit: `f(rep_flat, members)` where `members`
/// lists the flat indices of the orbit (representative first).
pub fn for_each_orbit(grid: &PeriodicGrid, mut f: impl FnMut(usize, &[usize])) {
    let dims = grid.dims();
    let shape = grid.shape();
    let mut rep = [0usize; MAX_DIMS];
    let mut members = Vec::with_capacity(8);
    // Iterate the representative box 0..=n/2 per axis.
    let mut counts = [1usize; MAX_DIMS];
    for axis in 0..dims {
        counts[axis] = shape[axis] / 2 + 1;
    }
    let total: usize = counts[..dims].iter().product();
    for lin in 0..total {
        let mut rem = lin;
        for axis in (0..dims).rev() {
            rep[axis] = rem % counts[axis];
            rem /= counts[axis];
        }
        orbit_members(grid, rep, &mut members);
        f(grid.flat(rep), &members);
    }
}

/// Project a field onto exactly even symmetry: each orbit gets the mean of
/// its values, computed once per orbit and assigned to every member, so the
/// result satisfies `f(x) = f(-xᵢ…)` bit-for-bit.
pub fn evened(f: &ScalarField) -> ScalarField {
    let grid = f.grid().clone();
    let vals = f.values();
    let mut out = vec![0.0; vals.len()];
    for_each_orbit(&grid, |_, members| {
        let mut s = 0.0;
        for &j in members {
            s += vals[j];
        }
        let mean = s / members.len() as f64;
        for &j in members {
            out[j] = mean;
        }
    });
    ScalarField::from_raw(grid, out)
}

/// Exact (bitwise) evenness check under every single-axis reflection.
pub fn is_even(f: &ScalarField) -> bool {
    let grid = f.grid();
    let vals = f.values();
    for j in 0..vals.len() {
        let k = grid.unflat(j);
        for axis in 0..grid.dims() {
            let mut kr = k;
            kr[axis] = grid.reflect(axis, k[axis]);
            if vals[grid.flat(kr)].to_bits() != vals[j].to_bits() {
                return false;
            }
        }
    }
    true
}

/// Superlevel selection by whole reflection orbits.
///
/// Sorts orbits by their (shared) value, descending, ties by representative
/// index, and includes whole orbits while the running count is below
/// `target`. The result is exactly reflection-symmetric and its count `K`
/// satisfies `target ≤ K < target + 2^dims`. Returns the mask, the value of
/// the last included orbit (the level), and `K`.
///
/// The field must be exactly even (see [`evened`]); orbit members then share
/// one value by construction.
pub fn orbit_superlevel(f: &ScalarField, target: usize) -> (IndicatorSet, f64, usize) {
    select_orbits_by(f, target, |v| v)
}

/// Exactly symmetric centered ball: selects orbits by increasing node
/// radius until `target` nodes are covered.
pub fn centered_ball(grid: &Arc<PeriodicGrid>, target: usize) -> IndicatorSet {
    let score = ScalarField::from_fn(grid.clone(), |x| {
        -(x.iter().map(|&xi| xi * xi).sum::<f64>())
    });
    let (set, _, _) = select_orbits_by(&score, target, |v| v);
    set
}

fn select_orbits_by(f: &ScalarField, target: usize, key: impl Fn(f64) -> f64) -> (IndicatorSet, f64, usize) {
    let grid = f.grid().clone();
    let vals = f.values();
    let mut orbits: Vec<(f64, usize, u8)> = Vec::new();
    for_each_orbit(&grid, |rep, members| {
        orbits.push((key(vals[rep]), rep, members.len() as u8));
    });
    orbits.sort_unstable_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
    let mut mask = vec![false; vals.len()];
    let mut selected = 0usize;
    let mut level = f64::NEG_INFINITY;
    let mut members = Vec::with_capacity(8);
    for (v, rep, _) in &orbits {
        if selected >= target {
            break;
        }
        orbit_members(&grid, grid.unflat(*rep), &mut members);
        for &j in &members {
            mask[j] = true;
        }
        selected += members.len();
        level = *v;
    }
    let set = IndicatorSet::from_mask(grid, mask).expect("mask length matches grid");
    (set, level, selected)
}

/// Rayleigh quotient pieces of the quarter cell `[0, L/2]^dims` under the
/// discrete trapezoid quadrature that halves the weight on the reflection
/// planes (`xᵢ = 0` and `xᵢ = ±L/2`).
///
/// For exactly even `u` and a reflection-symmetric weight, both returned
/// sums equal one `2^dims`-th of their full-cell counterparts exactly (up
/// to summation order), because each reflection orbit meets the closed
/// quarter cell in nodes whose weights add to `orbit size / 2^dims`.
pub fn quarter_cell_rayleigh(u: &ScalarField, m: &ScalarField) -> (f64, f64) {
    let grid = u.grid();
    let dims = grid.dims();
    let shape = grid.shape();
    let strides = grid.strides();
    let uv = u.values();
    let mv = m.values();
    let cell = grid.cell_volume();

    // Quadrant node enumeration: kᵢ ∈ {n/2..n-1} ∪ {0}, with weight 1/2 at
    // the plane indices {0, n/2}.
    let axis_nodes: Vec<Vec<(usize, f64)>> = (0..dims)
        .map(|a| {
            let n = shape[a];
            let mut v: Vec<(usize, f64)> = Vec::with_capacity(n / 2 + 1);
            for k in n / 2..n {
                let w = if k == n / 2 { 0.5 } else { 1.0 };
                v.push((k, w));
            }
            v.push((0, 0.5)); // seam node represents x = L/2
            v
        })
        .collect();

    // Denominator: Σ w(k) m u² · cellvol over quadrant nodes.
    let mut den_terms = Vec::new();
    visit_product(&axis_nodes, dims, &mut |ks, w| {
        let mut k = [0usize; MAX_DIMS];
        k[..dims].copy_from_slice(&ks[..dims]);
        let j = grid.flat(k);
        den_terms.push(w * mv[j] * uv[j] * uv[j]);
    });
    let den = crate::util::pairwise_sum(&den_terms) * cell;

    // Numerator: for each axis, links with longitudinal index in n/2..n-1
    // (midpoints inside (0, L/2)), transverse nodes as above.
    let mut num_terms = Vec::new();
    for axis in 0..dims {
        let n = shape[axis];
        let stride = strides[axis];
        let inv_h = 1.0 / grid.spacing(axis);
        let transverse: Vec<&Vec<(usize, f64)>> =
            (0..dims).filter(|&a| a != axis).map(|a| &axis_nodes[a]).collect();
        let t_axes: Vec<usize> = (0..dims).filter(|&a| a != axis).collect();
        let mut recurse = |ks: &[usize], w: f64| {
            let mut k = [0usize; MAX_DIMS];
            for (i, &a) in t_axes.iter().enumerate() {
                k[a] = ks[i];
            }
            for klong in n / 2..n {
                k[axis] = klong;
                let j = grid.flat(k);
                let jp = if klong + 1 == n { j - klong * stride } else { j + stride };
                let d = (uv[jp] - uv[j]) * inv_h;
                num_terms.push(w * d * d);
            }
        };
        if transverse.is_empty() {
            recurse(&[], 1.0);
        } else {
            let owned: Vec<Vec<(usize, f64)>> = transverse.into_iter().cloned().collect();
            visit_product(&owned, dims - 1, &mut |ks, w| recurse(ks, w));
        }
    }
    let num = crate::util::pairwise_sum(&num_terms) * cell;
    (num, den)
}

/// Visit the cartesian product of per-axis `(index, weight)` lists, calling
/// `f(indices, weight_product)`.
fn visit_product(axes: &[Vec<(usize, f64)>], dims: usize, f: &mut impl FnMut(&[usize], f64)) {
    let mut ks = [0usize; MAX_DIMS];
    fn rec(
        axes: &[Vec<(usize, f64)>],
        depth: usize,
        dims: usize,
        ks: &mut [usize; MAX_DIMS],
        w: f64,
        f: &mut impl FnMut(&[usize], f64),
    ) {
        if depth == dims {
            f(&ks[..dims], w);
            return;
        }
        for &(k, wk) in &axes[depth] {
            ks[depth] = k;
            rec(axes, depth + 1, dims, ks, w * wk, f);
        }
    }
    rec(axes, 0, dims, &mut ks, 1.0, f);
}
