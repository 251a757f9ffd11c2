//! Real-valued grid functions.

use super::{GridError, PeriodicGrid, MAX_DIMS};
use crate::util::{dot, pairwise_sum};
use std::sync::Arc;

/// A real value per grid node, stored flat with the last axis fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Arc<PeriodicGrid>,
    values: Vec<f64>,
}

impl ScalarField {
    /// Wrap raw values, checking length and finiteness.
    pub fn from_values(grid: Arc<PeriodicGrid>, values: Vec<f64>) -> Result<Self, GridError> {
        if values.len() != grid.node_count() {
            return Err(GridError::LengthMismatch { expected: grid.node_count(), got: values.len() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(GridError::NonFiniteValue);
        }
        Ok(ScalarField { grid, values })
    }

    /// Sample a function of the node coordinates.
    pub fn from_fn(grid: Arc<PeriodicGrid>, mut f: impl FnMut(&[f64]) -> f64) -> Self {
        let values = (0..grid.node_count())
            .map(|j| {
                let x = grid.node_coords(j);
                f(&x[..grid.dims()])
            })
            .collect();
        ScalarField { grid, values }
    }

    pub fn constant(grid: Arc<PeriodicGrid>, c: f64) -> Self {
        let n = grid.node_count();
        ScalarField { grid, values: vec![c; n] }
    }

    pub(crate) fn from_raw(grid: Arc<PeriodicGrid>, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.node_count());
        ScalarField { grid, values }
    }

    pub fn grid(&self) -> &Arc<PeriodicGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Quadrature of the field over the cell: `Σ f(x)·∏hᵢ`. Under
    /// periodicity the midpoint and trapezoid rules coincide with this sum.
    pub fn integrate(&self) -> f64 {
        pairwise_sum(&self.values) * self.grid.cell_volume()
    }

    /// `∫ f g` over the cell.
    pub fn inner(&self, other: &Self) -> Result<f64, GridError> {
        if !self.grid.same_as(&other.grid) {
            return Err(GridError::GridMismatch);
        }
        Ok(dot(&self.values, &other.values) * self.grid.cell_volume())
    }

    /// `∫ f²`.
    pub fn l2_norm_sq(&self) -> f64 {
        dot(&self.values, &self.values) * self.grid.cell_volume()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |a, v| a.max(v.abs()))
    }

    pub fn scale(&mut self, c: f64) {
        for v in &mut self.values {
            *v *= c;
        }
    }

    /// Second-order centered Laplacian with periodic wrap:
    /// `(Δf)ⱼ = Σᵢ (f(j+eᵢ) - 2f(j) + f(j-eᵢ))/hᵢ²`.
    pub fn laplacian(&self) -> Self {
        let g = &self.grid;
        let dims = g.dims();
        let shape = g.shape();
        let strides = g.strides();
        let mut out = vec![0.0; self.values.len()];
        for axis in 0..dims {
            let n = shape[axis];
            let stride = strides[axis];
            let inv_h2 = 1.0 / (g.spacing(axis) * g.spacing(axis));
            // Iterate lines along `axis`: indices j = base + k*stride.
            let line_count = self.values.len() / n;
            for line in 0..line_count {
                let base = line_base(line, axis, &shape, &strides, dims);
                for k in 0..n {
                    let j = base + k * stride;
                    let jp = base + ((k + 1) % n) * stride;
                    let jm = base + ((k + n - 1) % n) * stride;
                    out[j] += (self.values[jp] - 2.0 * self.values[j] + self.values[jm]) * inv_h2;
                }
            }
        }
        ScalarField { grid: self.grid.clone(), values: out }
    }

    /// Discrete Dirichlet energy `∫ |∇f|²`, computed as the sum of squared
    /// forward differences weighted by the cell volume. Equals `⟨-Δf, f⟩·∏hᵢ`
    /// exactly by summation by parts under periodicity, and is nonnegative.
    pub fn dirichlet_energy(&self) -> f64 {
        let g = &self.grid;
        let dims = g.dims();
        let shape = g.shape();
        let strides = g.strides();
        let cell = g.cell_volume();
        let mut terms = Vec::with_capacity(dims * self.values.len());
        for axis in 0..dims {
            let n = shape[axis];
            let stride = strides[axis];
            let inv_h = 1.0 / g.spacing(axis);
            let line_count = self.values.len() / n;
            for line in 0..line_count {
                let base = line_base(line, axis, &shape, &strides, dims);
                for k in 0..n {
                    let j = base + k * stride;
                    let jp = base + ((k + 1) % n) * stride;
                    let d = (self.values[jp] - self.values[j]) * inv_h;
                    terms.push(d * d);
                }
            }
        }
        pairwise_sum(&terms) * cell
    }

    /// Circular shift: `out(k) = self(k + s)` with per-axis integer shifts.
    pub fn shifted(&self, s: [i64; MAX_DIMS]) -> Self {
        let g = &self.grid;
        let dims = g.dims();
        let mut out = vec![0.0; self.values.len()];
        for (j, slot) in out.iter_mut().enumerate() {
            let mut k = g.unflat(j);
            for axis in 0..dims {
                k[axis] = g.wrap(axis, k[axis], s[axis] as isize);
            }
            *slot = self.values[g.flat(k)];
        }
        ScalarField { grid: self.grid.clone(), values: out }
    }

    /// Flat index of the maximal node, ties broken by the lexicographically
    /// smallest index (guaranteed by the scan order and strict comparison).
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        let mut bv = self.values[0];
        for (j, &v) in self.values.iter().enumerate().skip(1) {
            if v > bv {
                bv = v;
                best = j;
            }
        }
        best
    }

    /// Shift the field so its maximal node lands on the origin node.
    ///
    /// Returns the shifted field and the applied shift `s`, meaning
    /// `out(k) = self(k + s)`. A constant field degenerates to shifting the
    /// lexicographically smallest node onto the origin.
    pub fn recenter(&self) -> (Self, [i64; MAX_DIMS]) {
        let g = &self.grid;
        let a = g.unflat(self.argmax());
        let o = g.origin();
        let mut s = [0i64; MAX_DIMS];
        for axis in 0..g.dims() {
            s[axis] = a[axis] as i64 - o[axis] as i64;
        }
        (self.shifted(s), s)
    }

    /// Pointwise map.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        ScalarField { grid: self.grid.clone(), values: self.values.iter().map(|&v| f(v)).collect() }
    }
}

/// Flat index of the first node of the `line`-th line along `axis`.
///
/// Lines enumerate all index combinations of the other axes in row-major
/// order; the stride layout makes this a mixed-radix decode.
pub(crate) fn line_base(
    line: usize,
    axis: usize,
    shape: &[usize; MAX_DIMS],
    strides: &[usize; MAX_DIMS],
    dims: usize,
) -> usize {
    let mut rem = line;
    let mut base = 0;
    for a in (0..dims).rev() {
        if a == axis {
            continue;
        }
        let k = rem % shape[a];
        rem /= shape[a];
        base += k * strides[a];
    }
    base
}
