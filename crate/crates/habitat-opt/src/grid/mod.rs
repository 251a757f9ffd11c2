//! Periodic rectangular grids and the fields that live on them.
//!
//! The period cell is the box `∏ᵢ (-Lᵢ/2, Lᵢ/2)` discretized with `nᵢ`
//! equally spaced nodes per axis, `hᵢ = Lᵢ/nᵢ`. Node `kᵢ` sits at
//! `(kᵢ - nᵢ/2)·hᵢ`, so the origin is always a node and, because every `nᵢ`
//! is even, the reflection `xᵢ ↦ -xᵢ` is an exact permutation of the node
//! set. Index arithmetic wraps modulo `nᵢ` on every axis.
//!
//! Three types share this module: [`PeriodicGrid`] (the discretization
//! itself), [`ScalarField`] (one real value per node) and [`IndicatorSet`]
//! (a boolean mask per node with exact discrete volume). All operations are
//! pure: they take immutable snapshots and return fresh values, so distinct
//! inputs can be processed concurrently without coordination.

mod field;
mod indicator;
pub mod symmetry;

pub(crate) use field::line_base;
pub use field::ScalarField;
pub use indicator::IndicatorSet;

use serde::{Deserialize, Serialize};
use std::sync::Arc;
use thiserror::Error;

/// Maximum supported number of spatial dimensions.
pub const MAX_DIMS: usize = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("dims must be 1, 2 or 3, got {0}")]
    BadDims(usize),
    #[error("axis {axis}: points_per_axis must be even so the origin is a node, got {n}")]
    OddResolution { axis: usize, n: usize },
    #[error("axis {axis}: points_per_axis must be at least 8, got {n}")]
    TooCoarse { axis: usize, n: usize },
    #[error("axis {axis}: cell length must be positive and finite, got {len}")]
    NonPositiveLength { axis: usize, len: f64 },
    #[error("expected {expected} per-axis values, got {got}")]
    AxisCountMismatch { expected: usize, got: usize },
    #[error("field length {got} does not match grid node count {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("field values must be finite")]
    NonFiniteValue,
    #[error("fields live on different grids")]
    GridMismatch,
}

/// Discretized period cell `𝒞 = ∏ (-Lᵢ/2, Lᵢ/2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicGrid {
    dims: usize,
    n: [usize; MAX_DIMS],
    lengths: [f64; MAX_DIMS],
    h: [f64; MAX_DIMS],
}

impl PeriodicGrid {
    /// Build a grid for `dims` axes with per-axis cell lengths and node
    /// counts. Node counts must be even (the origin must be a node) and at
    /// least 8; lengths must be positive.
    pub fn new(dims: usize, lengths: &[f64], points_per_axis: &[usize]) -> Result<Arc<Self>, GridError> {
        if !(1..=MAX_DIMS).contains(&dims) {
            return Err(GridError::BadDims(dims));
        }
        if lengths.len() != dims {
            return Err(GridError::AxisCountMismatch { expected: dims, got: lengths.len() });
        }
        if points_per_axis.len() != dims {
            return Err(GridError::AxisCountMismatch { expected: dims, got: points_per_axis.len() });
        }
        let mut n = [1usize; MAX_DIMS];
        let mut l = [1.0f64; MAX_DIMS];
        let mut h = [1.0f64; MAX_DIMS];
        for axis in 0..dims {
            let ni = points_per_axis[axis];
            let li = lengths[axis];
            if !(li.is_finite() && li > 0.0) {
                return Err(GridError::NonPositiveLength { axis, len: li });
            }
            if ni % 2 != 0 {
                return Err(GridError::OddResolution { axis, n: ni });
            }
            if ni < 8 {
                return Err(GridError::TooCoarse { axis, n: ni });
            }
            n[axis] = ni;
            l[axis] = li;
            h[axis] = li / ni as f64;
        }
        Ok(Arc::new(PeriodicGrid { dims, n, lengths: l, h }))
    }

    /// Uniform cube helper: same length and resolution on every axis.
    pub fn cube(dims: usize, length: f64, points: usize) -> Result<Arc<Self>, GridError> {
        let lengths = vec![length; dims];
        let n = vec![points; dims];
        Self::new(dims, &lengths, &n)
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    /// Nodes along `axis`.
    pub fn points(&self, axis: usize) -> usize {
        self.n[axis]
    }

    /// Cell length along `axis`.
    pub fn length(&self, axis: usize) -> f64 {
        self.lengths[axis]
    }

    /// Grid spacing along `axis`.
    pub fn spacing(&self, axis: usize) -> f64 {
        self.h[axis]
    }

    pub fn max_spacing(&self) -> f64 {
        self.h[..self.dims].iter().cloned().fold(0.0, f64::max)
    }

    /// Per-axis node counts, padded with 1 beyond `dims`.
    pub fn shape(&self) -> [usize; MAX_DIMS] {
        self.n
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths[..self.dims]
    }

    pub fn points_per_axis(&self) -> Vec<usize> {
        self.n[..self.dims].to_vec()
    }

    /// Total number of nodes `∏ nᵢ`.
    pub fn node_count(&self) -> usize {
        self.n[..self.dims].iter().product()
    }

    /// Volume of one grid cell `∏ hᵢ`.
    pub fn cell_volume(&self) -> f64 {
        self.h[..self.dims].iter().product()
    }

    /// Total cell volume `|𝒞| = ∏ Lᵢ`.
    pub fn volume(&self) -> f64 {
        self.lengths[..self.dims].iter().product()
    }

    /// Row-major strides, last axis fastest.
    pub fn strides(&self) -> [usize; MAX_DIMS] {
        let mut s = [1usize; MAX_DIMS];
        for axis in (0..self.dims.saturating_sub(1)).rev() {
            s[axis] = s[axis + 1] * self.n[axis + 1];
        }
        s
    }

    /// Flat index of the multi-index `k`.
    pub fn flat(&self, k: [usize; MAX_DIMS]) -> usize {
        let s = self.strides();
        let mut idx = 0;
        for axis in 0..self.dims {
            idx += k[axis] * s[axis];
        }
        idx
    }

    /// Multi-index of flat index `j`.
    pub fn unflat(&self, mut j: usize) -> [usize; MAX_DIMS] {
        let s = self.strides();
        let mut k = [0usize; MAX_DIMS];
        for axis in 0..self.dims {
            k[axis] = j / s[axis];
            j %= s[axis];
        }
        k
    }

    /// Coordinate of node `k` along `axis`: `(k - n/2)·h`.
    pub fn coord(&self, axis: usize, k: usize) -> f64 {
        (k as f64 - (self.n[axis] / 2) as f64) * self.h[axis]
    }

    /// Coordinates of the node at flat index `j`, padded with 0.
    pub fn node_coords(&self, j: usize) -> [f64; MAX_DIMS] {
        let k = self.unflat(j);
        let mut x = [0.0; MAX_DIMS];
        for axis in 0..self.dims {
            x[axis] = self.coord(axis, k[axis]);
        }
        x
    }

    /// Squared distance of node `j` from the origin.
    pub fn radius2(&self, j: usize) -> f64 {
        let x = self.node_coords(j);
        x[..self.dims].iter().map(|&xi| xi * xi).sum()
    }

    /// Multi-index of the origin node `(0,…,0)`.
    pub fn origin(&self) -> [usize; MAX_DIMS] {
        let mut k = [0usize; MAX_DIMS];
        for axis in 0..self.dims {
            k[axis] = self.n[axis] / 2;
        }
        k
    }

    /// Reflected index along `axis`: `k ↦ (n - k) mod n`, the exact grid
    /// action of `xᵢ ↦ -xᵢ`.
    pub fn reflect(&self, axis: usize, k: usize) -> usize {
        let n = self.n[axis];
        (n - k) % n
    }

    /// Wrapped index `k + d mod n` along `axis`.
    pub fn wrap(&self, axis: usize, k: usize, d: isize) -> usize {
        let n = self.n[axis] as isize;
        let mut v = (k as isize + d) % n;
        if v < 0 {
            v += n;
        }
        v as usize
    }

    /// True if `other` describes the same discretization.
    pub fn same_as(&self, other: &Self) -> bool {
        self == other
    }

    /// Rescale every axis by `factor` (lengths and spacings; node layout
    /// unchanged). Used by the blow-up, which relabels coordinates only.
    pub fn rescaled(&self, factor: f64) -> Arc<Self> {
        let mut g = self.clone();
        for axis in 0..self.dims {
            g.lengths[axis] *= factor;
            g.h[axis] *= factor;
        }
        Arc::new(g)
    }
}
