//! Fast-transform preconditioners: exact inverses of `-Δ + τ` on the same
//! grid, diagonalized by FFT (periodic) or DST-I (zero-boundary box).
//!
//! Used inside CG for the variable-coefficient operators `-Δ - λm - σ`; the
//! constant `τ` is matched to the dominant mass so the preconditioned
//! spectrum clusters independently of the resolution.

use super::cg::Precond;
use super::operator::Boundary;
use crate::grid::{line_base, PeriodicGrid, MAX_DIMS};
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

pub struct SpectralPrecond {
    dims: usize,
    shape: [usize; MAX_DIMS],
    strides: [usize; MAX_DIMS],
    boundary: Boundary,
    /// `Σ_axes` 1-D stencil symbols per node (τ-independent part).
    symbol: Vec<f64>,
    pub tau: f64,
    fw: Vec<Arc<dyn Fft<f64>>>,
    inv: Vec<Arc<dyn Fft<f64>>>,
    buf: Vec<Complex<f64>>,
    line: Vec<Complex<f64>>,
    scratch: Vec<Complex<f64>>,
    real: Vec<f64>,
}

impl SpectralPrecond {
    pub fn new(grid: &Arc<PeriodicGrid>, boundary: Boundary) -> Self {
        let dims = grid.dims();
        let shape = grid.shape();
        let strides = grid.strides();
        let total = grid.node_count();
        let mut planner = FftPlanner::new();
        let mut fw = Vec::new();
        let mut inv = Vec::new();
        let mut axis_sym: Vec<Vec<f64>> = Vec::new();
        let mut max_line = 0usize;
        for axis in 0..dims {
            let n = shape[axis];
            let h = grid.spacing(axis);
            match boundary {
                Boundary::Periodic => {
                    fw.push(planner.plan_fft_forward(n));
                    inv.push(planner.plan_fft_inverse(n));
                    max_line = max_line.max(n);
                    axis_sym.push(
                        (0..n)
                            .map(|k| {
                                (2.0 - 2.0 * (2.0 * std::f64::consts::PI * k as f64 / n as f64).cos())
                                    / (h * h)
                            })
                            .collect(),
                    );
                }
                Boundary::DirichletBox => {
                    let ext = 2 * (n + 1);
                    fw.push(planner.plan_fft_forward(ext));
                    inv.push(planner.plan_fft_forward(ext)); // DST-I is self-inverse up to scale
                    max_line = max_line.max(ext);
                    axis_sym.push(
                        (0..n)
                            .map(|k| {
                                (2.0 - 2.0
                                    * (std::f64::consts::PI * (k + 1) as f64 / (n + 1) as f64).cos())
                                    / (h * h)
                            })
                            .collect(),
                    );
                }
            }
        }
        // Full per-node symbol Σ_a sym_a(k_a).
        let mut symbol = vec![0.0; total];
        for (j, s) in symbol.iter_mut().enumerate() {
            let mut rem = j;
            let mut acc = 0.0;
            for axis in 0..dims {
                let k = rem / strides[axis];
                rem %= strides[axis];
                acc += axis_sym[axis][k];
            }
            *s = acc;
        }
        let scratch_len = fw.iter().map(|p| p.get_inplace_scratch_len()).max().unwrap_or(0);
        SpectralPrecond {
            dims,
            shape,
            strides,
            boundary,
            symbol,
            tau: 1.0,
            fw,
            inv,
            buf: vec![Complex::new(0.0, 0.0); total],
            line: vec![Complex::new(0.0, 0.0); max_line],
            scratch: vec![Complex::new(0.0, 0.0); scratch_len],
            real: vec![0.0; total],
        }
    }

    fn transform_axis_periodic(&mut self, axis: usize, forward: bool) {
        let n = self.shape[axis];
        let stride = self.strides[axis];
        let total = self.buf.len();
        let lines = total / n;
        let plan = if forward { self.fw[axis].clone() } else { self.inv[axis].clone() };
        for l in 0..lines {
            let base = line_base(l, axis, &self.shape, &self.strides, self.dims);
            for k in 0..n {
                self.line[k] = self.buf[base + k * stride];
            }
            plan.process_with_scratch(&mut self.line[..n], &mut self.scratch);
            for k in 0..n {
                self.buf[base + k * stride] = self.line[k];
            }
        }
    }

    /// DST-I along `axis` on the real buffer, unnormalized
    /// (`dst ∘ dst = (n+1)/2 · id`).
    fn transform_axis_dst(&mut self, axis: usize) {
        let n = self.shape[axis];
        let ext = 2 * (n + 1);
        let stride = self.strides[axis];
        let total = self.real.len();
        let lines = total / n;
        let plan = self.fw[axis].clone();
        for l in 0..lines {
            let base = line_base(l, axis, &self.shape, &self.strides, self.dims);
            self.line[0] = Complex::new(0.0, 0.0);
            self.line[n + 1] = Complex::new(0.0, 0.0);
            for k in 0..n {
                let v = self.real[base + k * stride];
                self.line[k + 1] = Complex::new(v, 0.0);
                self.line[ext - 1 - k] = Complex::new(-v, 0.0);
            }
            plan.process_with_scratch(&mut self.line[..ext], &mut self.scratch);
            for k in 0..n {
                // Y[k+1] = -2i · s_{k+1}
                self.real[base + k * stride] = -0.5 * self.line[k + 1].im;
            }
        }
    }
}

impl Precond for SpectralPrecond {
    fn solve(&mut self, r: &[f64], z: &mut [f64]) {
        match self.boundary {
            Boundary::Periodic => {
                for (b, &v) in self.buf.iter_mut().zip(r) {
                    *b = Complex::new(v, 0.0);
                }
                for axis in 0..self.dims {
                    self.transform_axis_periodic(axis, true);
                }
                let tau = self.tau;
                for (b, &s) in self.buf.iter_mut().zip(&self.symbol) {
                    *b *= 1.0 / (s + tau);
                }
                for axis in 0..self.dims {
                    self.transform_axis_periodic(axis, false);
                }
                let scale = 1.0 / self.shape[..self.dims].iter().product::<usize>() as f64;
                for (out, b) in z.iter_mut().zip(&self.buf) {
                    *out = b.re * scale;
                }
            }
            Boundary::DirichletBox => {
                self.real.copy_from_slice(r);
                for axis in 0..self.dims {
                    self.transform_axis_dst(axis);
                }
                let tau = self.tau;
                for (v, &s) in self.real.iter_mut().zip(&self.symbol) {
                    *v /= s + tau;
                }
                for axis in 0..self.dims {
                    self.transform_axis_dst(axis);
                }
                let mut scale = 1.0;
                for axis in 0..self.dims {
                    scale *= 2.0 / (self.shape[axis] + 1) as f64;
                }
                for (out, &v) in z.iter_mut().zip(&self.real) {
                    *out = v * scale;
                }
            }
        }
    }
}
