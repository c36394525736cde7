//! Grids, sampled fields and μ-measure quadrature.

pub mod csv;
mod fields;
pub mod spectral;

use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

use crate::beta_arith::BetaContext;

pub use fields::{analyze, lattice_of, seminorm, synth, synth_grid, LatticeField, TorusField, Wavefunction};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SamplingError {
    #[error("grid size must be odd and at least 3, got {0}")]
    BadGridSize(usize),
    #[error("expected {expected} samples, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("fields live on different grids or contexts")]
    GridMismatch,
    #[error("q offsets {0} and {1} do not differ by a lattice step")]
    OffsetMismatch(f64, f64),
}

/// Uniform half-offset grid on [−π/2, π/2): g_j = −π/2 + π(j + ½)/n.
///
/// Only odd n is accepted. Then g_j = π(j − h)/n with h = (n−1)/2, so the
/// grid contains 0, is symmetric, and is closed under differences mod π.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AngleGrid {
    n: usize,
}

impl AngleGrid {
    pub fn new(n: usize) -> Result<Self, SamplingError> {
        if n < 3 || n.is_multiple_of(2) {
            return Err(SamplingError::BadGridSize(n));
        }
        Ok(Self { n })
    }

    /// Smallest admissible grid with at least `n` nodes.
    pub fn at_least(n: usize) -> Self {
        let n = n.max(3);
        Self { n: if n.is_multiple_of(2) { n + 1 } else { n } }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half(&self) -> usize {
        (self.n - 1) / 2
    }

    pub fn spacing(&self) -> f64 {
        PI / self.n as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        PI * (j as f64 - self.half() as f64) / self.n as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.node(j)).collect()
    }

    /// Index of the node at angle 0.
    pub fn zero(&self) -> usize {
        self.half()
    }

    /// Index of canon(g_i − g_j).
    pub fn sub(&self, i: usize, j: usize) -> usize {
        (i + self.n + self.half() - j) % self.n
    }

    /// Index of canon(g_i + g_j).
    pub fn add(&self, i: usize, j: usize) -> usize {
        (i + j + self.n - self.half()) % self.n
    }

    /// Index of −g_i.
    pub fn neg(&self, i: usize) -> usize {
        self.n - 1 - i
    }
}

/// ∫ f dμ over the circle: (1/√β)(π/n) Σ_j f(g_j).
pub fn quad_mu(ctx: &BetaContext, grid: &AngleGrid, samples: &[Complex64]) -> Result<Complex64, SamplingError> {
    if samples.len() != grid.n() {
        return Err(SamplingError::LengthMismatch { expected: grid.n(), got: samples.len() });
    }
    let s: Complex64 = samples.iter().sum();
    Ok(s * (grid.spacing() / ctx.sqrt_beta()))
}

/// True when two q offsets select the same lattice sector.
pub(crate) fn same_sector(ctx: &BetaContext, a: f64, b: f64) -> bool {
    let r = (a - b) / ctx.q_lattice_step();
    (r - r.round()).abs() < 1e-9
}
