use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Uniform periodic grid `x_j = x_min + j dx`, `j = 0..n`, with `dx = (x_max - x_min) / n`.
///
/// The right endpoint is identified with the left one and is not a node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpatialGrid {
    x_min: f64,
    x_max: f64,
    n: usize,
}

impl SpatialGrid {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite()) || x_max <= x_min {
            return Err(LabError::contract(format!(
                "grid needs finite x_min < x_max, got [{x_min}, {x_max}]"
            )));
        }
        if n < 16 || !n.is_power_of_two() {
            return Err(LabError::contract(format!(
                "grid node count must be a power of two >= 16, got {n}"
            )));
        }
        Ok(Self { x_min, x_max, n })
    }

    /// Box `[-half_width, half_width]`.
    pub fn symmetric(half_width: f64, n: usize) -> Result<Self> {
        Self::new(-half_width, half_width, n)
    }

    /// The default box `[-100, 100]` with 4096 nodes.
    pub fn default_box() -> Self {
        Self {
            x_min: -100.0,
            x_max: 100.0,
            n: 4096,
        }
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn dx(&self) -> f64 {
        self.length() / self.n as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x_min + j as f64 * self.dx()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.x(j)).collect()
    }

    /// Index of the node `-x_j` on a symmetric box.
    pub fn mirror(&self, j: usize) -> usize {
        (self.n - j) % self.n
    }

    pub fn is_symmetric(&self) -> bool {
        (self.x_min + self.x_max).abs() <= 1e-12 * self.length()
    }

    /// Index of the node nearest to `x` (clamped to the box).
    pub fn nearest(&self, x: f64) -> usize {
        let j = ((x - self.x_min) / self.dx()).round();
        j.clamp(0.0, (self.n - 1) as f64) as usize
    }

    pub fn wavenumbers(&self) -> WavenumberGrid {
        WavenumberGrid::new(*self)
    }
}

/// Fourier-dual wavenumbers in FFT ordering: `0, dk, .., (n/2-1) dk, -n/2 dk, .., -dk`.
#[derive(Debug, Clone, PartialEq)]
pub struct WavenumberGrid {
    grid: SpatialGrid,
    k: Vec<f64>,
}

impl WavenumberGrid {
    pub fn new(grid: SpatialGrid) -> Self {
        let n = grid.n();
        let dk = 2.0 * PI / grid.length();
        let k = (0..n)
            .map(|j| {
                let m = if j < n / 2 {
                    j as f64
                } else {
                    j as f64 - n as f64
                };
                m * dk
            })
            .collect();
        Self { grid, k }
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.k
    }

    pub fn dk(&self) -> f64 {
        2.0 * PI / self.grid.length()
    }

    /// Index of the Nyquist mode `-n/2 dk`.
    pub fn nyquist(&self) -> usize {
        self.grid.n() / 2
    }

    pub fn k_max(&self) -> f64 {
        self.dk() * (self.grid.n() / 2) as f64
    }
}
