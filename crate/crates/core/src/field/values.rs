use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use super::SpatialGrid;
use crate::error::{LabError, Result};

/// Complex samples of a function on a [`SpatialGrid`], one per node.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    grid: SpatialGrid,
    values: Vec<Complex64>,
}

impl ComplexField {
    pub fn new(grid: SpatialGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(LabError::contract(format!(
                "field has {} values but the grid has {} nodes",
                values.len(),
                grid.n()
            )));
        }
        if let Some(j) = values
            .iter()
            .position(|z| !(z.re.is_finite() && z.im.is_finite()))
        {
            return Err(LabError::contract(format!(
                "non-finite field value at node {j}"
            )));
        }
        Ok(Self { grid, values })
    }

    /// Build without the finiteness scan; used on hot paths whose inputs are already checked.
    pub(crate) fn from_parts(grid: SpatialGrid, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), grid.n());
        Self { grid, values }
    }

    pub fn zeros(grid: SpatialGrid) -> Self {
        Self {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.n()],
        }
    }

    pub fn from_fn(grid: SpatialGrid, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        Self::new(grid, grid.nodes().into_iter().map(f).collect())
    }

    pub fn from_real_fn(grid: SpatialGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    pub fn from_real(grid: SpatialGrid, values: &[f64]) -> Result<Self> {
        Self::new(
            grid,
            values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        )
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn re(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.re).collect()
    }

    pub fn im(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.im).collect()
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self::from_parts(self.grid, self.values.iter().map(|&z| f(z)).collect())
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map(|z| z * c)
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.map(|z| z * c)
    }

    pub fn check_same_grid(&self, other: &ComplexField) -> Result<()> {
        if self.grid != other.grid {
            return Err(LabError::contract("fields live on different grids"));
        }
        Ok(())
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: Complex64, other: &ComplexField) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(Self::from_parts(
            self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + c * b)
                .collect(),
        ))
    }

    /// Largest modulus among the values.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest imaginary part in modulus (zero for real-valued fields).
    pub fn max_abs_im(&self) -> f64 {
        self.values.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }
}

impl Add for &ComplexField {
    type Output = ComplexField;

    /// Panics if the grids differ; use [`ComplexField::axpy`] for a checked sum.
    fn add(self, rhs: &ComplexField) -> ComplexField {
        assert_eq!(self.grid, rhs.grid, "fields live on different grids");
        ComplexField::from_parts(
            self.grid,
            self.values
                .iter()
                .zip(&rhs.values)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }
}

impl Sub for &ComplexField {
    type Output = ComplexField;

    /// Panics if the grids differ.
    fn sub(self, rhs: &ComplexField) -> ComplexField {
        assert_eq!(self.grid, rhs.grid, "fields live on different grids");
        ComplexField::from_parts(
            self.grid,
            self.values
                .iter()
                .zip(&rhs.values)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }
}

impl Mul<Complex64> for &ComplexField {
    type Output = ComplexField;

    fn mul(self, rhs: Complex64) -> ComplexField {
        self.scale(rhs)
    }
}

impl Mul<f64> for &ComplexField {
    type Output = ComplexField;

    fn mul(self, rhs: f64) -> ComplexField {
        self.scale_real(rhs)
    }
}
