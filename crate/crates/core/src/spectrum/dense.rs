use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{LabError, Result};
use crate::field::{ComplexField, Fourier, SpatialGrid};
use crate::potentials::Potential;

/// Largest grid accepted by the dense eigen-expansion backend.
pub const EIGEN_BACKEND_MAX_N: usize = 2048;

/// Dense matrix of `L = -D2 + V` on the grid, where `D2` is the Fourier-spectral second
/// derivative (real symmetric, Nyquist mode included).
pub fn dense_operator(grid: &SpatialGrid, potential: &Potential) -> DMatrix<f64> {
    let n = grid.n();
    let fourier = Fourier::new(grid);
    let w = fourier.derivative_weights(2);
    let mut m = DMatrix::<f64>::zeros(n, n);
    let mut e = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..n {
        e.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        e[j] = Complex64::new(1.0, 0.0);
        fourier.apply_weights(&mut e, &w);
        for i in 0..n {
            m[(i, j)] = -e[i].re;
        }
        m[(j, j)] += potential.eval(grid.x(j));
    }
    // remove roundoff asymmetry
    let t = m.transpose();
    (m + t) * 0.5
}

/// Full eigendecomposition of the discretized operator.
#[derive(Debug, Clone)]
pub struct DenseSpectrum {
    grid: SpatialGrid,
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Orthonormal (Euclidean) eigenvectors as columns, same order as `values`.
    pub vectors: DMatrix<f64>,
}

impl DenseSpectrum {
    pub fn new(grid: &SpatialGrid, potential: &Potential) -> Result<Self> {
        if grid.n() > EIGEN_BACKEND_MAX_N {
            return Err(LabError::contract(format!(
                "dense eigen backend limited to n <= {EIGEN_BACKEND_MAX_N}, got {}",
                grid.n()
            )));
        }
        let eig = SymmetricEigen::new(dense_operator(grid, potential));
        let mut order: Vec<usize> = (0..grid.n()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = DMatrix::from_fn(grid.n(), grid.n(), |r, c| eig.eigenvectors[(r, order[c])]);
        Ok(Self {
            grid: *grid,
            values,
            vectors,
        })
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    /// Eigenvector `i` as an `L^2`-normalized field (positive at its largest node).
    pub fn mode(&self, i: usize) -> ComplexField {
        let s = 1.0 / self.grid.dx().sqrt();
        let col = self.vectors.column(i);
        let jmax = col.iamax();
        let sign = if col[jmax] < 0.0 { -1.0 } else { 1.0 };
        let vals = col
            .iter()
            .map(|&v| Complex64::new(sign * s * v, 0.0))
            .collect();
        ComplexField::new(self.grid, vals).expect("finite eigenvector")
    }

    /// `exp(-i t L) f` by the eigen-expansion.
    pub fn propagate(&self, f: &ComplexField, t: f64) -> Result<ComplexField> {
        if f.grid() != &self.grid {
            return Err(LabError::contract("field and spectrum grids differ"));
        }
        let re = DVector::from_vec(f.re());
        let im = DVector::from_vec(f.im());
        let cr = self.vectors.tr_mul(&re);
        let ci = self.vectors.tr_mul(&im);
        let (mut ar, mut ai) = (cr.clone(), ci.clone());
        for j in 0..self.values.len() {
            let (s, c) = (-self.values[j] * t).sin_cos();
            ar[j] = c * cr[j] - s * ci[j];
            ai[j] = s * cr[j] + c * ci[j];
        }
        let outr = &self.vectors * ar;
        let outi = &self.vectors * ai;
        let vals = outr
            .iter()
            .zip(outi.iter())
            .map(|(&r, &i)| Complex64::new(r, i))
            .collect();
        Ok(ComplexField::from_parts(self.grid, vals))
    }
}
