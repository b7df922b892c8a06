use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::{ComplexField, SpatialGrid};
use crate::error::{LabError, Result};

fn planner() -> &'static Mutex<FftPlanner<f64>> {
    static PLANNER: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();
    PLANNER.get_or_init(|| Mutex::new(FftPlanner::new()))
}

/// FFT plans and wavenumbers for one grid. Cheap to clone; plans are shared.
#[derive(Clone)]
pub struct Fourier {
    grid: SpatialGrid,
    k: Arc<[f64]>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fourier {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fourier").field("grid", &self.grid).finish()
    }
}

impl Fourier {
    pub fn new(grid: &SpatialGrid) -> Self {
        let (fwd, inv) = {
            let mut p = planner().lock().unwrap_or_else(|e| e.into_inner());
            (p.plan_fft_forward(grid.n()), p.plan_fft_inverse(grid.n()))
        };
        let k: Arc<[f64]> = grid.wavenumbers().values().to_vec().into();
        Self {
            grid: *grid,
            k,
            fwd,
            inv,
        }
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    /// Wavenumbers in FFT order.
    pub fn k(&self) -> &[f64] {
        &self.k
    }

    /// Unnormalized forward DFT.
    pub fn forward(&self, buf: &mut [Complex64]) {
        self.fwd.process(buf);
    }

    /// Inverse DFT including the `1/n` factor.
    pub fn inverse(&self, buf: &mut [Complex64]) {
        self.inv.process(buf);
        let s = 1.0 / self.grid.n() as f64;
        buf.iter_mut().for_each(|z| *z *= s);
    }

    /// Apply a precomputed Fourier multiplier (FFT-ordered weights) in place.
    pub fn apply_weights(&self, buf: &mut [Complex64], weights: &[Complex64]) {
        self.forward(buf);
        buf.iter_mut().zip(weights).for_each(|(z, w)| *z *= w);
        self.inverse(buf);
    }

    /// Apply the multiplier `m(k)` to samples and return the result.
    pub fn apply_multiplier(
        &self,
        values: &[Complex64],
        m: impl Fn(f64) -> Complex64,
    ) -> Vec<Complex64> {
        let mut buf = values.to_vec();
        self.forward(&mut buf);
        buf.iter_mut()
            .zip(self.k.iter())
            .for_each(|(z, &k)| *z *= m(k));
        self.inverse(&mut buf);
        buf
    }

    /// Weights of `(ik)^order`; the Nyquist mode is dropped for odd orders.
    pub fn derivative_weights(&self, order: u32) -> Vec<Complex64> {
        let nyq = self.grid.n() / 2;
        self.k
            .iter()
            .enumerate()
            .map(|(j, &k)| {
                if order % 2 == 1 && j == nyq {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(0.0, k).powu(order)
                }
            })
            .collect()
    }

    pub fn derivative(&self, values: &[Complex64], order: u32) -> Vec<Complex64> {
        let w = self.derivative_weights(order);
        let mut buf = values.to_vec();
        self.apply_weights(&mut buf, &w);
        buf
    }

    /// Samples of the unitary transform `(2 pi)^{-1/2} int f(x) e^{-ikx} dx` at the grid wavenumbers.
    pub fn transform(&self, f: &[Complex64]) -> Vec<Complex64> {
        let mut buf = f.to_vec();
        self.forward(&mut buf);
        let c = self.grid.dx() / (2.0 * PI).sqrt();
        let x0 = self.grid.x_min();
        buf.iter_mut()
            .zip(self.k.iter())
            .for_each(|(z, &k)| *z *= Complex64::from_polar(c, -k * x0));
        buf
    }

    /// Fraction of spectral energy carried by `|k| > 0.8 k_max`; large values mean the
    /// samples are under-resolved or not periodic-compatible.
    pub fn spectral_tail(&self, values: &[Complex64]) -> f64 {
        let mut buf = values.to_vec();
        self.forward(&mut buf);
        let kcut = 0.8 * self.grid.wavenumbers().k_max();
        let (mut tail, mut total) = (0.0, 0.0);
        for (z, &k) in buf.iter().zip(self.k.iter()) {
            let e = z.norm_sqr();
            total += e;
            if k.abs() > kcut {
                tail += e;
            }
        }
        if total == 0.0 {
            0.0
        } else {
            tail / total
        }
    }
}

/// Spectral derivative together with its resolution metadata.
#[derive(Debug, Clone)]
pub struct Derivative {
    pub field: ComplexField,
    /// Set when the input is not periodic-compatible (significant energy near the Nyquist band).
    pub boundary_warning: bool,
}

/// Threshold on [`Fourier::spectral_tail`] above which a derivative is flagged.
pub const TAIL_WARNING: f64 = 1e-20;

/// Apply the Fourier multiplier `(ik)^order`, `order` in {1, 2}.
pub fn spectral_derivative(f: &ComplexField, order: u32) -> Result<Derivative> {
    if !(order == 1 || order == 2) {
        return Err(LabError::contract(format!(
            "derivative order must be 1 or 2, got {order}"
        )));
    }
    let fourier = Fourier::new(f.grid());
    let values = fourier.derivative(f.values(), order);
    let boundary_warning = fourier.spectral_tail(f.values()) > TAIL_WARNING;
    Ok(Derivative {
        field: ComplexField::from_parts(*f.grid(), values),
        boundary_warning,
    })
}
