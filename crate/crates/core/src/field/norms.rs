use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{ComplexField, Fourier};
use crate::error::Result;

/// Japanese bracket `<x> = sqrt(1 + x^2)`.
pub fn bracket(x: f64) -> f64 {
    (1.0 + x * x).sqrt()
}

/// `int f conj(g) dx` by the periodic trapezoid rule.
pub fn inner_product(f: &ComplexField, g: &ComplexField) -> Result<Complex64> {
    f.check_same_grid(g)?;
    let s: Complex64 = f
        .values()
        .iter()
        .zip(g.values())
        .map(|(a, b)| a * b.conj())
        .sum();
    Ok(s * f.grid().dx())
}

/// `int a b dx` for real sample vectors.
pub fn real_inner(a: &[f64], b: &[f64], dx: f64) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() * dx
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum NormKind {
    L2,
    Linf,
    L1,
    H1,
    /// Fourier multiplier `(1 + k^2)^{1/4}`.
    HHalf,
    /// Weighted `H^{1,k}`: `(sum_{i=0,1} int (1+x^2)^k |d^i f|^2)^{1/2}`.
    H1k(f64),
}

pub fn norm(f: &ComplexField, kind: NormKind) -> f64 {
    let dx = f.grid().dx();
    let v = f.values();
    match kind {
        NormKind::L2 => (v.iter().map(|z| z.norm_sqr()).sum::<f64>() * dx).sqrt(),
        NormKind::Linf => f.max_abs(),
        NormKind::L1 => v.iter().map(|z| z.norm()).sum::<f64>() * dx,
        NormKind::H1 => norm(f, NormKind::H1k(0.0)),
        NormKind::HHalf => {
            let fourier = Fourier::new(f.grid());
            let mut buf = v.to_vec();
            fourier.forward(&mut buf);
            let s: f64 = buf
                .iter()
                .zip(fourier.k())
                .map(|(z, &k)| (1.0 + k * k).sqrt() * z.norm_sqr())
                .sum();
            (s * dx / f.grid().n() as f64).sqrt()
        }
        NormKind::H1k(k) => {
            let fourier = Fourier::new(f.grid());
            let d = fourier.derivative(v, 1);
            let grid = f.grid();
            let s: f64 = v
                .iter()
                .zip(&d)
                .enumerate()
                .map(|(j, (a, b))| {
                    let x = grid.x(j);
                    let w = if k == 0.0 { 1.0 } else { (1.0 + x * x).powf(k) };
                    w * (a.norm_sqr() + b.norm_sqr())
                })
                .sum();
            (s * dx).sqrt()
        }
    }
}
