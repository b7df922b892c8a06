use num_complex::Complex64;

use super::jost::{JostProfile, JostSolution};
use crate::error::{LabError, Result};
use crate::potentials::Potential;

type C = Complex64;

/// Wronskian and scattering coefficients on a set of real wavenumbers.
///
/// `T = 2ik / W`; `R1` and `R2` are the connection coefficients of
/// `f2(k) = (R1/T) f1(k) + (1/T) f1(-k)` and `f1(k) = (R2/T) f2(k) + (1/T) f2(-k)`.
#[derive(Debug, Clone, Default)]
pub struct ScatteringData {
    pub k: Vec<f64>,
    pub w: Vec<C>,
    pub t: Vec<C>,
    pub r1: Vec<C>,
    pub r2: Vec<C>,
    /// Indices whose `T`, `R1`, `R2` are undefined (the pole at `k = 0`); stored as NaN.
    pub excluded: Vec<usize>,
}

impl ScatteringData {
    /// `max |(|T|^2 + |R1|^2) - 1|` over the defined entries.
    pub fn unitarity_defect(&self) -> f64 {
        (0..self.k.len())
            .filter(|i| !self.excluded.contains(i))
            .map(|i| (self.t[i].norm_sqr() + self.r1[i].norm_sqr() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// `e^{-2ikx}(m2' m1(-k) - m2 m1(-k)')`, the m-form of `[f2(k), f1(-k)]`.
fn bracket_r1(p: &JostProfile, q: &JostProfile, x: f64) -> C {
    let (m2, dm2) = p.m2(x);
    let (n1, dn1) = q.m1(x);
    (C::new(0.0, -2.0) * p.k() * x).exp() * (dm2 * n1 - m2 * dn1)
}

/// `e^{2ikx}(m2(-k)' m1 - m2(-k) m1')`, the m-form of `[f2(-k), f1(k)]`.
fn bracket_r2(p: &JostProfile, q: &JostProfile, x: f64) -> C {
    let (m1, dm1) = p.m1(x);
    let (n2, dn2) = q.m2(x);
    (C::new(0.0, 2.0) * p.k() * x).exp() * (dn2 * m1 - n2 * dm1)
}

/// Scattering data for every real `k >= 0` in `js` (whose `-k` partner must be present).
pub fn scattering_coefficients(js: &JostSolution) -> Result<ScatteringData> {
    let mut sd = ScatteringData::default();
    let nan = C::new(f64::NAN, f64::NAN);
    for p in js.profiles() {
        let k = p.k();
        if k.im != 0.0 || k.re < 0.0 {
            continue;
        }
        let w = p.wronskian()?.value;
        let idx = sd.k.len();
        sd.k.push(k.re);
        sd.w.push(w);
        if k.re == 0.0 {
            sd.t.push(nan);
            sd.r1.push(nan);
            sd.r2.push(nan);
            sd.excluded.push(idx);
            continue;
        }
        let q = js.find(-k).ok_or_else(|| {
            LabError::contract(format!(
                "scattering coefficients need the pair k = +-{}",
                k.re
            ))
        })?;
        let two_ik = C::new(0.0, 2.0) * k;
        let t = two_ik / w;
        // average the brackets over the probe points for robustness
        let xs = p.probe_points(5);
        let b1 = xs.iter().map(|&x| bracket_r1(p, q, x)).sum::<C>() / xs.len() as f64;
        let b2 = xs.iter().map(|&x| bracket_r2(p, q, x)).sum::<C>() / xs.len() as f64;
        sd.t.push(t);
        sd.r1.push(t * b1 / two_ik);
        sd.r2.push(t * b2 / two_ik);
    }
    Ok(sd)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonresonanceReport {
    pub w0: C,
    pub resonant: bool,
}

/// Relative threshold on `|W(0)| / ||V||_{L^1}` below which zero energy counts as resonant.
pub const RESONANCE_THRESHOLD: f64 = 1e-6;

/// Zero-energy test: resonant iff `|W(0)| <= 1e-6 ||V||_{L^1}` (so `V = 0` is resonant).
pub fn check_nonresonance(potential: &Potential) -> Result<NonresonanceReport> {
    let p = JostProfile::solve(potential, C::new(0.0, 0.0))?;
    let w0 = p.wronskian_estimate().value;
    let resonant = w0.norm() <= RESONANCE_THRESHOLD * potential.l1_norm();
    Ok(NonresonanceReport { w0, resonant })
}
