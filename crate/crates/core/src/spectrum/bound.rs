use num_complex::Complex64;

use crate::error::{LabError, Result};
use crate::field::{norm, ComplexField, Fourier, NormKind, SpatialGrid};
use crate::numerics::bisect;
use crate::potentials::Potential;
use crate::scattering::JostProfile;

type C = Complex64;

/// A negative eigenvalue `E = -kappa^2` of `L` with its normalized real eigenfunction.
#[derive(Debug, Clone)]
pub struct BoundState {
    pub e_star: f64,
    pub kappa_star: f64,
    /// Unit `L^2` norm, positive at its largest-modulus node.
    pub phi_star: ComplexField,
    /// `||L phi - E phi||_{L^2}` measured with spectral derivatives on the grid.
    pub residual: f64,
}

impl BoundState {
    /// Real samples of the eigenfunction.
    pub fn phi_real(&self) -> Vec<f64> {
        self.phi_star.re()
    }
}

fn wronskian_imag_axis(potential: &Potential, kappa: f64) -> Result<f64> {
    let p = JostProfile::solve(potential, C::new(0.0, kappa))?;
    Ok(p.wronskian_estimate().value.re)
}

/// Eigenfunction on the grid from `f1(., i kappa)` for `x >= 0` and a matched multiple of
/// `f2(., i kappa)` for `x < 0`.
fn assemble(potential: &Potential, kappa: f64, grid: &SpatialGrid) -> Result<ComplexField> {
    let p = JostProfile::solve(potential, C::new(0.0, kappa))?;
    let (a, da) = p.f1(0.0);
    let (b, db) = p.f2(0.0);
    let c = (a * b + da * db).re / (b * b + db * db).re;
    let vals: Vec<f64> = grid
        .nodes()
        .into_iter()
        .map(|x| {
            if x >= 0.0 {
                p.f1(x).0.re
            } else {
                c * p.f2(x).0.re
            }
        })
        .collect();
    let f = ComplexField::from_real(*grid, &vals)?;
    let nrm = norm(&f, NormKind::L2);
    if nrm == 0.0 || !nrm.is_finite() {
        return Err(LabError::solver(
            "eigenfunction assembly produced a null profile",
            format!("kappa = {kappa}"),
        ));
    }
    let mut f = f.scale_real(1.0 / nrm);
    let jmax = (0..grid.n())
        .max_by(|&i, &j| f.values()[i].norm().total_cmp(&f.values()[j].norm()))
        .expect("non-empty grid");
    if f.values()[jmax].re < 0.0 {
        f = f.scale_real(-1.0);
    }
    let edge = 5.min(grid.n() / 2);
    let vmax = f.max_abs();
    let vals = f.values();
    let edge_max = vals[..edge]
        .iter()
        .chain(&vals[grid.n() - edge..])
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    if edge_max > 1e-6 * vmax {
        return Err(LabError::contract(format!(
            "grid [{}, {}] is too small for the eigenfunction with kappa = {kappa}",
            grid.x_min(),
            grid.x_max()
        )));
    }
    Ok(f)
}

fn residual(potential: &Potential, e: f64, phi: &ComplexField) -> f64 {
    let fourier = Fourier::new(phi.grid());
    let d2 = fourier.derivative(phi.values(), 2);
    let grid = phi.grid();
    let s: f64 = (0..grid.n())
        .map(|j| {
            let lphi = -d2[j] + potential.eval(grid.x(j)) * phi.values()[j];
            (lphi - e * phi.values()[j]).norm_sqr()
        })
        .sum();
    (s * grid.dx()).sqrt()
}

/// All negative eigenvalues, located as zeros of `kappa -> W(i kappa)` on `(0, sqrt(sup|V|) + 1]`.
pub fn find_bound_states(potential: &Potential, grid: &SpatialGrid) -> Result<Vec<BoundState>> {
    potential.weighted_moment(grid, 2)?;
    if potential.is_zero() {
        return Ok(Vec::new());
    }
    let kappa_max = potential.sup_abs().sqrt() + 1.0;
    let scan = 200;
    let mut roots = Vec::new();
    let mut prev_k = kappa_max / scan as f64;
    let mut prev_w = wronskian_imag_axis(potential, prev_k)?;
    for i in 2..=scan {
        let k = kappa_max * i as f64 / scan as f64;
        let w = wronskian_imag_axis(potential, k)?;
        if w == 0.0 {
            roots.push(k);
        } else if prev_w != 0.0 && w.signum() != prev_w.signum() {
            let mut err = None;
            let root = bisect(
                |kk| match wronskian_imag_axis(potential, kk) {
                    Ok(v) => v,
                    Err(e) => {
                        err.get_or_insert(e);
                        0.0
                    }
                },
                prev_k,
                k,
                1e-14,
            )?;
            if let Some(e) = err {
                return Err(e);
            }
            roots.push(root);
        }
        prev_k = k;
        prev_w = w;
    }
    // deepest first
    roots.sort_by(|a, b| b.total_cmp(a));
    roots
        .into_iter()
        .map(|kappa| {
            let phi = assemble(potential, kappa, grid)?;
            let e = -kappa * kappa;
            let residual = residual(potential, e, &phi);
            Ok(BoundState {
                e_star: e,
                kappa_star: kappa,
                phi_star: phi,
                residual,
            })
        })
        .collect()
}

/// The unique bound state required by the stability theory; zero or several eigenvalues,
/// or a zero-energy resonance, are hypothesis violations.
pub fn ground_state(potential: &Potential, grid: &SpatialGrid) -> Result<BoundState> {
    let mut states = find_bound_states(potential, grid)?;
    if states.len() != 1 {
        return Err(LabError::Hypothesis(format!(
            "expected exactly one negative eigenvalue, found {}",
            states.len()
        )));
    }
    let nr = crate::scattering::check_nonresonance(potential)?;
    if nr.resonant {
        return Err(LabError::Hypothesis(format!(
            "zero is a resonance (|W(0)| = {:.3e})",
            nr.w0.norm()
        )));
    }
    Ok(states.remove(0))
}
