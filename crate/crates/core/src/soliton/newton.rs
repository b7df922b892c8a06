use num_complex::Complex64;

use super::NonlinearityParams;
use crate::error::{LabError, Result};
use crate::field::{ComplexField, Fourier, SpatialGrid};
use crate::numerics::{gmres, GmresOptions};
use crate::potentials::Potential;

type C = Complex64;

#[derive(Debug, Clone, Copy)]
pub struct NewtonOptions {
    /// Stop once `||F(phi)||_{L^2}` is below this.
    pub tol: f64,
    pub max_iter: usize,
    /// Relative GMRES tolerance for each correction.
    pub linear_tol: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: 1e-11,
            max_iter: 25,
            linear_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NewtonSolution {
    pub phi: ComplexField,
    pub iterations: usize,
    /// Final `||phi'' + E phi - V phi - f(phi)||_{L^2}`.
    pub residual: f64,
}

/// The map `F(phi) = phi'' + E phi - V phi - alpha |phi|^(p-1) phi` on real grid functions.
#[derive(Debug, Clone)]
pub(crate) struct BvpOperator {
    grid: SpatialGrid,
    fourier: Fourier,
    v: Vec<f64>,
    e: f64,
    params: NonlinearityParams,
    even: bool,
}

impl BvpOperator {
    pub(crate) fn new(
        potential: &Potential,
        grid: &SpatialGrid,
        e: f64,
        params: NonlinearityParams,
    ) -> Self {
        let v = potential.sample_real(grid);
        let even = grid.is_symmetric()
            && (0..grid.n())
                .all(|j| (v[j] - v[grid.mirror(j)]).abs() <= 1e-14 * (1.0 + v[j].abs()));
        Self {
            grid: *grid,
            fourier: Fourier::new(grid),
            v,
            e,
            params,
            even,
        }
    }

    pub(crate) fn set_energy(&mut self, e: f64) {
        self.e = e;
    }

    fn second_derivative(&self, u: &[f64]) -> Vec<f64> {
        let buf: Vec<C> = u.iter().map(|&x| C::new(x, 0.0)).collect();
        self.fourier
            .derivative(&buf, 2)
            .into_iter()
            .map(|z| z.re)
            .collect()
    }

    pub(crate) fn residual(&self, phi: &[f64]) -> Vec<f64> {
        let d2 = self.second_derivative(phi);
        (0..phi.len())
            .map(|j| d2[j] + (self.e - self.v[j]) * phi[j] - self.params.f_real(phi[j]))
            .collect()
    }

    /// Potential of the linearization, `E - V - p alpha |phi|^(p-1)`.
    fn linear_coefficient(&self, phi: &[f64]) -> Vec<f64> {
        let p = self.params.p;
        (0..phi.len())
            .map(|j| self.e - self.v[j] - p * self.params.alpha * phi[j].abs().powf(p - 1.0))
            .collect()
    }

    /// Solve `J(phi) x = b` with `J = d^2 + E - V - p alpha |phi|^(p-1)`.
    pub(crate) fn solve_linearized(
        &self,
        phi: &[f64],
        b: &[f64],
        rel_tol: f64,
        accept_rel: f64,
    ) -> Result<Vec<f64>> {
        let c = self.linear_coefficient(phi);
        let e = self.e;
        let k = self.fourier.k().to_vec();
        let apply_a = |x: &[f64]| {
            let d2 = self.second_derivative(x);
            d2.iter()
                .zip(x)
                .zip(&c)
                .map(|((d, xi), ci)| d + ci * xi)
                .collect::<Vec<f64>>()
        };
        let m0_inv = |x: &[f64]| {
            let mut buf: Vec<C> = x.iter().map(|&v| C::new(v, 0.0)).collect();
            self.fourier.forward(&mut buf);
            for (z, kk) in buf.iter_mut().zip(&k) {
                *z /= e - kk * kk;
            }
            self.fourier.inverse(&mut buf);
            buf.into_iter().map(|z| z.re).collect::<Vec<f64>>()
        };
        let opts = GmresOptions {
            rel_tol,
            abs_tol: 0.0,
            restart: 80,
            max_iter: 2000,
            accept_rel,
        };
        let zn = phi.iter().map(|x| x * x).sum::<f64>().sqrt();
        if zn == 0.0 {
            return Ok(gmres(apply_a, m0_inv, b, None, &opts)?.x);
        }
        // Near the bifurcation J is almost singular along phi itself. Solve on the
        // complement of z = phi/|phi|, where J is well conditioned, and recover the
        // z-component from the 1x1 Schur complement.
        let z: Vec<f64> = phi.iter().map(|x| x / zn).collect();
        let dotz = |x: &[f64]| z.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        let proj = |mut x: Vec<f64>| {
            let c = dotz(&x);
            x.iter_mut().zip(&z).for_each(|(xi, zi)| *xi -= c * zi);
            x
        };
        let apply_p = |x: &[f64]| proj(apply_a(&proj(x.to_vec())));
        let m_p = |x: &[f64]| proj(m0_inv(&proj(x.to_vec())));
        let jz = apply_a(&z);
        // the floors refer to the unprojected vectors so round-off-sized projections are not chased
        let l2 = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let opts_b = GmresOptions {
            abs_tol: rel_tol * l2(b),
            ..opts
        };
        let y1 = proj(gmres(apply_p, m_p, &proj(b.to_vec()), None, &opts_b)?.x);
        let pjz = proj(jz.clone());
        let opts_z = GmresOptions {
            abs_tol: rel_tol * l2(&jz),
            ..opts
        };
        let y2 = proj(gmres(apply_p, m_p, &pjz, None, &opts_z)?.x);
        let schur = dotz(&jz) - dotz(&apply_a(&y2));
        if schur == 0.0 || !schur.is_finite() {
            return Err(LabError::solver(
                "linearized operator is singular",
                format!("E = {}", self.e),
            ));
        }
        let a = (dotz(b) - dotz(&apply_a(&y1))) / schur;
        Ok((0..z.len()).map(|j| a * z[j] + y1[j] - a * y2[j]).collect())
    }

    pub(crate) fn norm(&self, u: &[f64]) -> f64 {
        (u.iter().map(|x| x * x).sum::<f64>() * self.grid.dx()).sqrt()
    }

    pub(crate) fn symmetrize(&self, u: &mut [f64]) {
        if !self.even {
            return;
        }
        let n = u.len();
        let sym: Vec<f64> = (0..n)
            .map(|j| 0.5 * (u[j] + u[self.grid.mirror(j)]))
            .collect();
        u.copy_from_slice(&sym);
    }

    /// `d phi / dE` and `d^2 phi / dE^2` along the branch through `phi`.
    pub(crate) fn tangents(&self, phi: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let rhs: Vec<f64> = phi.iter().map(|x| -x).collect();
        let mut d1 = self.solve_linearized(phi, &rhs, 1e-12, 1e-8)?;
        self.symmetrize(&mut d1);
        let (p, a) = (self.params.p, self.params.alpha);
        let rhs2: Vec<f64> = (0..phi.len())
            .map(|j| -2.0 * d1[j] + p * (p - 1.0) * a * signed_pow(phi[j], p - 2.0) * d1[j] * d1[j])
            .collect();
        let mut d2 = self.solve_linearized(phi, &rhs2, 1e-12, 1e-7)?;
        self.symmetrize(&mut d2);
        Ok((d1, d2))
    }
}

/// `|u|^q sign(u)`, zero at zero.
fn signed_pow(u: f64, q: f64) -> f64 {
    if u == 0.0 {
        0.0
    } else {
        u.signum() * u.abs().powf(q)
    }
}

/// Newton's method for the bound-state equation starting from `guess`.
///
/// The returned profile is the positive one (sign fixed at its largest node). For an even
/// potential on a symmetric grid every iterate is symmetrized.
pub fn newton_solve(
    guess: &ComplexField,
    e: f64,
    potential: &Potential,
    params: NonlinearityParams,
    opts: &NewtonOptions,
) -> Result<NewtonSolution> {
    params.validate()?;
    if params.is_linear() {
        return Err(LabError::contract(
            "newton_solve needs a nonlinear problem (alpha = +-1)",
        ));
    }
    if guess.max_abs_im() > 1e-12 * guess.max_abs().max(1e-300) {
        return Err(LabError::contract("the bound-state guess must be real"));
    }
    let op = BvpOperator::new(potential, guess.grid(), e, params);
    let (phi, iterations, residual) = newton_core(&op, guess.re(), opts)?;
    finish(guess.grid(), phi, iterations, residual)
}

pub(crate) fn finish(
    grid: &SpatialGrid,
    mut phi: Vec<f64>,
    iterations: usize,
    residual: f64,
) -> Result<NewtonSolution> {
    let jmax = (0..phi.len())
        .max_by(|&i, &j| phi[i].abs().total_cmp(&phi[j].abs()))
        .unwrap_or(0);
    if phi[jmax] < 0.0 {
        phi.iter_mut().for_each(|x| *x = -*x);
    }
    let max = phi[jmax].abs();
    if max == 0.0 {
        return Err(LabError::solver(
            "Newton converged to the trivial solution",
            format!("iterations = {iterations}"),
        ));
    }
    let min = phi.iter().cloned().fold(f64::INFINITY, f64::min);
    if min < -POSITIVITY_FLOOR * max {
        return Err(LabError::solver(
            "Newton converged to a sign-changing solution",
            format!("min = {min:e}, max = {max:e}"),
        ));
    }
    Ok(NewtonSolution {
        phi: ComplexField::from_real(*grid, &phi)?,
        iterations,
        residual,
    })
}

/// Negative samples smaller than this fraction of the maximum count as round-off in the tails.
pub const POSITIVITY_FLOOR: f64 = 1e-10;

pub(crate) fn newton_core(
    op: &BvpOperator,
    mut phi: Vec<f64>,
    opts: &NewtonOptions,
) -> Result<(Vec<f64>, usize, f64)> {
    op.symmetrize(&mut phi);
    let mut f = op.residual(&phi);
    let mut r = op.norm(&f);
    let mut iterations = 0;
    while r > opts.tol {
        if iterations >= opts.max_iter {
            return Err(LabError::NotConverged(format!(
                "Newton residual {r:.3e} after {iterations} iterations (target {:.1e})",
                opts.tol
            )));
        }
        iterations += 1;
        let rhs: Vec<f64> = f.iter().map(|x| -x).collect();
        let mut delta = op.solve_linearized(&phi, &rhs, opts.linear_tol, 1e-6)?;
        op.symmetrize(&mut delta);
        // backtracking on the residual norm
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..12 {
            let trial: Vec<f64> = phi
                .iter()
                .zip(&delta)
                .map(|(a, d)| a + lambda * d)
                .collect();
            let ft = op.residual(&trial);
            let rt = op.norm(&ft);
            if rt.is_finite() && rt < r {
                phi = trial;
                f = ft;
                r = rt;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            if r < 100.0 * opts.tol {
                // stagnated at the round-off floor
                break;
            }
            return Err(LabError::NotConverged(format!(
                "Newton line search stalled at residual {r:.3e}"
            )));
        }
    }
    Ok((phi, iterations, r))
}
