use num_complex::Complex64;

use crate::error::{LabError, Result};
use crate::field::{real_inner, ComplexField, Fourier};
use crate::potentials::Potential;
use crate::soliton::{BranchEval, BranchInterpolant, NonlinearityParams};

type C = Complex64;

/// `u = e^{-i theta} (phi_E + v)` with `<Re v, phi_E> = <Im v, d_E phi_E> = 0`, and the gauged
/// remainder `w = e^{-i theta} v`.
#[derive(Debug, Clone)]
pub struct ModulationState {
    pub e: f64,
    /// `E - E*` at full relative precision.
    pub offset: f64,
    pub theta: f64,
    pub v: ComplexField,
    pub w: ComplexField,
    /// `(<Re v, phi_E>, <Im v, d_E phi_E>)` at the solution.
    pub constraints: [f64; 2],
    pub iterations: usize,
}

/// Relative level of the orthogonality constraints that counts as satisfied, plus an absolute
/// round-off floor proportional to `||u||`.
pub const CONSTRAINT_TOL: f64 = 1e-9;
const CONSTRAINT_FLOOR: f64 = 1e-13;

fn l2(a: &[f64], dx: f64) -> f64 {
    real_inner(a, a, dx).sqrt()
}

fn remainder(u: &[C], theta: f64, phi: &[f64]) -> Vec<C> {
    let rot = C::from_polar(1.0, theta);
    u.iter().zip(phi).map(|(z, p)| rot * z - p).collect()
}

struct Constraint {
    g: [f64; 2],
    jac: [[f64; 2]; 2],
    vnorm: f64,
    scale: [f64; 2],
}

fn constraint(u: &[C], theta: f64, ev: &BranchEval, dx: f64) -> Constraint {
    let v = remainder(u, theta, &ev.phi);
    let re: Vec<f64> = v.iter().map(|z| z.re).collect();
    let im: Vec<f64> = v.iter().map(|z| z.im).collect();
    let dphi_phi = real_inner(&ev.dphi, &ev.phi, dx);
    let re_dphi = real_inner(&re, &ev.dphi, dx);
    let g = [real_inner(&re, &ev.phi, dx), real_inner(&im, &ev.dphi, dx)];
    let jac = [
        [-dphi_phi + re_dphi, -real_inner(&im, &ev.phi, dx)],
        [real_inner(&im, &ev.d2phi, dx), dphi_phi + re_dphi],
    ];
    let vnorm = (v.iter().map(|z| z.norm_sqr()).sum::<f64>() * dx).sqrt();
    Constraint {
        g,
        jac,
        vnorm,
        scale: [l2(&ev.phi, dx), l2(&ev.dphi, dx)],
    }
}

fn lost(reason: String) -> LabError {
    LabError::DecompositionLost {
        t: f64::NAN,
        reason,
    }
}

/// Solve the two orthogonality conditions for `(E, theta)` by Newton's method from the guess.
pub fn decompose(
    u: &ComplexField,
    guess_e: f64,
    guess_theta: f64,
    table: &BranchInterpolant,
) -> Result<ModulationState> {
    decompose_offset(u, guess_e - table.e_star(), guess_theta, table)
}

/// As [`decompose`], with the energy guess given as `E - E*`. Near the bifurcation the
/// iteration runs in this offset so that its resolution is not limited by the ulp of `E`.
pub fn decompose_offset(
    u: &ComplexField,
    guess_offset: f64,
    guess_theta: f64,
    table: &BranchInterpolant,
) -> Result<ModulationState> {
    if u.grid() != table.grid() {
        return Err(LabError::contract("field and branch grids differ"));
    }
    let dx = u.grid().dx();
    let vals = u.values();
    let unorm = (vals.iter().map(|z| z.norm_sqr()).sum::<f64>() * dx).sqrt();
    let (mut offset, mut theta) = (guess_offset, guess_theta);
    let mut iterations = 0;
    let mut settled = false;
    loop {
        let ev = table
            .eval_offset(offset)
            .map_err(|err| lost(err.to_string()))?;
        let c = constraint(vals, theta, &ev, dx);
        // one ulp in E or theta moves G by the Jacobian times that ulp; near E* this is large
        let quant = |i: usize| {
            4.0 * f64::EPSILON
                * (offset.abs() * c.jac[i][0].abs() + (1.0 + theta.abs()) * c.jac[i][1].abs())
        };
        let tol = |i: usize, rel: f64| {
            rel * c.vnorm * c.scale[i] + CONSTRAINT_FLOOR * unorm * c.scale[i] + quant(i)
        };
        let small = c.g[0].abs() <= tol(0, 1e-12) && c.g[1].abs() <= tol(1, 1e-12);
        if small || settled || iterations >= 20 {
            let ok =
                c.g[0].abs() <= tol(0, CONSTRAINT_TOL) && c.g[1].abs() <= tol(1, CONSTRAINT_TOL);
            if !ok {
                return Err(lost(format!(
                    "constraint residuals {:.3e}, {:.3e} after {iterations} Newton steps",
                    c.g[0], c.g[1]
                )));
            }
            let v: Vec<C> = remainder(vals, theta, &ev.phi);
            let rot = C::from_polar(1.0, -theta);
            let w: Vec<C> = v.iter().map(|z| rot * z).collect();
            return Ok(ModulationState {
                e: ev.e,
                offset,
                theta,
                v: ComplexField::from_parts(*u.grid(), v),
                w: ComplexField::from_parts(*u.grid(), w),
                constraints: c.g,
                iterations,
            });
        }
        let [[a, b], [cc, d]] = c.jac;
        let det = a * d - b * cc;
        if det == 0.0 || !det.is_finite() {
            return Err(lost("singular constraint Jacobian".into()));
        }
        let de = -(d * c.g[0] - b * c.g[1]) / det;
        let dth = -(-cc * c.g[0] + a * c.g[1]) / det;
        offset += de;
        theta += dth;
        iterations += 1;
        if de.abs() <= 1e-15 * offset.abs() && dth.abs() <= 1e-15 * (1.0 + theta.abs()) {
            // the update is below round-off; one more evaluation decides acceptance
            settled = true;
        }
    }
}

/// Source terms of the remainder equation `i v_t = L v + g1 + g2 + g3 + g4` and the
/// modulation rates.
#[derive(Debug, Clone)]
pub struct SourceTerms {
    pub g1: ComplexField,
    pub g2: ComplexField,
    pub g3: ComplexField,
    pub g4: ComplexField,
    pub e_dot: f64,
    pub theta_dot_minus_e: f64,
    /// The 2x2 modulation matrix.
    pub matrix: [[f64; 2]; 2],
    pub condition: f64,
}

impl SourceTerms {
    pub fn theta_dot(&self, e: f64) -> f64 {
        self.theta_dot_minus_e + e
    }

    /// `g1 + g2 + g3 + g4`.
    pub fn total(&self) -> Vec<C> {
        (0..self.g1.values().len())
            .map(|j| {
                self.g1.values()[j]
                    + self.g2.values()[j]
                    + self.g3.values()[j]
                    + self.g4.values()[j]
            })
            .collect()
    }
}

/// Largest admissible condition number of the modulation matrix.
pub const MODULATION_COND_MAX: f64 = 1e8;

fn cond2(m: [[f64; 2]; 2]) -> f64 {
    // singular values of a 2x2 matrix
    let [[a, b], [c, d]] = m;
    let s = a * a + b * b + c * c + d * d;
    let det = (a * d - b * c).abs();
    let disc = (s * s - 4.0 * det * det).max(0.0).sqrt();
    let smax = ((s + disc) / 2.0).sqrt();
    let smin = ((s - disc) / 2.0).max(0.0).sqrt();
    if smin == 0.0 {
        f64::INFINITY
    } else {
        smax / smin
    }
}

/// `g4 = alpha phi^(p-1) ((p+1)/2 v + (p-1)/2 conj v)`, the linearization of `f` at `phi`.
pub fn linearized_source(phi: &[f64], v: &[C], params: NonlinearityParams) -> Vec<C> {
    let p = params.p;
    phi.iter()
        .zip(v)
        .map(|(&ph, &z)| {
            params.alpha
                * ph.abs().powf(p - 1.0)
                * (0.5 * (p + 1.0) * z + 0.5 * (p - 1.0) * z.conj())
        })
        .collect()
}

/// `g3 = f(phi + v) - f(phi) - g4`.
pub fn nonlinear_remainder(phi: &[f64], v: &[C], params: NonlinearityParams) -> Vec<C> {
    let g4 = linearized_source(phi, v, params);
    phi.iter()
        .zip(v)
        .zip(&g4)
        .map(|((&ph, &z), g)| params.f(C::new(ph, 0.0) + z) - params.f_real(ph) - g)
        .collect()
}

/// Assemble `g3`, solve the 2x2 modulation system for `(E_dot, theta_dot - E)`, then form
/// `g1`, `g2`, `g4`.
pub fn modulation_rates(
    ms: &ModulationState,
    table: &BranchInterpolant,
    params: NonlinearityParams,
) -> Result<SourceTerms> {
    let grid = *ms.v.grid();
    let dx = grid.dx();
    let ev = table.eval_offset(ms.offset)?;
    let v = ms.v.values();
    let re: Vec<f64> = v.iter().map(|z| z.re).collect();
    let im: Vec<f64> = v.iter().map(|z| z.im).collect();
    let g3 = nonlinear_remainder(&ev.phi, v, params);
    let g4 = linearized_source(&ev.phi, v, params);
    let dphi_phi = real_inner(&ev.dphi, &ev.phi, dx);
    let re_dphi = real_inner(&re, &ev.dphi, dx);
    let matrix = [
        [dphi_phi - re_dphi, real_inner(&im, &ev.phi, dx)],
        [real_inner(&im, &ev.d2phi, dx), dphi_phi + re_dphi],
    ];
    let condition = cond2(matrix);
    if !(condition < MODULATION_COND_MAX) {
        return Err(LabError::ModulationDegeneracy(condition));
    }
    let g3_im: Vec<f64> = g3.iter().map(|z| z.im).collect();
    let g3_re: Vec<f64> = g3.iter().map(|z| z.re).collect();
    let rhs = [
        real_inner(&g3_im, &ev.phi, dx),
        real_inner(&g3_re, &ev.dphi, dx),
    ];
    let [[a, b], [c, d]] = matrix;
    let det = a * d - b * c;
    let e_dot = (d * rhs[0] - b * rhs[1]) / det;
    let theta_dot_minus_e = (a * rhs[1] - c * rhs[0]) / det;
    let theta_dot = theta_dot_minus_e + ms.e;
    let g1: Vec<C> = v.iter().map(|z| -theta_dot * z).collect();
    let g2: Vec<C> = ev
        .phi
        .iter()
        .zip(&ev.dphi)
        .map(|(&p, &dp)| C::new(-theta_dot_minus_e * p, -e_dot * dp))
        .collect();
    Ok(SourceTerms {
        g1: ComplexField::from_parts(grid, g1),
        g2: ComplexField::from_parts(grid, g2),
        g3: ComplexField::from_parts(grid, g3),
        g4: ComplexField::from_parts(grid, g4),
        e_dot,
        theta_dot_minus_e,
        matrix,
        condition,
    })
}

/// `|| i (v_{n+1} - v_{n-1}) / (2 dt) - L v_n - sum g_j ||_{L^2}` with the sources taken at the
/// middle frame.
pub fn residual_eq_v(
    prev: &ModulationState,
    cur: &ModulationState,
    next: &ModulationState,
    st: &SourceTerms,
    potential: &Potential,
    dt: f64,
) -> Result<f64> {
    let grid = *cur.v.grid();
    prev.v.check_same_grid(&cur.v)?;
    next.v.check_same_grid(&cur.v)?;
    if !(dt > 0.0) {
        return Err(LabError::contract("time step must be positive"));
    }
    let fourier = Fourier::new(&grid);
    let d2 = fourier.derivative(cur.v.values(), 2);
    let g = st.total();
    let s: f64 = (0..grid.n())
        .map(|j| {
            let vt = (next.v.values()[j] - prev.v.values()[j]) / (2.0 * dt);
            let lv = -d2[j] + potential.eval(grid.x(j)) * cur.v.values()[j];
            (C::i() * vt - lv - g[j]).norm_sqr()
        })
        .sum();
    Ok((s * grid.dx()).sqrt())
}
