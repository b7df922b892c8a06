use serde::{Deserialize, Serialize};

use super::newton::{finish, newton_core, BvpOperator, NewtonOptions};
use super::NonlinearityParams;
use crate::error::{LabError, Result};
use crate::field::{norm, ComplexField, NormKind, SpatialGrid};
use crate::potentials::Potential;
use crate::spectrum::BoundState;

/// Leading-order bifurcation profile `|E - E*|^(1/(p-1)) ||phi*||_{p+1}^{-(p+1)/(p-1)} phi*`.
pub fn initial_guess(
    e: f64,
    bound: &BoundState,
    params: NonlinearityParams,
) -> Result<ComplexField> {
    params.validate()?;
    if e == bound.e_star {
        return Ok(ComplexField::zeros(*bound.phi_star.grid()));
    }
    params.check_side(e, bound.e_star)?;
    let p = params.p;
    let grid = bound.phi_star.grid();
    let int_p1: f64 = bound
        .phi_star
        .values()
        .iter()
        .map(|z| z.norm().powf(p + 1.0))
        .sum::<f64>()
        * grid.dx();
    let amp = (e - bound.e_star).abs().powf(1.0 / (p - 1.0)) * int_p1.powf(-1.0 / (p - 1.0));
    Ok(bound.phi_star.scale_real(amp))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergySpacing {
    Linear,
    /// Uniform in `log |E - E*|`.
    Geometric,
}

#[derive(Debug, Clone, Copy)]
pub struct BranchOptions {
    pub newton: NewtonOptions,
    pub spacing: EnergySpacing,
    /// Largest admissible `|E - E*|`.
    pub delta_branch: f64,
    /// Continuation gives up once the energy step shrinks below this.
    pub min_step: f64,
}

impl Default for BranchOptions {
    fn default() -> Self {
        Self {
            newton: NewtonOptions::default(),
            spacing: EnergySpacing::Geometric,
            delta_branch: 0.05,
            min_step: 1e-9,
        }
    }
}

/// Samples of `E -> phi_E` with the first two energy derivatives.
#[derive(Debug, Clone)]
pub struct SolitonBranch {
    pub params: NonlinearityParams,
    pub e_star: f64,
    /// Ordered by increasing `|E - E*|`.
    pub e_samples: Vec<f64>,
    pub phi: Vec<ComplexField>,
    pub dphi_de: Vec<ComplexField>,
    pub d2phi_de2: Vec<ComplexField>,
    /// `phi / ||phi||`.
    pub phi1: Vec<ComplexField>,
    /// `dphi_de / ||dphi_de||`.
    pub phi2: Vec<ComplexField>,
    pub residuals: Vec<f64>,
    pub iterations: Vec<usize>,
}

fn targets(e_star: f64, e_range: (f64, f64), steps: usize, spacing: EnergySpacing) -> Vec<f64> {
    let (a, b) = ((e_range.0 - e_star).abs(), (e_range.1 - e_star).abs());
    let (lo, hi) = (a.min(b), a.max(b));
    let side = (e_range.0 + e_range.1 - 2.0 * e_star).signum();
    (0..steps)
        .map(|i| {
            let s = if steps == 1 {
                0.0
            } else {
                i as f64 / (steps - 1) as f64
            };
            let d = match spacing {
                EnergySpacing::Linear => lo + s * (hi - lo),
                EnergySpacing::Geometric => lo * (hi / lo).powf(s),
            };
            e_star + side * d
        })
        .collect()
}

struct Point {
    e: f64,
    phi: Vec<f64>,
    d1: Vec<f64>,
    d2: Vec<f64>,
    residual: f64,
    iterations: usize,
}

/// Natural-parameter continuation of the positive branch from the bifurcation point.
///
/// The first sample is seeded by [`initial_guess`]; later ones use a second-order tangent
/// predictor. A failed corrector halves the energy step.
pub fn continue_branch(
    potential: &Potential,
    bound: &BoundState,
    params: NonlinearityParams,
    e_range: (f64, f64),
    steps: usize,
    opts: &BranchOptions,
) -> Result<SolitonBranch> {
    params.validate()?;
    if steps == 0 {
        return Err(LabError::contract("continuation needs at least one sample"));
    }
    let e_star = bound.e_star;
    params.check_side(e_range.0, e_star)?;
    params.check_side(e_range.1, e_star)?;
    for e in [e_range.0, e_range.1] {
        if (e - e_star).abs() > opts.delta_branch {
            return Err(LabError::contract(format!(
                "E = {e} is farther than delta_branch = {} from E* = {e_star}",
                opts.delta_branch
            )));
        }
    }
    let grid = *bound.phi_star.grid();
    let mut op = BvpOperator::new(potential, &grid, e_star, params);
    let tgts = targets(e_star, e_range, steps, opts.spacing);

    let solve_at = |op: &mut BvpOperator, e: f64, guess: Vec<f64>| -> Result<Point> {
        op.set_energy(e);
        let (phi, iterations, residual) = newton_core(op, guess, &opts.newton)?;
        let phi = finish(&grid, phi, iterations, residual)?.phi.re();
        let (d1, d2) = op.tangents(&phi)?;
        Ok(Point {
            e,
            phi,
            d1,
            d2,
            residual,
            iterations,
        })
    };

    // seed: move toward E* until the leading-order guess is inside the Newton basin
    let mut seed_e = tgts[0];
    let mut current = loop {
        let guess = initial_guess(seed_e, bound, params)?.re();
        match solve_at(&mut op, seed_e, guess) {
            Ok(pt) => break pt,
            Err(err) => {
                let d = (seed_e - e_star) / 4.0;
                if d.abs() < opts.min_step {
                    return Err(LabError::Continuation {
                        energy: seed_e,
                        reason: err.to_string(),
                    });
                }
                seed_e = e_star + d;
            }
        }
    };

    let mut accepted = Vec::with_capacity(steps);
    for &target in &tgts {
        let mut h = target - current.e;
        while current.e != target {
            let e_next = if (target - current.e).abs() <= h.abs() {
                target
            } else {
                current.e + h
            };
            let dh = e_next - current.e;
            let guess: Vec<f64> = (0..grid.n())
                .map(|j| current.phi[j] + dh * current.d1[j] + 0.5 * dh * dh * current.d2[j])
                .collect();
            match solve_at(&mut op, e_next, guess) {
                Ok(pt) => {
                    current = pt;
                    h *= 2.0;
                }
                Err(err) => {
                    h = dh / 2.0;
                    if h.abs() < opts.min_step {
                        return Err(LabError::Continuation {
                            energy: e_next,
                            reason: err.to_string(),
                        });
                    }
                }
            }
        }
        accepted.push(Point {
            e: current.e,
            phi: current.phi.clone(),
            d1: current.d1.clone(),
            d2: current.d2.clone(),
            residual: current.residual,
            iterations: current.iterations,
        });
    }

    let field = |v: &[f64]| ComplexField::from_real(grid, v);
    let mut branch = SolitonBranch {
        params,
        e_star,
        e_samples: Vec::new(),
        phi: Vec::new(),
        dphi_de: Vec::new(),
        d2phi_de2: Vec::new(),
        phi1: Vec::new(),
        phi2: Vec::new(),
        residuals: Vec::new(),
        iterations: Vec::new(),
    };
    for pt in accepted {
        let phi = field(&pt.phi)?;
        let d1 = field(&pt.d1)?;
        branch
            .phi1
            .push(phi.scale_real(1.0 / norm(&phi, NormKind::L2)));
        branch
            .phi2
            .push(d1.scale_real(1.0 / norm(&d1, NormKind::L2)));
        branch.e_samples.push(pt.e);
        branch.phi.push(phi);
        branch.dphi_de.push(d1);
        branch.d2phi_de2.push(field(&pt.d2)?);
        branch.residuals.push(pt.residual);
        branch.iterations.push(pt.iterations);
    }
    Ok(branch)
}

impl SolitonBranch {
    pub fn len(&self) -> usize {
        self.e_samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.e_samples.is_empty()
    }

    pub fn grid(&self) -> &SpatialGrid {
        self.phi[0].grid()
    }

    /// `||phi_E||_{L^2}^2` at every sample.
    pub fn masses(&self) -> Vec<f64> {
        self.phi
            .iter()
            .map(|f| norm(f, NormKind::L2).powi(2))
            .collect()
    }

    /// Finite-difference `d phi / dE` on the samples: centered inside, one-sided at the ends.
    /// A cross-check of the tangent solves.
    pub fn fd_dphi_de(&self) -> Result<Vec<ComplexField>> {
        let n = self.len();
        if n < 2 {
            return Err(LabError::contract(
                "finite differences need at least two samples",
            ));
        }
        (0..n)
            .map(|i| {
                let (a, b) = if i == 0 {
                    (0, 1)
                } else if i == n - 1 {
                    (n - 2, n - 1)
                } else {
                    (i - 1, i + 1)
                };
                let diff = &self.phi[b] - &self.phi[a];
                Ok(diff.scale_real(1.0 / (self.e_samples[b] - self.e_samples[a])))
            })
            .collect()
    }

    /// Smooth interpolation of the branch between its samples.
    pub fn interpolant(&self) -> Result<BranchInterpolant> {
        BranchInterpolant::new(self)
    }
}

/// `phi_E` and its first two energy derivatives at one energy.
#[derive(Debug, Clone)]
pub struct BranchEval {
    pub e: f64,
    /// `E - E*`, carried separately because `phi` is very sensitive to it near `E*`.
    pub offset: f64,
    pub phi: Vec<f64>,
    pub dphi: Vec<f64>,
    pub d2phi: Vec<f64>,
}

/// Quintic Hermite interpolation of the branch in `sigma = (alpha (E - E*))^(1/(p-1))`,
/// the variable in which `phi` is smooth down to the bifurcation point.
#[derive(Debug, Clone)]
pub struct BranchInterpolant {
    params: NonlinearityParams,
    e_star: f64,
    grid: SpatialGrid,
    sigma: Vec<f64>,
    // derivatives with respect to sigma
    y0: Vec<Vec<f64>>,
    y1: Vec<Vec<f64>>,
    y2: Vec<Vec<f64>>,
}

const HERMITE: [[f64; 6]; 6] = [
    [1.0, 0.0, 0.0, -10.0, 15.0, -6.0],
    [0.0, 1.0, 0.0, -6.0, 8.0, -3.0],
    [0.0, 0.0, 0.5, -1.5, 1.5, -0.5],
    [0.0, 0.0, 0.0, 0.5, -1.0, 0.5],
    [0.0, 0.0, 0.0, -4.0, 7.0, -3.0],
    [0.0, 0.0, 0.0, 10.0, -15.0, 6.0],
];

fn hermite_basis(t: f64) -> [[f64; 6]; 3] {
    let mut out = [[0.0; 6]; 3];
    for (i, c) in HERMITE.iter().enumerate() {
        let (mut v, mut d, mut dd) = (0.0, 0.0, 0.0);
        for k in (0..6).rev() {
            v = v * t + c[k];
            if k >= 1 {
                d = d * t + k as f64 * c[k];
            }
            if k >= 2 {
                dd = dd * t + (k * (k - 1)) as f64 * c[k];
            }
        }
        out[0][i] = v;
        out[1][i] = d;
        out[2][i] = dd;
    }
    out
}

impl BranchInterpolant {
    fn e_of_sigma(&self, s: f64) -> (f64, f64, f64) {
        let (p, a) = (self.params.p, self.params.alpha);
        (
            self.e_star + a * s.powf(p - 1.0),
            a * (p - 1.0) * s.powf(p - 2.0),
            a * (p - 1.0) * (p - 2.0) * s.powf(p - 3.0),
        )
    }

    fn new(branch: &SolitonBranch) -> Result<Self> {
        if branch.len() < 2 {
            return Err(LabError::contract(
                "interpolation needs at least two branch samples",
            ));
        }
        let params = branch.params;
        let mut me = Self {
            params,
            e_star: branch.e_star,
            grid: *branch.grid(),
            sigma: Vec::new(),
            y0: Vec::new(),
            y1: Vec::new(),
            y2: Vec::new(),
        };
        let mut order: Vec<usize> = (0..branch.len()).collect();
        order.sort_by(|&i, &j| {
            (branch.e_samples[i] - branch.e_star)
                .abs()
                .total_cmp(&(branch.e_samples[j] - branch.e_star).abs())
        });
        for i in order {
            let s =
                (params.alpha * (branch.e_samples[i] - branch.e_star)).powf(1.0 / (params.p - 1.0));
            let (_, es, ess) = me.e_of_sigma(s);
            let phi = branch.phi[i].re();
            let d1 = branch.dphi_de[i].re();
            let d2 = branch.d2phi_de2[i].re();
            me.sigma.push(s);
            me.y1.push(d1.iter().map(|x| x * es).collect());
            me.y2.push(
                d2.iter()
                    .zip(&d1)
                    .map(|(b, a)| b * es * es + a * ess)
                    .collect(),
            );
            me.y0.push(phi);
        }
        if me.sigma.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(LabError::contract(
                "branch samples must have distinct energies",
            ));
        }
        Ok(me)
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn e_star(&self) -> f64 {
        self.e_star
    }

    pub fn params(&self) -> NonlinearityParams {
        self.params
    }

    /// Energies covered by the table.
    pub fn e_range(&self) -> (f64, f64) {
        let a = self.e_of_sigma(self.sigma[0]).0;
        let b = self.e_of_sigma(*self.sigma.last().expect("non-empty")).0;
        (a.min(b), a.max(b))
    }

    pub fn eval(&self, e: f64) -> Result<BranchEval> {
        self.eval_offset(e - self.e_star)
    }

    /// Evaluate at `E = E* + offset`.
    pub fn eval_offset(&self, offset: f64) -> Result<BranchEval> {
        let e = self.e_star + offset;
        let arg = self.params.alpha * offset;
        let s = if arg > 0.0 {
            arg.powf(1.0 / (self.params.p - 1.0))
        } else {
            f64::NAN
        };
        let (lo, hi) = (self.sigma[0], *self.sigma.last().expect("non-empty"));
        if !(s >= lo * (1.0 - 1e-12) && s <= hi * (1.0 + 1e-12)) {
            let (a, b) = self.e_range();
            return Err(LabError::contract(format!(
                "E = {e} is outside the tabulated range [{a}, {b}]"
            )));
        }
        let s = s.clamp(lo, hi);
        let j = match self.sigma.partition_point(|&x| x <= s) {
            0 => 0,
            k => (k - 1).min(self.sigma.len() - 2),
        };
        let h = self.sigma[j + 1] - self.sigma[j];
        let t = (s - self.sigma[j]) / h;
        let b = hermite_basis(t);
        let n = self.grid.n();
        let rows = [
            &self.y0[j],
            &self.y1[j],
            &self.y2[j],
            &self.y2[j + 1],
            &self.y1[j + 1],
            &self.y0[j + 1],
        ];
        let coeffs = |row: &[f64; 6], scale: f64| -> Vec<f64> {
            let w = [
                row[0],
                h * row[1],
                h * h * row[2],
                h * h * row[3],
                h * row[4],
                row[5],
            ];
            let mut out = vec![0.0; n];
            for (wk, r) in w.iter().zip(rows) {
                let c = scale * wk;
                out.iter_mut().zip(r.iter()).for_each(|(o, y)| *o += c * y);
            }
            out
        };
        let phi = coeffs(&b[0], 1.0);
        let ps = coeffs(&b[1], 1.0 / h);
        let pss = coeffs(&b[2], 1.0 / (h * h));
        let (_, es, ess) = self.e_of_sigma(s);
        let dphi: Vec<f64> = ps.iter().map(|x| x / es).collect();
        let d2phi: Vec<f64> = pss
            .iter()
            .zip(&dphi)
            .map(|(a, d)| (a - d * ess) / (es * es))
            .collect();
        Ok(BranchEval {
            e,
            offset,
            phi,
            dphi,
            d2phi,
        })
    }
}
