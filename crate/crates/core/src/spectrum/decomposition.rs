use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::bound::{find_bound_states, ground_state, BoundState};
use super::dense::DenseSpectrum;
use super::propagator::{
    edge_mass_fraction, Propagated, SplitScheme, SplitStepLinear, Sponge, EDGE_MASS_TOL,
};
use crate::error::{LabError, Result};
use crate::field::{inner_product, norm, ComplexField, Fourier, NormKind, SpatialGrid};
use crate::numerics::linear_fit;
use crate::potentials::Potential;

type C = Complex64;

/// How `exp(-itL)` is realized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Backend {
    /// Dense eigenbasis of the Fourier-spectral discretization (exact in time, `n <= 2048`).
    Eigen,
    SplitStep {
        dt: f64,
        scheme: SplitScheme,
    },
}

/// Potential, grid, bound state and lazily built dense eigenbasis; read-only after construction.
#[derive(Debug)]
pub struct SpectralDecomposition {
    potential: Potential,
    grid: SpatialGrid,
    bound: Option<BoundState>,
    dense: OnceLock<DenseSpectrum>,
}

impl SpectralDecomposition {
    /// Accepts at most one negative eigenvalue (none for e.g. `V = 0`).
    pub fn new(potential: &Potential, grid: &SpatialGrid) -> Result<Self> {
        let mut states = find_bound_states(potential, grid)?;
        if states.len() > 1 {
            return Err(LabError::Hypothesis(format!(
                "{} negative eigenvalues; at most one is supported",
                states.len()
            )));
        }
        Ok(Self::with_bound(potential, grid, states.pop()))
    }

    /// Requires exactly one eigenvalue and no zero-energy resonance.
    pub fn with_ground_state(potential: &Potential, grid: &SpatialGrid) -> Result<Self> {
        let b = ground_state(potential, grid)?;
        Ok(Self::with_bound(potential, grid, Some(b)))
    }

    pub fn with_bound(
        potential: &Potential,
        grid: &SpatialGrid,
        bound: Option<BoundState>,
    ) -> Self {
        Self {
            potential: potential.clone(),
            grid: *grid,
            bound,
            dense: OnceLock::new(),
        }
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn bound(&self) -> Option<&BoundState> {
        self.bound.as_ref()
    }

    pub fn require_bound(&self) -> Result<&BoundState> {
        self.bound
            .as_ref()
            .ok_or_else(|| LabError::Hypothesis("no bound state".into()))
    }

    /// Dense eigenbasis, built on first use.
    pub fn dense(&self) -> Result<&DenseSpectrum> {
        if let Some(d) = self.dense.get() {
            return Ok(d);
        }
        let d = DenseSpectrum::new(&self.grid, &self.potential)?;
        Ok(self.dense.get_or_init(|| d))
    }

    pub fn split_step(
        &self,
        dt: f64,
        scheme: SplitScheme,
        sponge: Option<Sponge>,
    ) -> Result<SplitStepLinear> {
        SplitStepLinear::new(&self.grid, &self.potential, dt, scheme, sponge)
    }

    /// `P f = <f, phi*> phi*` (zero without a bound state).
    pub fn project_p(&self, f: &ComplexField) -> Result<ComplexField> {
        match &self.bound {
            None => {
                if f.grid() != &self.grid {
                    return Err(LabError::contract(
                        "field grid differs from the decomposition grid",
                    ));
                }
                Ok(ComplexField::zeros(self.grid))
            }
            Some(b) => {
                let c = inner_product(f, &b.phi_star)?;
                Ok(b.phi_star.scale(c))
            }
        }
    }

    /// `Q f = f - P f`.
    pub fn project_q(&self, f: &ComplexField) -> Result<ComplexField> {
        let p = self.project_p(f)?;
        Ok(f - &p)
    }

    pub fn propagate_linear(
        &self,
        f: &ComplexField,
        t: f64,
        backend: Backend,
    ) -> Result<Propagated> {
        match backend {
            Backend::Eigen => {
                let field = self.dense()?.propagate(f, t)?;
                let boundary_warning = edge_mass_fraction(field.values()) > EDGE_MASS_TOL;
                Ok(Propagated {
                    field,
                    boundary_warning,
                })
            }
            Backend::SplitStep { dt, scheme } => self.split_step(dt, scheme, None)?.propagate(f, t),
        }
    }
}

/// Least-squares fit of `log ||exp(-itL) Q f||_inf` against `log t`.
#[derive(Debug, Clone)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    pub times: Vec<f64>,
    pub sup_norms: Vec<f64>,
}

/// Propagate `Q f` through the sorted times and fit the decay exponent.
///
/// Refuses to fit (boundary-contamination error) if any sample sees edge mass.
pub fn dispersive_decay_probe(
    decomp: &SpectralDecomposition,
    f: &ComplexField,
    t_list: &[f64],
    dt: f64,
    scheme: SplitScheme,
) -> Result<DecayFit> {
    let mut times = t_list.to_vec();
    times.sort_by(f64::total_cmp);
    if times.len() < 2 || times[0] <= 0.0 {
        return Err(LabError::contract(
            "decay probe needs at least two positive times",
        ));
    }
    let mut prop = decomp.split_step(dt, scheme, None)?;
    let mut u = decomp.project_q(f)?;
    let mut now = 0.0;
    let mut sup = Vec::with_capacity(times.len());
    for &t in &times {
        let r = prop.propagate(&u, t - now)?;
        if r.boundary_warning {
            return Err(LabError::BoundaryContamination(format!(
                "edge mass {:.3e} at t = {t}",
                edge_mass_fraction(r.field.values())
            )));
        }
        u = r.field;
        now = t;
        sup.push(norm(&u, NormKind::Linf));
    }
    let lx: Vec<f64> = times.iter().map(|t| t.ln()).collect();
    let ly: Vec<f64> = sup.iter().map(|s| s.ln()).collect();
    let fit = linear_fit(&lx, &ly).ok_or_else(|| LabError::contract("degenerate time list"))?;
    Ok(DecayFit {
        slope: fit.slope,
        intercept: fit.intercept,
        times,
        sup_norms: sup,
    })
}

fn free_flow(f: &ComplexField, t: f64) -> ComplexField {
    let fourier = Fourier::new(f.grid());
    let vals = fourier.apply_multiplier(f.values(), |k| C::from_polar(1.0, -t * k * k));
    ComplexField::from_parts(*f.grid(), vals)
}

#[derive(Debug, Clone)]
pub struct WaveOperatorResult {
    /// `W_t g = exp(itL) exp(-itL0) g`.
    pub field: ComplexField,
    /// `||W_{2t} g - W_t g||_{L^2}`.
    pub increment: f64,
}

fn wave_at(
    decomp: &SpectralDecomposition,
    g: &ComplexField,
    t: f64,
    dt: f64,
) -> Result<ComplexField> {
    let free = free_flow(g, t);
    let mut prop = decomp.split_step(dt, SplitScheme::Yoshida4, None)?;
    Ok(prop.propagate(&free, -t)?.field)
}

/// Finite-time wave operator `W_t = exp(itL) exp(-itL0)` with its Cauchy increment.
/// Fails with a not-converged error when the increment exceeds `tol`.
pub fn wave_operator_apply(
    decomp: &SpectralDecomposition,
    g: &ComplexField,
    t_match: f64,
    dt: f64,
    tol: f64,
) -> Result<WaveOperatorResult> {
    if !(t_match > 0.0) {
        return Err(LabError::contract("t_match must be positive"));
    }
    let w1 = wave_at(decomp, g, t_match, dt)?;
    let w2 = wave_at(decomp, g, 2.0 * t_match, dt)?;
    let increment = norm(&(&w2 - &w1), NormKind::L2);
    if increment > tol {
        return Err(LabError::NotConverged(format!(
            "wave operator increment {increment:.3e} exceeds {tol:.3e} at t = {t_match}"
        )));
    }
    Ok(WaveOperatorResult {
        field: w1,
        increment,
    })
}

/// `W_t^* h = exp(itL0) exp(-itL) h`.
pub fn wave_operator_adjoint(
    decomp: &SpectralDecomposition,
    h: &ComplexField,
    t: f64,
    dt: f64,
) -> Result<ComplexField> {
    let mut prop = decomp.split_step(dt, SplitScheme::Yoshida4, None)?;
    let evolved = prop.propagate(h, t)?.field;
    Ok(free_flow(&evolved, -t))
}
