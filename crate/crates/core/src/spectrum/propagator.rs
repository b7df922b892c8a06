use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::field::{ComplexField, Fourier, SpatialGrid};
use crate::potentials::Potential;

type C = Complex64;

/// Relative mass in the 5 outermost nodes on each side above which a result is flagged.
pub const EDGE_MASS_TOL: f64 = 1e-6;

/// Fraction of `sum |u|^2` carried by the 5 outermost nodes on each side.
pub fn edge_mass_fraction(values: &[C]) -> f64 {
    let n = values.len();
    let e = 5.min(n / 2);
    let total: f64 = values.iter().map(|z| z.norm_sqr()).sum();
    if total == 0.0 {
        return 0.0;
    }
    let edge: f64 = values[..e]
        .iter()
        .chain(&values[n - e..])
        .map(|z| z.norm_sqr())
        .sum();
    edge / total
}

/// Absorbing layer: `sigma(x) = strength s^2` with `s` rising from 0 to 1 across the outer
/// `fraction` of the box at each end.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sponge {
    pub strength: f64,
    pub fraction: f64,
}

impl Default for Sponge {
    fn default() -> Self {
        Self {
            strength: 1.0,
            fraction: 0.1,
        }
    }
}

impl Sponge {
    pub fn sigma(&self, grid: &SpatialGrid, x: f64) -> f64 {
        let w = self.fraction * grid.length();
        let d = (x - grid.x_min()).min(grid.x_max() - x);
        if d >= w {
            0.0
        } else {
            let s = 1.0 - d / w;
            self.strength * s * s
        }
    }

    /// Start of the undamped interior `[a, b]`.
    pub fn interior(&self, grid: &SpatialGrid) -> (f64, f64) {
        let w = self.fraction * grid.length();
        (grid.x_min() + w, grid.x_max() - w)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SplitScheme {
    /// Second-order potential-kinetic-potential splitting.
    Strang,
    /// Fourth-order Yoshida composition of three Strang steps.
    Yoshida4,
}

/// Result of a linear propagation with its boundary diagnostic.
#[derive(Debug, Clone)]
pub struct Propagated {
    pub field: ComplexField,
    /// Set when more than [`EDGE_MASS_TOL`] of the mass sits in the edge nodes.
    pub boundary_warning: bool,
}

struct StepCache {
    h: f64,
    /// (potential half-phase, kinetic phase) per Strang substep
    subs: Vec<(Vec<C>, Vec<C>)>,
    damping: Option<Vec<f64>>,
}

/// Split-step Fourier propagator for `i u_t = L u` on a periodic grid.
pub struct SplitStepLinear {
    fourier: Fourier,
    v: Vec<f64>,
    pub dt: f64,
    pub scheme: SplitScheme,
    sponge: Option<Sponge>,
    sigma: Vec<f64>,
    cache: Option<StepCache>,
    buf: Vec<C>,
}

const YOSHIDA_W1: f64 = 1.351_207_191_959_657_6;
const YOSHIDA_W0: f64 = -1.702_414_383_919_315_3;

impl SplitStepLinear {
    pub fn new(
        grid: &SpatialGrid,
        potential: &Potential,
        dt: f64,
        scheme: SplitScheme,
        sponge: Option<Sponge>,
    ) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(LabError::contract("time step must be positive"));
        }
        let sigma = match &sponge {
            Some(s) => grid.nodes().into_iter().map(|x| s.sigma(grid, x)).collect(),
            None => Vec::new(),
        };
        Ok(Self {
            fourier: Fourier::new(grid),
            v: potential.sample_real(grid),
            dt,
            scheme,
            sponge,
            sigma,
            cache: None,
            buf: vec![C::new(0.0, 0.0); grid.n()],
        })
    }

    pub fn grid(&self) -> &SpatialGrid {
        self.fourier.grid()
    }

    pub fn sponge(&self) -> Option<Sponge> {
        self.sponge
    }

    fn prepare(&mut self, h: f64) {
        if self.cache.as_ref().is_some_and(|c| c.h == h) {
            return;
        }
        let weights: Vec<f64> = match self.scheme {
            SplitScheme::Strang => vec![1.0],
            SplitScheme::Yoshida4 => vec![YOSHIDA_W1, YOSHIDA_W0, YOSHIDA_W1],
        };
        let subs = weights
            .iter()
            .map(|&w| {
                let tau = w * h;
                let pot = self
                    .v
                    .iter()
                    .map(|&v| C::from_polar(1.0, -0.5 * tau * v))
                    .collect();
                let kin = self
                    .fourier
                    .k()
                    .iter()
                    .map(|&k| C::from_polar(1.0, -tau * k * k))
                    .collect();
                (pot, kin)
            })
            .collect();
        let damping = self
            .sponge
            .map(|_| self.sigma.iter().map(|s| (-s * h.abs()).exp()).collect());
        self.cache = Some(StepCache { h, subs, damping });
    }

    /// Advance `u` in place by one step of size `h` (may be negative; the sponge always damps).
    pub fn step_in_place(&mut self, u: &mut [C], h: f64) {
        self.prepare(h);
        let cache = self.cache.as_ref().expect("prepared");
        for (pot, kin) in &cache.subs {
            u.iter_mut().zip(pot).for_each(|(z, p)| *z *= p);
            self.buf.copy_from_slice(u);
            self.fourier.forward(&mut self.buf);
            self.buf.iter_mut().zip(kin).for_each(|(z, k)| *z *= k);
            self.fourier.inverse(&mut self.buf);
            u.copy_from_slice(&self.buf);
            u.iter_mut().zip(pot).for_each(|(z, p)| *z *= p);
        }
        if let Some(d) = &cache.damping {
            u.iter_mut().zip(d).for_each(|(z, s)| *z *= s);
        }
    }

    /// Propagate by time `t` (either sign) with `ceil(|t|/dt)` equal steps.
    pub fn propagate(&mut self, f: &ComplexField, t: f64) -> Result<Propagated> {
        if f.grid() != self.grid() {
            return Err(LabError::contract("field and propagator grids differ"));
        }
        if !t.is_finite() {
            return Err(LabError::contract("propagation time must be finite"));
        }
        let mut u = f.values().to_vec();
        if t != 0.0 {
            let steps = (t.abs() / self.dt).ceil().max(1.0) as usize;
            let h = t / steps as f64;
            for _ in 0..steps {
                self.step_in_place(&mut u, h);
            }
        }
        let boundary_warning = edge_mass_fraction(&u) > EDGE_MASS_TOL;
        Ok(Propagated {
            field: ComplexField::from_parts(*f.grid(), u),
            boundary_warning,
        })
    }
}
