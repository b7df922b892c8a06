use num_complex::Complex64;

use crate::error::{LabError, Result};
use crate::field::{ComplexField, Fourier, SpatialGrid};
use crate::potentials::Potential;
use crate::soliton::NonlinearityParams;
use crate::spectrum::{edge_mass_fraction, Sponge, EDGE_MASS_TOL};

type C = Complex64;

/// Allowed relative drift of the mass and the Hamiltonian (sponge off).
pub const MASS_DRIFT_TOL: f64 = 1e-8;
pub const ENERGY_DRIFT_TOL: f64 = 1e-6;

/// `N(u) = ||u||_{L^2}^2`.
pub fn mass(u: &ComplexField) -> f64 {
    u.values().iter().map(|z| z.norm_sqr()).sum::<f64>() * u.grid().dx()
}

/// `H(u) = int |u_x|^2 + V |u|^2 + 2 alpha/(p+1) |u|^(p+1)`.
pub fn hamiltonian(u: &ComplexField, potential: &Potential, params: NonlinearityParams) -> f64 {
    let fourier = Fourier::new(u.grid());
    hamiltonian_with(
        u.values(),
        &fourier,
        &potential.sample_real(u.grid()),
        params,
    )
}

fn hamiltonian_with(u: &[C], fourier: &Fourier, v: &[f64], params: NonlinearityParams) -> f64 {
    let ux = fourier.derivative(u, 1);
    let c = 2.0 * params.alpha / (params.p + 1.0);
    let s: f64 = (0..u.len())
        .map(|j| {
            let a = u[j].norm();
            ux[j].norm_sqr() + v[j] * a * a + c * a.powf(params.p + 1.0)
        })
        .sum();
    s * fourier.grid().dx()
}

/// NLS solution snapshot with the invariants recorded at `t = 0`.
#[derive(Debug, Clone)]
pub struct NLSState {
    pub u: ComplexField,
    pub t: f64,
    pub params: NonlinearityParams,
    pub n0: f64,
    pub h0: f64,
}

impl NLSState {
    pub fn new(u: ComplexField, potential: &Potential, params: NonlinearityParams) -> Result<Self> {
        params.validate()?;
        if edge_mass_fraction(u.values()) > EDGE_MASS_TOL {
            return Err(LabError::BoundaryContamination(
                "initial data is not localized inside the box".into(),
            ));
        }
        let n0 = mass(&u);
        let h0 = hamiltonian(&u, potential, params);
        Ok(Self {
            u,
            t: 0.0,
            params,
            n0,
            h0,
        })
    }
}

/// Relative drifts of `N` and `H`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Drift {
    pub mass: f64,
    pub energy: f64,
}

fn rel(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a.abs()
    } else {
        ((a - b) / b).abs()
    }
}

/// Strang split-step integrator for `i u_t = -u_xx + V u + alpha |u|^(p-1) u`:
/// half-step of the pointwise phase flow, full kinetic step in Fourier space, half-step of
/// the phase flow. The phase flow keeps `|u|` fixed, so each substep is exact.
pub struct NlsStepper {
    fourier: Fourier,
    v: Vec<f64>,
    params: NonlinearityParams,
    dt: f64,
    kinetic: Vec<C>,
    damping: Option<Vec<f64>>,
    buf: Vec<C>,
    /// Conservation is checked every this many steps.
    pub check_every: usize,
    steps: usize,
    last_drift: Drift,
}

impl NlsStepper {
    pub fn new(
        grid: &SpatialGrid,
        potential: &Potential,
        params: NonlinearityParams,
        dt: f64,
        sponge: Option<Sponge>,
    ) -> Result<Self> {
        params.validate()?;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(LabError::contract("time step must be positive"));
        }
        let v = potential.sample_real(grid);
        let fourier = Fourier::new(grid);
        let kinetic = fourier
            .k()
            .iter()
            .map(|&k| C::from_polar(1.0, -dt * k * k))
            .collect();
        let damping = sponge.map(|s| {
            grid.nodes()
                .into_iter()
                .map(|x| (-s.sigma(grid, x) * dt).exp())
                .collect()
        });
        Ok(Self {
            fourier,
            v,
            params,
            dt,
            kinetic,
            damping,
            buf: vec![C::new(0.0, 0.0); grid.n()],
            check_every: 100,
            steps: 0,
            last_drift: Drift::default(),
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn has_sponge(&self) -> bool {
        self.damping.is_some()
    }

    /// Drift measured at the most recent conservation check.
    pub fn last_drift(&self) -> Drift {
        self.last_drift
    }

    /// Largest stable step: the pointwise phase rotation per step must stay below 1/2 rad.
    pub fn dt_max(&self, u: &[C]) -> f64 {
        let vmax = self.v.iter().map(|x| x.abs()).fold(0.0, f64::max);
        let umax = u.iter().map(|z| z.norm()).fold(0.0, f64::max);
        0.5 / (vmax + self.params.alpha.abs() * umax.powf(self.params.p - 1.0)).max(1e-300)
    }

    fn phase(&self, u: &mut [C], tau: f64) {
        let (a, p) = (self.params.alpha, self.params.p);
        let half = 0.5 * (p - 1.0);
        // |u|^(p-1) = (|u|^2)^((p-1)/2); integer powers avoid powf in the hot loop
        let int_half = (half.fract() == 0.0 && half <= 16.0).then_some(half as i32);
        for (z, v) in u.iter_mut().zip(&self.v) {
            let r2 = z.norm_sqr();
            let nl = match int_half {
                Some(k) => r2.powi(k),
                None => r2.powf(half),
            };
            let (s, c) = (-tau * (v + a * nl)).sin_cos();
            *z *= C::new(c, s);
        }
    }

    /// One Strang step in place.
    pub fn step_in_place(&mut self, u: &mut [C]) {
        self.phase(u, 0.5 * self.dt);
        self.buf.copy_from_slice(u);
        self.fourier.forward(&mut self.buf);
        self.buf
            .iter_mut()
            .zip(&self.kinetic)
            .for_each(|(z, k)| *z *= k);
        self.fourier.inverse(&mut self.buf);
        u.copy_from_slice(&self.buf);
        self.phase(u, 0.5 * self.dt);
        if let Some(d) = &self.damping {
            u.iter_mut().zip(d).for_each(|(z, s)| *z *= s);
        }
    }

    /// Relative drift of `u` from the state's reference invariants.
    pub fn drift(&self, state: &NLSState, u: &[C]) -> Drift {
        let n = u.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.fourier.grid().dx();
        let h = hamiltonian_with(u, &self.fourier, &self.v, self.params);
        Drift {
            mass: rel(n, state.n0),
            energy: rel(h, state.h0),
        }
    }

    /// Advance the state by one step, checking conservation every `check_every` steps when
    /// no sponge is active.
    pub fn step(&mut self, state: &mut NLSState) -> Result<()> {
        if state.params != self.params {
            return Err(LabError::contract(
                "state and stepper nonlinearities differ",
            ));
        }
        if self.steps == 0 && self.dt > self.dt_max(state.u.values()) {
            let m = self.dt_max(state.u.values());
            return Err(LabError::StepSize(format!(
                "dt = {} exceeds dt_max = {m:.3e}",
                self.dt
            )));
        }
        let mut u = std::mem::replace(&mut state.u, ComplexField::zeros(*self.fourier.grid()))
            .into_values();
        self.step_in_place(&mut u);
        self.steps += 1;
        state.t += self.dt;
        let check =
            self.check_every > 0 && self.steps % self.check_every == 0 && self.damping.is_none();
        let drift = check.then(|| self.drift(state, &u));
        state.u = ComplexField::from_parts(*self.fourier.grid(), u);
        if let Some(d) = drift {
            self.last_drift = d;
            if d.mass > MASS_DRIFT_TOL || d.energy > ENERGY_DRIFT_TOL || !d.energy.is_finite() {
                return Err(LabError::StepSize(format!(
                    "conservation drift at t = {:.4}: mass {:.3e}, energy {:.3e}",
                    state.t, d.mass, d.energy
                )));
            }
        }
        Ok(())
    }
}

/// Convenience single step; allocates a fresh integrator.
pub fn step_nls(state: &NLSState, potential: &Potential, dt: f64) -> Result<NLSState> {
    let mut stepper = NlsStepper::new(state.u.grid(), potential, state.params, dt, None)?;
    stepper.check_every = 1;
    let mut next = state.clone();
    stepper.step(&mut next)?;
    Ok(next)
}
