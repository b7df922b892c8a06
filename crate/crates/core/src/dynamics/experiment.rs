use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ledger::{split, LedgerValues, NormLedger};
use super::modulation::{decompose, decompose_offset, modulation_rates, ModulationState};
use super::nls::{NLSState, NlsStepper};
use crate::error::{LabError, Result};
use crate::field::{norm, ComplexField, Fourier, NormKind, SpatialGrid};
use crate::potentials::Potential;
use crate::soliton::{
    continue_branch, BranchInterpolant, BranchOptions, EnergySpacing, NonlinearityParams,
};
use crate::spectrum::{
    edge_mass_fraction, wave_operator_adjoint, SpectralDecomposition, SplitScheme, Sponge,
    EDGE_MASS_TOL,
};

type C = Complex64;

/// Radiation added to the soliton in the initial data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Perturbation {
    None,
    /// `amplitude * g / ||g||_{H^1}` with `g` a modulated Gaussian, optionally projected onto
    /// the continuous spectrum before normalization.
    Gaussian {
        amplitude: f64,
        #[serde(default)]
        center: f64,
        width: f64,
        #[serde(default)]
        xi: f64,
        #[serde(default = "yes")]
        project_q: bool,
    },
}

fn yes() -> bool {
    true
}

impl Perturbation {
    pub fn profile(&self, decomp: &SpectralDecomposition) -> Result<ComplexField> {
        let grid = *decomp.grid();
        match *self {
            Perturbation::None => Ok(ComplexField::zeros(grid)),
            Perturbation::Gaussian {
                amplitude,
                center,
                width,
                xi,
                project_q,
            } => {
                if !(width > 0.0) || !amplitude.is_finite() {
                    return Err(LabError::contract(
                        "perturbation needs a positive width and finite amplitude",
                    ));
                }
                let g = ComplexField::from_fn(grid, |x| {
                    C::from_polar(
                        (-(x - center).powi(2) / (2.0 * width * width)).exp(),
                        xi * x,
                    )
                })?;
                let g = if project_q { decomp.project_q(&g)? } else { g };
                let n = norm(&g, NormKind::H1);
                if n == 0.0 {
                    return Ok(g);
                }
                Ok(g.scale_real(amplitude / n))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionConfig {
    /// Soliton energy and phase of the initial data.
    pub e0: f64,
    #[serde(default)]
    pub theta0: f64,
    pub perturbation: Perturbation,
    pub t_end: f64,
    pub dt: f64,
    pub dt_store: f64,
    pub sponge: Option<Sponge>,
    /// The branch table covers `|E - E*|` in `|E0 - E*| * [lo, hi]`.
    pub table_window: (f64, f64),
    pub table_samples: usize,
    /// Time between full snapshots of `w` kept for the asymptotic analysis.
    pub snapshot_every: f64,
    /// Half-width of the window on which the source terms are kept; `None` keeps nothing.
    pub source_window: Option<f64>,
}

impl EvolutionConfig {
    pub fn new(e0: f64, t_end: f64) -> Self {
        Self {
            e0,
            theta0: 0.0,
            perturbation: Perturbation::None,
            t_end,
            dt: 1e-3,
            dt_store: 0.05,
            sponge: None,
            table_window: (0.125, 8.0),
            table_samples: 24,
            snapshot_every: 5.0,
            source_window: None,
        }
    }

    fn store_stride(&self) -> Result<usize> {
        let ratio = self.dt_store / self.dt;
        let m = ratio.round();
        if !(self.dt > 0.0 && m >= 1.0 && (ratio - m).abs() < 1e-9 * ratio) {
            return Err(LabError::contract(format!(
                "dt_store = {} must be a positive integer multiple of dt = {}",
                self.dt_store, self.dt
            )));
        }
        Ok(m as usize)
    }
}

/// Everything needed to integrate one stability experiment.
pub struct Experiment {
    pub potential: Potential,
    pub params: NonlinearityParams,
    pub decomp: SpectralDecomposition,
    pub table: BranchInterpolant,
    pub config: EvolutionConfig,
}

impl Experiment {
    /// Computes the ground state, the branch table around `e0`, and validates the config.
    pub fn prepare(
        potential: &Potential,
        grid: &SpatialGrid,
        params: NonlinearityParams,
        config: EvolutionConfig,
    ) -> Result<Self> {
        params.validate()?;
        if params.is_linear() {
            return Err(LabError::contract("stability experiments need alpha = +-1"));
        }
        if !(config.t_end > 0.0) {
            return Err(LabError::contract("t_end must be positive"));
        }
        config.store_stride()?;
        let decomp = SpectralDecomposition::with_ground_state(potential, grid)?;
        let bound = decomp.require_bound()?.clone();
        params.check_side(config.e0, bound.e_star)?;
        let s0 = (config.e0 - bound.e_star).abs();
        let opts = BranchOptions {
            spacing: EnergySpacing::Geometric,
            ..Default::default()
        };
        let (lo, hi) = config.table_window;
        if !(lo > 0.0 && lo < 1.0 && hi > 1.0) {
            return Err(LabError::contract(
                "table_window must satisfy 0 < lo < 1 < hi",
            ));
        }
        let s_hi = (s0 * hi).min(opts.delta_branch);
        if s_hi <= s0 {
            return Err(LabError::contract(format!(
                "E0 = {} is at the edge of delta_branch",
                config.e0
            )));
        }
        let side = params.side();
        let range = (bound.e_star + side * s0 * lo, bound.e_star + side * s_hi);
        let branch = continue_branch(
            potential,
            &bound,
            params,
            range,
            config.table_samples.max(4),
            &opts,
        )?;
        let table = branch.interpolant()?;
        Ok(Self {
            potential: potential.clone(),
            params,
            decomp,
            table,
            config,
        })
    }

    pub fn grid(&self) -> &SpatialGrid {
        self.decomp.grid()
    }

    pub fn e_star(&self) -> f64 {
        self.table.e_star()
    }

    /// `u0 = e^{-i theta0} (phi_{E0} + perturbation)`.
    pub fn initial_data(&self) -> Result<ComplexField> {
        let phi = self.table.eval(self.config.e0)?.phi;
        let pert = self.config.perturbation.profile(&self.decomp)?;
        let rot = C::from_polar(1.0, -self.config.theta0);
        let vals = phi
            .iter()
            .zip(pert.values())
            .map(|(&p, &q)| rot * (p + q))
            .collect();
        ComplexField::new(*self.grid(), vals)
    }
}

/// One stored frame of the run.
#[derive(Debug, Clone, Serialize)]
pub struct FrameRecord {
    pub t: f64,
    pub e: f64,
    /// `E - E*`.
    pub e_offset: f64,
    pub theta: f64,
    /// Rates predicted by the modulation system.
    pub e_dot: f64,
    pub theta_dot_minus_e: f64,
    pub m: [f64; 6],
    pub mass_drift: f64,
    pub energy_drift: f64,
    pub v_h1: f64,
    pub constraints: [f64; 2],
    pub condition: f64,
    pub boundary_warning: bool,
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub t: f64,
    pub e: f64,
    pub e_offset: f64,
    pub theta: f64,
    pub w: ComplexField,
}

/// `h(s) = e^{-i theta} (g2 + g3 + g4)` on a central window, one row per stored frame.
#[derive(Debug, Clone)]
pub struct SourceHistory {
    pub first_node: usize,
    pub frames: Vec<Vec<C>>,
}

/// Read-only view handed to an observer at every stored frame.
pub struct FrameView<'a> {
    pub record: &'a FrameRecord,
    pub u: &'a ComplexField,
    pub modulation: &'a ModulationState,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub records: Vec<FrameRecord>,
    pub snapshots: Vec<Snapshot>,
    pub sources: Option<SourceHistory>,
    pub ledger: LedgerValues,
    pub initial: ModulationState,
    pub final_state: NLSState,
    pub sponge: bool,
    pub dt_store: f64,
}

impl Trajectory {
    pub fn t_end(&self) -> f64 {
        self.records.last().map(|r| r.t).unwrap_or(0.0)
    }

    /// Record closest to time `t`.
    pub fn at(&self, t: f64) -> &FrameRecord {
        let i = ((t / self.dt_store).round() as usize).min(self.records.len() - 1);
        &self.records[i]
    }

    pub fn sup_v_h1(&self) -> f64 {
        self.records.iter().map(|r| r.v_h1).fold(0.0, f64::max)
    }

    pub fn sup_e_deviation(&self, e0: f64) -> f64 {
        self.records
            .iter()
            .map(|r| (r.e - e0).abs())
            .fold(0.0, f64::max)
    }
}

fn relabel(err: LabError, t: f64) -> LabError {
    match err {
        LabError::DecompositionLost { reason, .. } => LabError::DecompositionLost { t, reason },
        other => other,
    }
}

impl Experiment {
    /// Integrate the NLS flow; the decomposition and the ledger are updated at the storage
    /// cadence.
    pub fn run(
        &self,
        mut observer: Option<&mut dyn FnMut(&FrameView) -> Result<()>>,
    ) -> Result<Trajectory> {
        let cfg = &self.config;
        let grid = *self.grid();
        let stride = cfg.store_stride()?;
        let n_steps = (cfg.t_end / cfg.dt).round() as usize;
        let snap_stride = ((cfg.snapshot_every / cfg.dt_store).round() as usize).max(1);
        let fourier = Fourier::new(&grid);

        let u0 = self.initial_data()?;
        let mut state = NLSState::new(u0, &self.potential, self.params)?;
        let mut stepper = NlsStepper::new(&grid, &self.potential, self.params, cfg.dt, cfg.sponge)?;
        let mut ms =
            decompose(&state.u, cfg.e0, cfg.theta0, &self.table).map_err(|e| relabel(e, 0.0))?;
        let initial = ms.clone();
        let mut ledger = NormLedger::new(&grid, self.params.p, cfg.dt_store)?;

        let window = cfg.source_window.map(|hw| {
            let j0 = grid.nearest(-hw.abs());
            let j1 = grid.nearest(hw.abs()).max(j0);
            (j0, j1)
        });
        let mut sources = window.map(|(j0, _)| SourceHistory {
            first_node: j0,
            frames: Vec::new(),
        });
        let mut records = Vec::with_capacity(n_steps / stride + 1);
        let mut snapshots = Vec::new();

        let mut frame = |state: &NLSState,
                         ms: &ModulationState,
                         stepper: &NlsStepper,
                         index: usize|
         -> Result<()> {
            let st =
                modulation_rates(ms, &self.table, self.params).map_err(|e| relabel(e, state.t))?;
            let values = ledger.update(state.t, ms, &self.decomp)?;
            let drift = stepper.drift(state, state.u.values());
            let dv = fourier.derivative(ms.v.values(), 1);
            let v_h1 = ((ms
                .v
                .values()
                .iter()
                .chain(&dv)
                .map(|z| z.norm_sqr())
                .sum::<f64>())
                * grid.dx())
            .sqrt();
            let record = FrameRecord {
                t: state.t,
                e: ms.e,
                e_offset: ms.offset,
                theta: ms.theta,
                e_dot: st.e_dot,
                theta_dot_minus_e: st.theta_dot_minus_e,
                m: values.m,
                mass_drift: drift.mass,
                energy_drift: drift.energy,
                v_h1,
                constraints: ms.constraints,
                condition: st.condition,
                boundary_warning: !stepper.has_sponge()
                    && edge_mass_fraction(state.u.values()) > EDGE_MASS_TOL,
            };
            if let (Some(src), Some((j0, j1))) = (sources.as_mut(), window) {
                let rot = C::from_polar(1.0, -ms.theta);
                let row = (j0..=j1)
                    .map(|j| rot * (st.g2.values()[j] + st.g3.values()[j] + st.g4.values()[j]))
                    .collect();
                src.frames.push(row);
            }
            if index % snap_stride == 0 {
                snapshots.push(Snapshot {
                    t: state.t,
                    e: ms.e,
                    e_offset: ms.offset,
                    theta: ms.theta,
                    w: ms.w.clone(),
                });
            }
            if let Some(obs) = observer.as_mut() {
                obs(&FrameView {
                    record: &record,
                    u: &state.u,
                    modulation: ms,
                })?;
            }
            records.push(record);
            Ok(())
        };

        frame(&state, &ms, &stepper, 0)?;
        for k in 1..=n_steps {
            stepper.step(&mut state)?;
            state.t = k as f64 * cfg.dt;
            if k % stride == 0 {
                ms = decompose_offset(
                    &state.u,
                    ms.offset,
                    ms.theta + ms.e * cfg.dt_store,
                    &self.table,
                )
                .map_err(|e| relabel(e, state.t))?;
                frame(&state, &ms, &stepper, k / stride)?;
            }
        }
        Ok(Trajectory {
            records,
            snapshots,
            sources,
            ledger: ledger.values(),
            initial,
            final_state: state,
            sponge: cfg.sponge.is_some(),
            dt_store: cfg.dt_store,
        })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct AsymptoticOptions {
    /// Residuals are reported on `[0, trusted_fraction * T_end]`; near `T_end` the truncated
    /// Duhamel tail vanishes by construction.
    pub trusted_fraction: f64,
    /// Required `|E(T) - E(T/2)|`.
    pub cauchy_tol: f64,
    /// Horizon of the finite-time wave operator used for `v_+`.
    pub t_match: f64,
    pub wave_dt: f64,
}

impl Default for AsymptoticOptions {
    fn default() -> Self {
        Self {
            trusted_fraction: 0.5,
            cauchy_tol: 1e-3,
            t_match: 10.0,
            wave_dt: 0.01,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidualSample {
    pub t: f64,
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct AsymptoticProfile {
    pub e_plus: f64,
    pub e_cauchy: f64,
    pub w1: ComplexField,
    pub psi_plus: ComplexField,
    pub v_plus: ComplexField,
    pub scattering_residual: Vec<ResidualSample>,
    pub trusted_until: f64,
    pub monotone: bool,
    pub sponge: bool,
}

fn h1_on(f: &ComplexField, fourier: &Fourier, range: (f64, f64)) -> f64 {
    let d = fourier.derivative(f.values(), 1);
    let grid = f.grid();
    let s: f64 = (0..grid.n())
        .filter(|&j| {
            let x = grid.x(j);
            x >= range.0 && x <= range.1
        })
        .map(|j| f.values()[j].norm_sqr() + d[j].norm_sqr())
        .sum();
    (s * grid.dx()).sqrt()
}

/// Limit energy, the Duhamel correction `w1`, the free profile `v_+` and the
/// scattering residual series.
///
/// With `h = e^{-i theta}(g2 + g3 + g4)` and `D(t) = int_t^T e^{i(s-t)L} Q h(s) ds` (swept
/// backward from `T`, where outgoing waves in reversed time are absorbed by the same sponge),
/// `w1 = -i D(0)`, `psi_+ = Qw(0) + w1`, `v_+ = W^* psi_+`, and
/// `u(t) - e^{-i theta} phi_{E+} - e^{-itL} psi_+ = e^{-i theta}(phi_E - phi_{E+}) + Pw + i D(t)`.
pub fn extract_asymptotics(
    exp: &Experiment,
    traj: &Trajectory,
    opts: &AsymptoticOptions,
) -> Result<AsymptoticProfile> {
    let sources = traj
        .sources
        .as_ref()
        .ok_or_else(|| LabError::contract("the trajectory was run without source storage"))?;
    let grid = *exp.grid();
    let t_end = traj.t_end();
    let last = traj
        .records
        .last()
        .ok_or_else(|| LabError::contract("empty trajectory"))?;
    let e_plus = last.e;
    let e_cauchy = (last.e_offset - traj.at(0.5 * t_end).e_offset).abs();
    if !(e_cauchy < opts.cauchy_tol) {
        return Err(LabError::NotConverged(format!(
            "E(T) - E(T/2) = {e_cauchy:.3e} exceeds {:.1e}",
            opts.cauchy_tol
        )));
    }
    let dt = traj.dt_store;
    let mut prop = exp
        .decomp
        .split_step(dt, SplitScheme::Yoshida4, exp.config.sponge)?;
    let embed = |row: &[C]| -> Result<ComplexField> {
        let mut vals = vec![C::new(0.0, 0.0); grid.n()];
        vals[sources.first_node..sources.first_node + row.len()].copy_from_slice(row);
        exp.decomp.project_q(&ComplexField::from_parts(grid, vals))
    };
    let trusted_until = opts.trusted_fraction * t_end;
    let snap_at: Vec<usize> = traj
        .snapshots
        .iter()
        .map(|s| (s.t / dt).round() as usize)
        .collect();

    // backward sweep on conj(D) so the propagator runs forward
    let nf = sources.frames.len();
    let mut d_conj = vec![C::new(0.0, 0.0); grid.n()];
    let mut d_at = vec![None; traj.snapshots.len()];
    let mut qh_next = embed(&sources.frames[nf - 1])?.conj().into_values();
    if let Some(k) = snap_at.iter().position(|&i| i == nf - 1) {
        d_at[k] = Some(vec![C::new(0.0, 0.0); grid.n()]);
    }
    for i in (0..nf - 1).rev() {
        let qh = embed(&sources.frames[i])?.conj().into_values();
        d_conj
            .iter_mut()
            .zip(&qh_next)
            .for_each(|(d, q)| *d += 0.5 * dt * q);
        prop.step_in_place(&mut d_conj, dt);
        d_conj
            .iter_mut()
            .zip(&qh)
            .for_each(|(d, q)| *d += 0.5 * dt * q);
        qh_next = qh;
        if let Some(k) = snap_at.iter().position(|&s| s == i) {
            d_at[k] = Some(d_conj.iter().map(|z| z.conj()).collect::<Vec<C>>());
        }
    }
    let d0 = ComplexField::from_parts(grid, d_conj.iter().map(|z| z.conj()).collect());
    let w1 = d0.scale(C::new(0.0, -1.0));
    let qw0 = exp.decomp.project_q(&traj.initial.w)?;
    let psi_plus = &qw0 + &w1;
    let v_plus = wave_operator_adjoint(&exp.decomp, &psi_plus, opts.t_match, opts.wave_dt)?;

    let fourier = Fourier::new(&grid);
    let range = match exp.config.sponge {
        Some(s) => s.interior(&grid),
        None => (grid.x_min(), grid.x_max()),
    };
    let phi_plus = exp.table.eval_offset(last.e_offset)?.phi;
    let mut series = Vec::new();
    for (k, snap) in traj.snapshots.iter().enumerate() {
        if snap.t > trusted_until + 1e-9 {
            break;
        }
        let Some(d) = &d_at[k] else { continue };
        let (pw, _) = split(&exp.decomp, &snap.w)?;
        let phi_e = exp.table.eval_offset(snap.e_offset)?.phi;
        let rot = C::from_polar(1.0, -snap.theta);
        let vals = (0..grid.n())
            .map(|j| rot * (phi_e[j] - phi_plus[j]) + pw.values()[j] + C::i() * d[j])
            .collect();
        let r = ComplexField::from_parts(grid, vals);
        series.push(ResidualSample {
            t: snap.t,
            residual: h1_on(&r, &fourier, range),
        });
    }
    let monotone = series
        .windows(2)
        .all(|w| w[1].residual <= w[0].residual * (1.0 + 1e-9));
    Ok(AsymptoticProfile {
        e_plus,
        e_cauchy,
        w1,
        psi_plus,
        v_plus,
        scattering_residual: series,
        trusted_until,
        monotone,
        sponge: traj.sponge,
    })
}
