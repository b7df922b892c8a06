//! NLS time stepping, modulation decomposition around the soliton branch, the remainder's
//! source terms, the bootstrap norm ledger and the asymptotic profile of a run.

mod experiment;
mod ledger;
mod modulation;
mod nls;

pub use experiment::{
    extract_asymptotics, AsymptoticOptions, AsymptoticProfile, EvolutionConfig, Experiment,
    FrameRecord, FrameView, Perturbation, ResidualSample, Snapshot, SourceHistory, Trajectory,
};
pub use ledger::{LedgerValues, NormLedger};
pub use modulation::{
    decompose, decompose_offset, linearized_source, modulation_rates, nonlinear_remainder,
    residual_eq_v, ModulationState, SourceTerms, CONSTRAINT_TOL, MODULATION_COND_MAX,
};
pub use nls::{
    hamiltonian, mass, step_nls, Drift, NLSState, NlsStepper, ENERGY_DRIFT_TOL, MASS_DRIFT_TOL,
};
