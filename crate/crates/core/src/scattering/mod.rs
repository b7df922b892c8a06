//! Jost solutions, scattering data, resolvent kernels and the Born series.

mod born;
mod cutoff;
mod data;
mod jost;
mod resolvent;

pub use born::{born_kernel, BornOptions, BornResult};
pub use cutoff::CutoffSpec;
pub use data::{check_nonresonance, scattering_coefficients, NonresonanceReport, ScatteringData};
pub use jost::{
    log_k_grid, JostProfile, JostSolution, JostTable, WronskianEstimate, JOST_TAIL_TOL,
};
pub use resolvent::{
    free_kernel, spectral_k, ResolventKernel, ResolventKernelSample, Side, POLE_GUARD,
};
