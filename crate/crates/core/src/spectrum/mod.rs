//! Discrete spectrum of `L = -d^2/dx^2 + V`, spectral projections and linear propagators.

mod bound;
mod decomposition;
mod dense;
mod propagator;

pub use bound::{find_bound_states, ground_state, BoundState};
pub use decomposition::{
    dispersive_decay_probe, wave_operator_adjoint, wave_operator_apply, Backend, DecayFit,
    SpectralDecomposition, WaveOperatorResult,
};
pub use dense::{dense_operator, DenseSpectrum, EIGEN_BACKEND_MAX_N};
pub use propagator::{
    edge_mass_fraction, Propagated, SplitScheme, SplitStepLinear, Sponge, EDGE_MASS_TOL,
};
