//! Numerics for one-dimensional Schrodinger operators `L = -d^2/dx^2 + V`
//! and the nonlinear Schrodinger flow `i u_t + u_xx = V u + alpha |u|^(p-1) u`.
//!
//! The crate is organised bottom-up:
//!
//! * [`field`]: periodic grids, complex fields, spectral derivatives, norms, I/O.
//! * [`potentials`]: the catalog of test potentials.
//! * [`scattering`]: Jost solutions, scattering data, resolvent kernels, Born series.
//! * [`spectrum`]: bound states, projections, linear propagators, wave operator.
//! * [`estimates`]: space-time mixed norms and empirical-constant harnesses.
//! * [`soliton`]: the nonlinear bound-state branch bifurcating from the ground state.
//! * [`dynamics`]: NLS time stepping, modulation decomposition, norm ledger, asymptotics.

pub mod dynamics;
pub mod error;
pub mod estimates;
pub mod field;
pub mod numerics;
pub mod potentials;
pub mod scattering;
pub mod soliton;
pub mod spectrum;

pub use error::{LabError, Result};
pub use field::{ComplexField, SpatialGrid};
pub use num_complex::Complex64;
