//! Periodic grids, complex fields and the scalar functionals built on them.

mod fourier;
mod grid;
pub mod io;
mod norms;
mod values;

pub use fourier::{spectral_derivative, Derivative, Fourier};
pub use grid::{SpatialGrid, WavenumberGrid};
pub use norms::{bracket, inner_product, norm, real_inner, NormKind};
pub use values::ComplexField;
