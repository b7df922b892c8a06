//! General-purpose numerical kernels shared by the physics modules.

mod fit;
mod gmres;
mod ode;
mod quad;
mod roots;

pub use fit::{linear_fit, LinearFit};
pub use gmres::{gmres, GmresOptions, GmresOutcome};
pub use ode::{dopri5, OdeOptions, OdeSolution};
pub use quad::{gauss_legendre, integrate_panels};
pub use roots::bisect;
