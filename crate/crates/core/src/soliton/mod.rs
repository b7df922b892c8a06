//! Positive nonlinear bound states `phi'' + E phi = V phi + alpha |phi|^(p-1) phi` bifurcating
//! from the linear ground state.

mod branch;
mod newton;
mod params;

pub use branch::{
    continue_branch, initial_guess, BranchEval, BranchInterpolant, BranchOptions, EnergySpacing,
    SolitonBranch,
};
pub use newton::{newton_solve, NewtonOptions, NewtonSolution, POSITIVITY_FLOOR};
pub use params::NonlinearityParams;

/// `||phi'' + E phi - V phi - f(phi)||_{L^2}` for a real profile.
pub fn bvp_residual(
    phi: &crate::field::ComplexField,
    e: f64,
    potential: &crate::potentials::Potential,
    params: NonlinearityParams,
) -> f64 {
    let op = newton::BvpOperator::new(potential, phi.grid(), e, params);
    let r = op.residual(&phi.re());
    op.norm(&r)
}
