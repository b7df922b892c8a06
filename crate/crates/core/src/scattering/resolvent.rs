use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::jost::JostProfile;
use crate::error::{LabError, Result};
use crate::potentials::Potential;

type C = Complex64;

/// Minimum distance between a negative spectral parameter and an eigenvalue.
pub const POLE_GUARD: f64 = 1e-3;

/// Which boundary value of the resolvent is meant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    /// `lambda + i0`, `lambda > 0` (outgoing, `k = +sqrt(lambda)`).
    PlusI0,
    /// `lambda - i0`, `lambda > 0` (incoming, `k = -sqrt(lambda)`).
    MinusI0,
    /// `lambda < 0` (`k = i sqrt(-lambda)`).
    Negative,
}

/// Wavenumber associated with `(lambda, side)`.
pub fn spectral_k(lambda: f64, side: Side) -> Result<C> {
    if !lambda.is_finite() || lambda == 0.0 {
        return Err(LabError::contract(
            "spectral parameter must be finite and nonzero",
        ));
    }
    match side {
        Side::PlusI0 | Side::MinusI0 if lambda < 0.0 => {
            Err(LabError::contract("boundary values +-i0 need lambda > 0"))
        }
        Side::Negative if lambda > 0.0 => Err(LabError::contract("side Negative needs lambda < 0")),
        Side::PlusI0 => Ok(C::new(lambda.sqrt(), 0.0)),
        Side::MinusI0 => Ok(C::new(-lambda.sqrt(), 0.0)),
        Side::Negative => Ok(C::new(0.0, (-lambda).sqrt())),
    }
}

/// The free kernel `e^{ik|z|} / (2ik)`; equals `G1` for real `k` and `G2` for `k = i kappa`.
pub fn free_kernel(z: f64, k: C) -> C {
    (C::new(0.0, 1.0) * k * z.abs()).exp() / (C::new(0.0, 2.0) * k)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolventKernelSample {
    pub x: f64,
    pub y: f64,
    pub lambda: f64,
    pub side: Side,
    pub value: C,
    /// `d/dx` of the kernel; the mean of both one-sided limits at `x = y`.
    pub dvalue_dx: C,
}

/// Kernel of `(lambda - L)^{-1}`: `K(x, y) = f1(max(x,y), k) f2(min(x,y), k) / W(k)`.
#[derive(Debug, Clone)]
pub struct ResolventKernel {
    profile: JostProfile,
    w: C,
    lambda: f64,
    side: Side,
}

impl ResolventKernel {
    /// `eigenvalues` are the known negative eigenvalues, used for the pole guard.
    pub fn new(
        potential: &Potential,
        lambda: f64,
        side: Side,
        eigenvalues: &[f64],
    ) -> Result<Self> {
        let k = spectral_k(lambda, side)?;
        if side == Side::Negative {
            if let Some(&e) = eigenvalues
                .iter()
                .find(|&&e| (lambda - e).abs() < POLE_GUARD)
            {
                return Err(LabError::PoleProximity {
                    lambda,
                    pole: e,
                    guard: POLE_GUARD,
                });
            }
        }
        let profile = JostProfile::solve(potential, k)?;
        Self::from_profile(profile, lambda, side)
    }

    /// Reuse a profile already computed at the wavenumber of `(lambda, side)`.
    pub fn from_profile(profile: JostProfile, lambda: f64, side: Side) -> Result<Self> {
        let k = spectral_k(lambda, side)?;
        if (profile.k() - k).norm() > 1e-14 * (1.0 + k.norm()) {
            return Err(LabError::contract(
                "profile wavenumber does not match the spectral parameter",
            ));
        }
        let w = profile.wronskian()?.value;
        if w.norm() == 0.0 {
            return Err(LabError::PoleProximity {
                lambda,
                pole: lambda,
                guard: POLE_GUARD,
            });
        }
        Ok(Self {
            profile,
            w,
            lambda,
            side,
        })
    }

    pub fn wronskian(&self) -> C {
        self.w
    }

    pub fn sample(&self, x: f64, y: f64) -> ResolventKernelSample {
        let (hi, lo) = if x >= y { (x, y) } else { (y, x) };
        let (f1, df1) = self.profile.f1(hi);
        let (f2, df2) = self.profile.f2(lo);
        let value = f1 * f2 / self.w;
        let dvalue_dx = if x > y {
            df1 * f2 / self.w
        } else if x < y {
            f1 * df2 / self.w
        } else {
            0.5 * (df1 * f2 + f1 * df2) / self.w
        };
        ResolventKernelSample {
            x,
            y,
            lambda: self.lambda,
            side: self.side,
            value,
            dvalue_dx,
        }
    }
}
