use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Power-type nonlinearity `f(u) = alpha |u|^(p-1) u`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlinearityParams {
    pub p: f64,
    pub alpha: f64,
}

impl NonlinearityParams {
    /// `p >= 2` and `alpha = +-1`.
    pub fn new(p: f64, alpha: f64) -> Result<Self> {
        let s = Self { p, alpha };
        s.validate()?;
        Ok(s)
    }

    /// The focusing-free linear limit `alpha = 0`, only meaningful for the time stepper.
    pub fn linear() -> Self {
        Self { p: 3.0, alpha: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p.is_finite() && self.p >= 2.0) {
            return Err(LabError::contract(format!(
                "nonlinearity power p = {} must be >= 2",
                self.p
            )));
        }
        if self.alpha != 1.0 && self.alpha != -1.0 && self.alpha != 0.0 {
            return Err(LabError::contract(format!(
                "alpha = {} must be +1 or -1",
                self.alpha
            )));
        }
        Ok(())
    }

    pub fn is_linear(&self) -> bool {
        self.alpha == 0.0
    }

    #[inline]
    pub fn f(&self, u: Complex64) -> Complex64 {
        u * (self.alpha * u.norm().powf(self.p - 1.0))
    }

    /// `f` restricted to real arguments.
    #[inline]
    pub fn f_real(&self, u: f64) -> f64 {
        self.alpha * u.abs().powf(self.p - 1.0) * u
    }

    /// Sign of `E - E*` on the branch of positive solutions.
    pub fn side(&self) -> f64 {
        self.alpha
    }

    /// Error unless `e` lies strictly on the bifurcation side of `e_star`.
    pub fn check_side(&self, e: f64, e_star: f64) -> Result<()> {
        if self.is_linear() {
            return Err(LabError::contract(
                "the linear limit has no nonlinear bound states",
            ));
        }
        if (e - e_star) * self.alpha > 0.0 {
            Ok(())
        } else {
            Err(LabError::BifurcationSide(format!(
                "E = {e} with alpha = {} requires {} E* = {e_star}",
                self.alpha,
                if self.alpha > 0.0 { "E >" } else { "E <" }
            )))
        }
    }
}

impl Default for NonlinearityParams {
    fn default() -> Self {
        Self { p: 5.0, alpha: 1.0 }
    }
}
