//! Catalog of real, even test potentials.

use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::field::{bracket, ComplexField, SpatialGrid};
use crate::numerics::gauss_legendre;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialKind {
    Zero,
    /// `depth sech^2(x)`
    Sech2 {
        depth: f64,
    },
    /// `depth exp(-x^2 / width^2)`
    Gaussian {
        depth: f64,
        width: f64,
    },
    /// `depth` on `|x| < half_width`, zero outside
    SquareWell {
        depth: f64,
        half_width: f64,
    },
    /// `depth exp(-rate |x|)`
    ExpDecay {
        depth: f64,
        rate: f64,
    },
    /// Uniform samples on `[x_min, x_max]`, linearly interpolated, zero outside.
    /// Continuity is the caller's responsibility.
    Custom {
        x_min: f64,
        x_max: f64,
        samples: Vec<f64>,
    },
}

/// A real potential `V(x)`, optionally with a certified exponential decay rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Potential {
    #[serde(flatten)]
    kind: PotentialKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alpha_decay: Option<f64>,
}

fn finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(LabError::contract(format!(
            "potential parameter {name} must be finite"
        )))
    }
}

impl Potential {
    pub fn new(kind: PotentialKind) -> Result<Self> {
        match &kind {
            PotentialKind::Zero => {}
            PotentialKind::Sech2 { depth } => finite("depth", *depth)?,
            PotentialKind::Gaussian { depth, width } => {
                finite("depth", *depth)?;
                if !(*width > 0.0 && width.is_finite()) {
                    return Err(LabError::contract("gaussian width must be positive"));
                }
            }
            PotentialKind::SquareWell { depth, half_width } => {
                finite("depth", *depth)?;
                if !(*half_width > 0.0 && half_width.is_finite()) {
                    return Err(LabError::contract(
                        "square well half_width must be positive",
                    ));
                }
            }
            PotentialKind::ExpDecay { depth, rate } => {
                finite("depth", *depth)?;
                if !(*rate > 0.0 && rate.is_finite()) {
                    return Err(LabError::contract("exp_decay rate must be positive"));
                }
            }
            PotentialKind::Custom {
                x_min,
                x_max,
                samples,
            } => {
                finite("x_min", *x_min)?;
                finite("x_max", *x_max)?;
                if x_max <= x_min || samples.len() < 2 {
                    return Err(LabError::contract(
                        "custom potential needs x_min < x_max and >= 2 samples",
                    ));
                }
                if samples.iter().any(|s| !s.is_finite()) {
                    return Err(LabError::contract(
                        "custom potential samples must be finite",
                    ));
                }
            }
        }
        Ok(Self {
            kind,
            alpha_decay: None,
        })
    }

    pub fn zero() -> Self {
        Self {
            kind: PotentialKind::Zero,
            alpha_decay: None,
        }
    }

    pub fn sech2(depth: f64) -> Self {
        Self::new(PotentialKind::Sech2 { depth }).expect("finite depth")
    }

    pub fn gaussian(depth: f64, width: f64) -> Self {
        Self::new(PotentialKind::Gaussian { depth, width }).expect("valid gaussian")
    }

    pub fn square_well(depth: f64, half_width: f64) -> Self {
        Self::new(PotentialKind::SquareWell { depth, half_width }).expect("valid square well")
    }

    pub fn exp_decay(depth: f64, rate: f64) -> Self {
        Self::new(PotentialKind::ExpDecay { depth, rate }).expect("valid exp_decay")
    }

    /// The default stability-experiment potential `-1.5 sech^2(x)`.
    pub fn default_well() -> Self {
        Self::sech2(-1.5)
    }

    /// Attach an exponential decay rate `a` with `sup e^{a|x|} |V(x)| < inf`.
    pub fn with_alpha_decay(mut self, a: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(LabError::contract("alpha_decay must be positive"));
        }
        let ok = match &self.kind {
            PotentialKind::Zero
            | PotentialKind::Gaussian { .. }
            | PotentialKind::SquareWell { .. } => true,
            PotentialKind::Custom { .. } => true,
            PotentialKind::Sech2 { .. } => a <= 2.0,
            PotentialKind::ExpDecay { rate, .. } => a <= *rate,
        };
        if !ok {
            return Err(LabError::Hypothesis(format!(
                "sup e^(a|x|)|V| is infinite for a = {a} and this potential"
            )));
        }
        self.alpha_decay = Some(a);
        Ok(self)
    }

    pub fn kind(&self) -> &PotentialKind {
        &self.kind
    }

    pub fn alpha_decay(&self) -> Option<f64> {
        self.alpha_decay
    }

    pub fn is_zero(&self) -> bool {
        match &self.kind {
            PotentialKind::Zero => true,
            PotentialKind::Sech2 { depth }
            | PotentialKind::Gaussian { depth, .. }
            | PotentialKind::SquareWell { depth, .. }
            | PotentialKind::ExpDecay { depth, .. } => *depth == 0.0,
            PotentialKind::Custom { samples, .. } => samples.iter().all(|&s| s == 0.0),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match &self.kind {
            PotentialKind::Zero => 0.0,
            PotentialKind::Sech2 { depth } => {
                let e = (-2.0 * x.abs()).exp();
                depth * 4.0 * e / ((1.0 + e) * (1.0 + e))
            }
            PotentialKind::Gaussian { depth, width } => depth * (-(x / width).powi(2)).exp(),
            PotentialKind::SquareWell { depth, half_width } => {
                if x.abs() < *half_width {
                    *depth
                } else {
                    0.0
                }
            }
            PotentialKind::ExpDecay { depth, rate } => depth * (-rate * x.abs()).exp(),
            PotentialKind::Custom {
                x_min,
                x_max,
                samples,
            } => {
                if x < *x_min || x > *x_max {
                    return 0.0;
                }
                let h = (x_max - x_min) / (samples.len() - 1) as f64;
                let s = (x - x_min) / h;
                let j = (s.floor() as usize).min(samples.len() - 2);
                let t = s - j as f64;
                samples[j] * (1.0 - t) + samples[j + 1] * t
            }
        }
    }

    /// Points where `V` or its derivative jumps; ODE integrators restart there.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.kind {
            PotentialKind::SquareWell { half_width, .. } => vec![-half_width, *half_width],
            PotentialKind::ExpDecay { .. } => vec![0.0],
            PotentialKind::Custom {
                x_min,
                x_max,
                samples,
            } => {
                let h = (x_max - x_min) / (samples.len() - 1) as f64;
                (0..samples.len()).map(|j| x_min + j as f64 * h).collect()
            }
            _ => Vec::new(),
        }
    }

    /// `sup |V|`.
    pub fn sup_abs(&self) -> f64 {
        match &self.kind {
            PotentialKind::Zero => 0.0,
            PotentialKind::Sech2 { depth }
            | PotentialKind::Gaussian { depth, .. }
            | PotentialKind::SquareWell { depth, .. }
            | PotentialKind::ExpDecay { depth, .. } => depth.abs(),
            PotentialKind::Custom { samples, .. } => {
                samples.iter().fold(0.0, |m, s| m.max(s.abs()))
            }
        }
    }

    /// Real samples of `V` at the grid nodes.
    pub fn sample(&self, grid: &SpatialGrid) -> ComplexField {
        let v = grid
            .nodes()
            .into_iter()
            .map(|x| Complex64::new(self.eval(x), 0.0))
            .collect();
        ComplexField::new(*grid, v).expect("potential samples are finite")
    }

    pub fn sample_real(&self, grid: &SpatialGrid) -> Vec<f64> {
        grid.nodes().into_iter().map(|x| self.eval(x)).collect()
    }

    /// Radius beyond which `V` is identically zero, if any.
    fn compact_radius(&self) -> Option<f64> {
        match &self.kind {
            PotentialKind::Zero => Some(0.0),
            PotentialKind::SquareWell { half_width, .. } => Some(*half_width),
            PotentialKind::Custom { x_min, x_max, .. } => Some(x_min.abs().max(x_max.abs())),
            _ if self.is_zero() => Some(0.0),
            _ => None,
        }
    }

    /// Integral of `g(x)|V(x)|` over `[a, b]` by 8-point Gauss-Legendre on panels of width
    /// at most `h`, split at the breakpoints.
    fn integrate_abs(&self, g: impl Fn(f64) -> f64, a: f64, b: f64, h: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        let (xs, ws) = gauss_legendre(8);
        let mut cuts = vec![a];
        cuts.extend(self.breakpoints().into_iter().filter(|&c| c > a && c < b));
        cuts.push(b);
        let mut total = 0.0;
        for w in cuts.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let panels = ((hi - lo) / h).ceil().max(1.0) as usize;
            let ph = (hi - lo) / panels as f64;
            for p in 0..panels {
                let mid = lo + (p as f64 + 0.5) * ph;
                let s: f64 = xs
                    .iter()
                    .zip(&ws)
                    .map(|(x, wt)| {
                        let y = mid + 0.5 * ph * x;
                        wt * g(y) * self.eval(y).abs()
                    })
                    .sum();
                total += 0.5 * ph * s;
            }
        }
        total
    }

    /// A radius outside which `<x>|V|` is negligible (below 1e-40).
    fn far_radius(&self) -> f64 {
        if let Some(r) = self.compact_radius() {
            return r;
        }
        let mut r: f64 = 1.0;
        while r < 1e6 && bracket(r) * r * (self.eval(r).abs() + self.eval(-r).abs()) > 1e-40 {
            r *= 1.25;
        }
        r
    }

    /// Truncation points `(x_left, x_right)` with `int_{x_right}^inf <y>|V| < tol`
    /// and the mirrored condition on the left.
    pub fn truncation(&self, tol: f64) -> (f64, f64) {
        if let Some(r) = self.compact_radius() {
            return match &self.kind {
                PotentialKind::Custom { x_min, x_max, .. } => (*x_min, *x_max),
                _ => (-r, r),
            };
        }
        let far = self.far_radius();
        let step = 0.05;
        let find = |sign: f64| {
            let mut acc = 0.0;
            let mut x = far;
            while x > 0.0 {
                let lo = (x - step).max(0.0);
                let p = if sign > 0.0 {
                    self.integrate_abs(bracket, lo, x, step)
                } else {
                    self.integrate_abs(bracket, -x, -lo, step)
                };
                if acc + p >= tol {
                    return x;
                }
                acc += p;
                x = lo;
            }
            0.0
        };
        (-find(-1.0), find(1.0))
    }

    /// `int <x>^{weight_power} |V(x)| dx` over the grid box.
    ///
    /// A boundary contribution (outer 5% of the box on either side) above 1% of the total
    /// is taken as evidence that the integral diverges.
    pub fn weighted_moment(&self, grid: &SpatialGrid, weight_power: u32) -> Result<f64> {
        if weight_power > 2 {
            return Err(LabError::contract(format!(
                "weight_power must be 0, 1 or 2, got {weight_power}"
            )));
        }
        let w = |x: f64| match weight_power {
            0 => 1.0,
            1 => bracket(x),
            _ => 1.0 + x * x,
        };
        let (a, b) = (grid.x_min(), grid.x_max());
        let h = grid.dx().min(0.05);
        let total = self.integrate_abs(w, a, b, h);
        if total == 0.0 {
            return Ok(0.0);
        }
        let edge = 0.05 * grid.length();
        let boundary =
            self.integrate_abs(w, a, a + edge, h) + self.integrate_abs(w, b - edge, b, h);
        if boundary > 0.01 * total {
            return Err(LabError::Hypothesis(format!(
                "weighted moment looks divergent: boundary share {:.3e} of {total:.6e}",
                boundary / total
            )));
        }
        Ok(total)
    }

    /// `||V||_{L^1}` over the whole line (negligible far tails dropped).
    pub fn l1_norm(&self) -> f64 {
        let r = self.far_radius();
        match &self.kind {
            PotentialKind::Custom { x_min, x_max, .. } => {
                self.integrate_abs(|_| 1.0, *x_min, *x_max, 0.01)
            }
            _ => self.integrate_abs(|_| 1.0, -r, r, 0.01),
        }
    }

    /// `int_x^inf <y> |V(y)| dy`.
    pub fn tail_moment(&self, x: f64) -> f64 {
        let r = self.far_radius();
        let lo = match &self.kind {
            PotentialKind::Custom { x_max, .. } => *x_max,
            _ => r,
        };
        self.integrate_abs(bracket, x, x.max(lo), 0.01)
    }
}

impl FromStr for Potential {
    type Err = LabError;

    /// Parse `zero`, `sech2:D`, `gaussian:D,W`, `square_well:D,A` or `exp_decay:D,R`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, args) = s.split_once(':').unwrap_or((s, ""));
        let nums: Vec<f64> = if args.trim().is_empty() {
            Vec::new()
        } else {
            args.split(',')
                .map(|a| a.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| {
                    LabError::contract(format!("bad potential parameters {args:?}: {e}"))
                })?
        };
        let need = |k: usize| {
            if nums.len() == k {
                Ok(())
            } else {
                Err(LabError::contract(format!(
                    "potential {name} takes {k} parameter(s)"
                )))
            }
        };
        let kind = match name.trim() {
            "zero" => {
                need(0)?;
                PotentialKind::Zero
            }
            "sech2" => {
                need(1)?;
                PotentialKind::Sech2 { depth: nums[0] }
            }
            "gaussian" => {
                need(2)?;
                PotentialKind::Gaussian {
                    depth: nums[0],
                    width: nums[1],
                }
            }
            "square_well" => {
                need(2)?;
                PotentialKind::SquareWell {
                    depth: nums[0],
                    half_width: nums[1],
                }
            }
            "exp_decay" => {
                need(2)?;
                PotentialKind::ExpDecay {
                    depth: nums[0],
                    rate: nums[1],
                }
            }
            other => {
                return Err(LabError::contract(format!(
                    "unknown potential kind {other:?}"
                )))
            }
        };
        Potential::new(kind)
    }
}
