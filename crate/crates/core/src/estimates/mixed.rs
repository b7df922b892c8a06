use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::field::{bracket, ComplexField, SpatialGrid};

type C = Complex64;

/// Samples `f(t_k, x)` on a uniform time grid.
#[derive(Debug, Clone)]
pub struct FieldHistory {
    grid: SpatialGrid,
    t0: f64,
    dt: f64,
    frames: Vec<ComplexField>,
}

impl FieldHistory {
    /// Rejects non-uniform sample times, length mismatches and frames on other grids.
    pub fn new(grid: SpatialGrid, t_samples: &[f64], frames: Vec<ComplexField>) -> Result<Self> {
        if t_samples.len() != frames.len() {
            return Err(LabError::contract("one time sample per frame is required"));
        }
        if frames.iter().any(|f| *f.grid() != grid) {
            return Err(LabError::contract(
                "all frames must live on the history grid",
            ));
        }
        let (t0, dt) = match t_samples {
            [] => (0.0, 1.0),
            [t] => (*t, 1.0),
            [a, b, ..] => (*a, b - a),
        };
        if t_samples.len() > 1 {
            if !(dt > 0.0) {
                return Err(LabError::contract("time samples must increase"));
            }
            for (k, &t) in t_samples.iter().enumerate() {
                if (t - (t0 + k as f64 * dt)).abs() > 1e-9 * dt.max(t.abs()) {
                    return Err(LabError::contract("time samples must be uniform"));
                }
            }
        }
        Ok(Self {
            grid,
            t0,
            dt,
            frames,
        })
    }

    pub fn uniform(grid: SpatialGrid, t0: f64, dt: f64, frames: Vec<ComplexField>) -> Result<Self> {
        let t: Vec<f64> = (0..frames.len()).map(|k| t0 + k as f64 * dt).collect();
        Self::new(grid, &t, frames)
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn t_samples(&self) -> Vec<f64> {
        (0..self.frames.len())
            .map(|k| self.t0 + k as f64 * self.dt)
            .collect()
    }

    pub fn frames(&self) -> &[ComplexField] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}

/// Which variable carries the outer norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outer {
    X,
    T,
}

/// `|| <x>^w f ||` with an outer and an inner Lebesgue exponent; `f64::INFINITY` means sup.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixedNormSpec {
    pub outer: Outer,
    pub outer_exp: f64,
    pub inner_exp: f64,
    pub weight_power: f64,
}

impl MixedNormSpec {
    pub const LINF_X_L2_T: Self = Self {
        outer: Outer::X,
        outer_exp: f64::INFINITY,
        inner_exp: 2.0,
        weight_power: 0.0,
    };
    pub const L1_X_L2_T: Self = Self {
        outer: Outer::X,
        outer_exp: 1.0,
        inner_exp: 2.0,
        weight_power: 0.0,
    };
    pub const L4_T_LINF_X: Self = Self {
        outer: Outer::T,
        outer_exp: 4.0,
        inner_exp: f64::INFINITY,
        weight_power: 0.0,
    };
    pub const LINF_T_L2_X: Self = Self {
        outer: Outer::T,
        outer_exp: f64::INFINITY,
        inner_exp: 2.0,
        weight_power: 0.0,
    };
    pub const L2_T_L2_X: Self = Self {
        outer: Outer::T,
        outer_exp: 2.0,
        inner_exp: 2.0,
        weight_power: 0.0,
    };

    pub fn weighted(self, weight_power: f64) -> Self {
        Self {
            weight_power,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        for e in [self.outer_exp, self.inner_exp] {
            if !(e >= 1.0) {
                return Err(LabError::contract(format!(
                    "mixed-norm exponents must be >= 1, got {e}"
                )));
            }
        }
        if !self.weight_power.is_finite() {
            return Err(LabError::contract("weight power must be finite"));
        }
        Ok(())
    }
}

/// Trapezoid sum of a stream of samples; `max` when the exponent is infinite.
#[derive(Debug, Clone)]
struct TimeSum<T> {
    sum: T,
    first: Option<T>,
    last: T,
}

/// Mixed norm of a history fed one frame at a time; the value is available after every push.
#[derive(Debug, Clone)]
pub struct MixedNormAccumulator {
    spec: MixedNormSpec,
    dx: f64,
    dt: f64,
    range: (usize, usize),
    weight: Vec<f64>,
    frames: usize,
    nodes: TimeSum<Vec<f64>>,
    scalar: TimeSum<f64>,
}

impl MixedNormAccumulator {
    pub fn new(grid: &SpatialGrid, dt: f64, spec: MixedNormSpec) -> Result<Self> {
        Self::windowed(grid, dt, spec, (grid.x_min(), grid.x_max()))
    }

    /// Only nodes with `x` in `[a, b]` enter the spatial norm.
    pub fn windowed(
        grid: &SpatialGrid,
        dt: f64,
        spec: MixedNormSpec,
        (a, b): (f64, f64),
    ) -> Result<Self> {
        spec.validate()?;
        if !(dt > 0.0) {
            return Err(LabError::contract("time step must be positive"));
        }
        let j0 = (0..grid.n()).find(|&j| grid.x(j) >= a).unwrap_or(grid.n());
        let j1 = (0..grid.n())
            .rev()
            .find(|&j| grid.x(j) <= b)
            .map_or(0, |j| j + 1);
        if j1 <= j0 {
            return Err(LabError::contract("empty spatial window"));
        }
        let weight = (j0..j1)
            .map(|j| bracket(grid.x(j)).powf(spec.weight_power))
            .collect();
        let m = j1 - j0;
        Ok(Self {
            spec,
            dx: grid.dx(),
            dt,
            range: (j0, j1),
            weight,
            frames: 0,
            nodes: TimeSum {
                sum: vec![0.0; m],
                first: None,
                last: vec![0.0; m],
            },
            scalar: TimeSum {
                sum: 0.0,
                first: None,
                last: 0.0,
            },
        })
    }

    pub fn spec(&self) -> MixedNormSpec {
        self.spec
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn push(&mut self, frame: &[C]) {
        let (j0, j1) = self.range;
        let vals = &frame[j0..j1];
        let s = self.spec;
        self.frames += 1;
        match s.outer {
            Outer::X => {
                let r = s.inner_exp;
                let acc = &mut self.nodes;
                let first = acc.first.is_none();
                for ((k, z), w) in vals.iter().enumerate().zip(&self.weight) {
                    let a = z.norm() * w;
                    let g = if r.is_infinite() { a } else { a.powf(r) };
                    if r.is_infinite() {
                        acc.sum[k] = acc.sum[k].max(g);
                    } else {
                        acc.sum[k] += self.dt * g;
                    }
                    acc.last[k] = g;
                }
                if first {
                    acc.first = Some(acc.last.clone());
                }
            }
            Outer::T => {
                let r = s.inner_exp;
                let n = if r.is_infinite() {
                    vals.iter()
                        .zip(&self.weight)
                        .map(|(z, w)| z.norm() * w)
                        .fold(0.0, f64::max)
                } else {
                    (vals
                        .iter()
                        .zip(&self.weight)
                        .map(|(z, w)| (z.norm() * w).powf(r))
                        .sum::<f64>()
                        * self.dx)
                        .powf(1.0 / r)
                };
                let q = s.outer_exp;
                let g = if q.is_infinite() { n } else { n.powf(q) };
                let acc = &mut self.scalar;
                if q.is_infinite() {
                    acc.sum = acc.sum.max(g);
                } else {
                    acc.sum += self.dt * g;
                }
                acc.first.get_or_insert(g);
                acc.last = g;
            }
        }
    }

    pub fn value(&self) -> f64 {
        if self.frames == 0 {
            return 0.0;
        }
        let s = self.spec;
        let half = 0.5 * self.dt;
        match s.outer {
            Outer::X => {
                let acc = &self.nodes;
                let first = acc.first.as_ref().expect("frames pushed");
                let r = s.inner_exp;
                let inner = (0..acc.sum.len()).map(|k| {
                    if r.is_infinite() {
                        acc.sum[k]
                    } else {
                        (acc.sum[k] - half * (first[k] + acc.last[k]))
                            .max(0.0)
                            .powf(1.0 / r)
                    }
                });
                let q = s.outer_exp;
                if q.is_infinite() {
                    inner.fold(0.0, f64::max)
                } else {
                    (inner.map(|v| v.powf(q)).sum::<f64>() * self.dx).powf(1.0 / q)
                }
            }
            Outer::T => {
                let acc = &self.scalar;
                let q = s.outer_exp;
                if q.is_infinite() {
                    acc.sum
                } else {
                    let first = acc.first.expect("frames pushed");
                    (acc.sum - half * (first + acc.last)).max(0.0).powf(1.0 / q)
                }
            }
        }
    }
}

/// Mixed space-time norm of a stored history: trapezoid in `t`, periodic trapezoid or sup in `x`.
pub fn mixed_norm(h: &FieldHistory, spec: MixedNormSpec) -> Result<f64> {
    if h.is_empty() {
        return Err(LabError::contract("mixed norm of an empty history"));
    }
    let mut acc = MixedNormAccumulator::new(h.grid(), h.dt(), spec)?;
    for f in h.frames() {
        acc.push(f.values());
    }
    Ok(acc.value())
}
