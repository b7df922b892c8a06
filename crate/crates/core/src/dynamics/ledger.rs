use serde::Serialize;

use super::ModulationState;
use crate::error::{LabError, Result};
use crate::field::{bracket, ComplexField, Fourier, SpatialGrid};
use crate::spectrum::SpectralDecomposition;

/// Running trapezoid integral in time of a per-node quantity, for `L^inf_x L^2_t` norms.
#[derive(Debug, Clone)]
struct NodeAccumulator {
    sum: Vec<f64>,
    first: Vec<f64>,
    last: Vec<f64>,
}

impl NodeAccumulator {
    fn new(n: usize) -> Self {
        Self {
            sum: vec![0.0; n],
            first: Vec::new(),
            last: vec![0.0; n],
        }
    }

    fn push(&mut self, g: &[f64], dt: f64) {
        if self.first.is_empty() {
            self.first = g.to_vec();
        }
        self.sum.iter_mut().zip(g).for_each(|(s, x)| *s += dt * x);
        self.last.copy_from_slice(g);
    }

    /// `sqrt(max_x int |.|^2 dt)` and the maximizing node.
    fn sup_sqrt(&self, dt: f64) -> (f64, usize) {
        if self.first.is_empty() {
            return (0.0, 0);
        }
        let mut best = (0.0, 0);
        for j in 0..self.sum.len() {
            let val = self.sum[j] - 0.5 * dt * (self.first[j] + self.last[j]);
            if val > best.0 {
                best = (val, j);
            }
        }
        (best.0.max(0.0).sqrt(), best.1)
    }
}

/// Running trapezoid integral of a scalar time series.
#[derive(Debug, Clone, Default)]
struct ScalarAccumulator {
    sum: f64,
    first: Option<f64>,
    last: f64,
}

impl ScalarAccumulator {
    fn push(&mut self, g: f64, dt: f64) {
        self.first.get_or_insert(g);
        self.sum += dt * g;
        self.last = g;
    }

    fn value(&self, dt: f64) -> f64 {
        match self.first {
            None => 0.0,
            Some(f) => (self.sum - 0.5 * dt * (f + self.last)).max(0.0),
        }
    }
}

/// Current values of the six bootstrap quantities.
#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct LedgerValues {
    pub t: f64,
    /// `M1 .. M6`.
    pub m: [f64; 6],
    /// Where the `L^inf_x` norms of `M2`, `M3` (undifferentiated part) and `M6` peak.
    pub argmax_x: [f64; 3],
    /// Set when a maximizer sits in the outer 10% of the box.
    pub near_boundary: bool,
}

impl LedgerValues {
    pub fn sum(&self) -> f64 {
        self.m.iter().sum()
    }
}

/// Streaming evaluation of the bootstrap norms of the gauged remainder `w`:
///
/// * `M1 = sup |E - E*|`
/// * `M2 = ||<x>^{-3/2} Qw||_{L^inf_x L^2_t}`
/// * `M3 = ||Pw||_{L^inf_x L^2_t} + ||d_x Pw||_{L^inf_x L^2_t}`
/// * `M4 = max(||Qw||_{L^q_t W^{1,2p}_x}, ||Qw||_{L^inf_t H^1_x}) + ||Qw||_{L^4_t L^inf_x}`, `q = 4p/(p-1)`
/// * `M5 = max(||Pw||_{L^4_t W^{1,inf}_x}, ||Pw||_{L^inf_t H^1_x})`
/// * `M6 = ||d_x Qw||_{L^inf_x L^2_t}`
///
/// Frames must arrive at the fixed cadence `dt_store`; time integrals use the trapezoid rule.
#[derive(Debug, Clone)]
pub struct NormLedger {
    grid: SpatialGrid,
    fourier: Fourier,
    p: f64,
    dt_store: f64,
    frames: usize,
    t: f64,
    m1: f64,
    weight: Vec<f64>,
    a2: NodeAccumulator,
    a3: NodeAccumulator,
    a3d: NodeAccumulator,
    a6: NodeAccumulator,
    s4q: ScalarAccumulator,
    s4inf: ScalarAccumulator,
    s5: ScalarAccumulator,
    sup_q_h1: f64,
    sup_p_h1: f64,
}

fn lp(values: &[f64], r: f64, dx: f64) -> f64 {
    (values.iter().map(|x| x.abs().powf(r)).sum::<f64>() * dx).powf(1.0 / r)
}

impl NormLedger {
    pub fn new(grid: &SpatialGrid, p: f64, dt_store: f64) -> Result<Self> {
        if !(dt_store > 0.0) {
            return Err(LabError::contract("frame cadence must be positive"));
        }
        if !(p > 1.0) {
            return Err(LabError::contract("ledger exponent needs p > 1"));
        }
        let n = grid.n();
        Ok(Self {
            grid: *grid,
            fourier: Fourier::new(grid),
            p,
            dt_store,
            frames: 0,
            t: 0.0,
            m1: 0.0,
            weight: grid
                .nodes()
                .into_iter()
                .map(|x| bracket(x).powi(-3))
                .collect(),
            a2: NodeAccumulator::new(n),
            a3: NodeAccumulator::new(n),
            a3d: NodeAccumulator::new(n),
            a6: NodeAccumulator::new(n),
            s4q: ScalarAccumulator::default(),
            s4inf: ScalarAccumulator::default(),
            s5: ScalarAccumulator::default(),
            sup_q_h1: 0.0,
            sup_p_h1: 0.0,
        })
    }

    /// `q = 4p/(p-1)` from `4/q = 1 - 1/p`.
    pub fn q(&self) -> f64 {
        4.0 * self.p / (self.p - 1.0)
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    /// Add the next frame given `E - E*` and the split `w = Pw + Qw`.
    pub fn push_split(
        &mut self,
        t: f64,
        e_minus_estar: f64,
        pw: &ComplexField,
        qw: &ComplexField,
    ) -> Result<LedgerValues> {
        pw.check_same_grid(qw)?;
        if pw.grid() != &self.grid {
            return Err(LabError::contract("ledger and frame grids differ"));
        }
        let dt = self.dt_store;
        let dx = self.grid.dx();
        self.frames += 1;
        self.t = t;
        self.m1 = self.m1.max(e_minus_estar.abs());

        let dq = self.fourier.derivative(qw.values(), 1);
        let dp = self.fourier.derivative(pw.values(), 1);
        let q_abs: Vec<f64> = qw.values().iter().map(|z| z.norm()).collect();
        let p_abs: Vec<f64> = pw.values().iter().map(|z| z.norm()).collect();
        let dq_abs: Vec<f64> = dq.iter().map(|z| z.norm()).collect();
        let dp_abs: Vec<f64> = dp.iter().map(|z| z.norm()).collect();

        let sq = |v: &[f64]| v.iter().map(|x| x * x).collect::<Vec<f64>>();
        let q2 = sq(&q_abs);
        let weighted: Vec<f64> = q2.iter().zip(&self.weight).map(|(a, w)| a * w).collect();
        self.a2.push(&weighted, dt);
        self.a3.push(&sq(&p_abs), dt);
        self.a3d.push(&sq(&dp_abs), dt);
        self.a6.push(&sq(&dq_abs), dt);

        let r = 2.0 * self.p;
        let w1r = lp(&q_abs, r, dx) + lp(&dq_abs, r, dx);
        self.s4q.push(w1r.powf(self.q()), dt);
        let q_inf = q_abs.iter().cloned().fold(0.0, f64::max);
        self.s4inf.push(q_inf.powi(4), dt);
        let h1 = |a: &[f64], d: &[f64]| {
            ((sq(a).iter().sum::<f64>() + sq(d).iter().sum::<f64>()) * dx).sqrt()
        };
        self.sup_q_h1 = self.sup_q_h1.max(h1(&q_abs, &dq_abs));
        self.sup_p_h1 = self.sup_p_h1.max(h1(&p_abs, &dp_abs));
        let p_w1inf =
            p_abs.iter().cloned().fold(0.0, f64::max) + dp_abs.iter().cloned().fold(0.0, f64::max);
        self.s5.push(p_w1inf.powi(4), dt);
        Ok(self.values())
    }

    /// Split `ms.w` with the spectral projections and add it as the next frame.
    pub fn update(
        &mut self,
        t: f64,
        ms: &ModulationState,
        decomp: &SpectralDecomposition,
    ) -> Result<LedgerValues> {
        let pw = decomp.project_p(&ms.w)?;
        let qw = &ms.w - &pw;
        self.push_split(t, ms.offset, &pw, &qw)
    }

    pub fn values(&self) -> LedgerValues {
        let dt = self.dt_store;
        let (m2, j2) = self.a2.sup_sqrt(dt);
        let (m3a, j3) = self.a3.sup_sqrt(dt);
        let (m3b, _) = self.a3d.sup_sqrt(dt);
        let (m6, j6) = self.a6.sup_sqrt(dt);
        let q = self.q();
        let m4 =
            (self.s4q.value(dt).powf(1.0 / q)).max(self.sup_q_h1) + self.s4inf.value(dt).powf(0.25);
        let m5 = self.s5.value(dt).powf(0.25).max(self.sup_p_h1);
        let xs = [self.grid.x(j2), self.grid.x(j3), self.grid.x(j6)];
        let edge = 0.1 * self.grid.length();
        let near_boundary = [(m2, xs[0]), (m3a, xs[1]), (m6, xs[2])]
            .iter()
            .any(|&(m, x)| {
                m > 0.0 && (x - self.grid.x_min() < edge || self.grid.x_max() - x < edge)
            });
        LedgerValues {
            t: self.t,
            m: [self.m1, m2, m3a + m3b, m4, m5, m6],
            argmax_x: xs,
            near_boundary,
        }
    }
}

/// Gauged remainder split helper used by the experiment runner.
pub(crate) fn split(
    decomp: &SpectralDecomposition,
    w: &ComplexField,
) -> Result<(ComplexField, ComplexField)> {
    let pw = decomp.project_p(w)?;
    let qw = w - &pw;
    Ok((pw, qw))
}
