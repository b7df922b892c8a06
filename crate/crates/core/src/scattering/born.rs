//! Truncated Born series for the resolvent kernel at high energy.
//!
//! Each iterate `phi_{j+1}(z) = int G(z - s) V(s) phi_j(s) ds` with `G(z) = e^{ik|z|}/(2ik)`
//! is split into a left and a right cumulative integral,
//! `2ik phi_{j+1}(z) = int_a^z e^{ik(z-s)} h(s) ds + int_z^b e^{ik(s-z)} h(s) ds`,
//! both advanced node by node with a fourth-order local rule, so one term costs O(nodes).

use num_complex::Complex64;

use super::cutoff::CutoffSpec;
use super::jost::JOST_TAIL_TOL;
use super::resolvent::{free_kernel, spectral_k, Side};
use crate::error::{LabError, Result};
use crate::potentials::Potential;

type C = Complex64;

#[derive(Debug, Clone, Copy)]
pub struct BornOptions {
    pub cutoff: CutoffSpec,
    /// Target node spacing of the quadrature.
    pub h_target: f64,
}

impl Default for BornOptions {
    fn default() -> Self {
        Self {
            cutoff: CutoffSpec::default(),
            h_target: 0.0025,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BornResult {
    pub value: C,
    /// Modulus of the last summed term at `(x, y)`: the convergence witness.
    pub last_term: f64,
    /// `|term_j(x, y)|` for each summed term.
    pub term_magnitudes: Vec<f64>,
    /// `sup |phi_{j+1}| / sup |phi_j|` over the support, for `j >= 1`.
    pub sup_ratios: Vec<f64>,
}

impl BornResult {
    /// Largest observed geometric ratio between successive iterates.
    pub fn decay_ratio(&self) -> f64 {
        self.sup_ratios.iter().copied().fold(0.0, f64::max)
    }
}

struct Nodes {
    s: Vec<f64>,
    /// `(first node, interval count, spacing)` per panel
    panels: Vec<(usize, usize, f64)>,
}

fn build_nodes(cuts: &[f64], h_target: f64) -> Nodes {
    let mut s = vec![cuts[0]];
    let mut panels = Vec::new();
    for w in cuts.windows(2) {
        let len = w[1] - w[0];
        let m = ((len / h_target).ceil() as usize).max(4);
        let h = len / m as f64;
        panels.push((s.len() - 1, m, h));
        for i in 1..=m {
            s.push(if i == m { w[1] } else { w[0] + i as f64 * h });
        }
    }
    Nodes { s, panels }
}

/// Local weights (times h/24) and node offsets for interval `i` of a panel with `m` intervals.
fn local_rule(i: usize, m: usize) -> ([f64; 4], isize) {
    if i == 0 {
        ([9.0, 19.0, -5.0, 1.0], 0)
    } else if i == m - 1 {
        ([1.0, -5.0, 19.0, 9.0], -2)
    } else {
        ([-1.0, 13.0, 13.0, -1.0], -1)
    }
}

/// One application of `phi -> int G(. - s) h(s) ds` evaluated on the nodes, also returning the
/// full left and right integrals needed to continue outside the support.
fn apply_green(nodes: &Nodes, h: &[C], k: C) -> (Vec<C>, C, C) {
    let n = nodes.s.len();
    let ik = C::new(0.0, 1.0) * k;
    let mut left = vec![C::new(0.0, 0.0); n];
    let mut right = vec![C::new(0.0, 0.0); n];
    for &(start, m, hs) in &nodes.panels {
        let phase = (ik * hs).exp();
        for i in 0..m {
            let (w, off) = local_rule(i, m);
            let base = (start as isize + i as isize + off) as usize;
            // left: int_{s_i}^{s_{i+1}} e^{ik(s_{i+1} - s)} h(s) ds
            let mut accl = C::new(0.0, 0.0);
            let mut accr = C::new(0.0, 0.0);
            for q in 0..4 {
                let node = base + q;
                let d = (start + i + 1) as f64 - node as f64; // in units of hs
                accl += w[q] * h[node] * (ik * hs * d).exp();
                let e = node as f64 - (start + i) as f64;
                accr += w[q] * h[node] * (ik * hs * e).exp();
            }
            let g = start + i;
            left[g + 1] = left[g] * phase + accl * (hs / 24.0);
            // right integrals are accumulated in a second pass below; store local piece
            right[g] = accr * (hs / 24.0);
        }
    }
    // right[z] = int_z^b e^{ik(s - z)} h ds, accumulated backward
    let mut acc = C::new(0.0, 0.0);
    let mut out_right = vec![C::new(0.0, 0.0); n];
    for &(start, m, hs) in nodes.panels.iter().rev() {
        let phase = (ik * hs).exp();
        for i in (0..m).rev() {
            let g = start + i;
            acc = acc * phase + right[g];
            out_right[g] = acc;
        }
    }
    let inv = C::new(0.0, 2.0) * k;
    let phi: Vec<C> = (0..n).map(|j| (left[j] + out_right[j]) / inv).collect();
    (phi, left[n - 1], out_right[0])
}

/// Partial sum of `n_terms` Born terms for the resolvent kernel at `(x, y)`.
pub fn born_kernel(
    potential: &Potential,
    x: f64,
    y: f64,
    lambda: f64,
    side: Side,
    n_terms: usize,
) -> Result<BornResult> {
    born_kernel_with(
        potential,
        x,
        y,
        lambda,
        side,
        n_terms,
        &BornOptions::default(),
    )
}

pub fn born_kernel_with(
    potential: &Potential,
    x: f64,
    y: f64,
    lambda: f64,
    side: Side,
    n_terms: usize,
    opts: &BornOptions,
) -> Result<BornResult> {
    if n_terms == 0 {
        return Err(LabError::contract("Born series needs at least one term"));
    }
    if lambda.abs() < opts.cutoff.threshold_lambda() {
        return Err(LabError::contract(format!(
            "|lambda| = {} is below the Born threshold {}",
            lambda.abs(),
            opts.cutoff.threshold_lambda()
        )));
    }
    let k = spectral_k(lambda, side)?;
    let g0 = free_kernel(x - y, k);
    let mut out = BornResult {
        value: g0,
        last_term: g0.norm(),
        term_magnitudes: vec![g0.norm()],
        sup_ratios: Vec::new(),
    };
    let (a, b) = potential.truncation(JOST_TAIL_TOL);
    if n_terms == 1 || potential.is_zero() || b <= a {
        return Ok(out);
    }
    let mut cuts = vec![a, b];
    cuts.extend(
        potential
            .breakpoints()
            .into_iter()
            .filter(|&c| c > a && c < b),
    );
    for p in [x, y] {
        if p > a && p < b {
            cuts.push(p);
        }
    }
    cuts.sort_by(|p, q| p.partial_cmp(q).expect("finite cut"));
    cuts.dedup_by(|p, q| (*p - *q).abs() < 1e-12);
    let nodes = build_nodes(&cuts, opts.h_target);
    let v: Vec<f64> = nodes.s.iter().map(|&s| potential.eval(s)).collect();
    // potential values at breakpoints: use the one-sided limit of the panel they bound
    let mut phi: Vec<C> = nodes.s.iter().map(|&s| free_kernel(s - y, k)).collect();
    let x_idx = nodes.s.iter().position(|&s| (s - x).abs() < 1e-12);
    let mut sup_prev = phi.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let ik = C::new(0.0, 1.0) * k;
    for j in 1..n_terms {
        let h: Vec<C> = phi.iter().zip(&v).map(|(p, vv)| p * *vv).collect();
        let (next, total_left, total_right) = apply_green(&nodes, &h, k);
        let term = match x_idx {
            Some(i) => next[i],
            None if x >= b => (ik * (x - b)).exp() * total_left / (C::new(0.0, 2.0) * k),
            None => (ik * (a - x)).exp() * total_right / (C::new(0.0, 2.0) * k),
        };
        let sup = next.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if j >= 2 {
            let ratio = if sup_prev > 0.0 { sup / sup_prev } else { 0.0 };
            if ratio >= 1.0 {
                return Err(LabError::Divergence(format!(
                    "Born iterates stop decaying at term {j} (ratio {ratio:.3})"
                )));
            }
            out.sup_ratios.push(ratio);
        }
        sup_prev = sup;
        out.value += term;
        out.last_term = term.norm();
        out.term_magnitudes.push(term.norm());
        phi = next;
    }
    Ok(out)
}
