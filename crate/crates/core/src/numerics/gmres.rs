//! Restarted GMRES with right preconditioning for real linear systems.

use crate::error::{LabError, Result};

#[derive(Debug, Clone, Copy)]
pub struct GmresOptions {
    /// Stop when `||b - A x|| <= rel_tol ||b|| + abs_tol`.
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub restart: usize,
    pub max_iter: usize,
    /// On stagnation or iteration exhaustion, still accept `||r|| <= accept_rel ||b||`.
    pub accept_rel: f64,
}

impl Default for GmresOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-13,
            abs_tol: 0.0,
            restart: 60,
            max_iter: 600,
            accept_rel: 1e-13,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GmresOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn nrm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Solve `A x = b` where `apply_a` and `apply_m_inv` apply `A` and the preconditioner inverse.
pub fn gmres(
    mut apply_a: impl FnMut(&[f64]) -> Vec<f64>,
    mut apply_m_inv: impl FnMut(&[f64]) -> Vec<f64>,
    b: &[f64],
    x0: Option<&[f64]>,
    opts: &GmresOptions,
) -> Result<GmresOutcome> {
    let n = b.len();
    let mut x = x0.map(|v| v.to_vec()).unwrap_or_else(|| vec![0.0; n]);
    let bnorm = nrm(b);
    let target = opts.rel_tol * bnorm + opts.abs_tol;
    if bnorm == 0.0 {
        return Ok(GmresOutcome {
            x: vec![0.0; n],
            iterations: 0,
            residual: 0.0,
        });
    }
    let m = opts.restart.max(1);
    let mut iterations = 0;
    let mut last_beta = f64::INFINITY;
    loop {
        let ax = apply_a(&x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let beta = nrm(&r);
        if beta <= target {
            return Ok(GmresOutcome {
                x,
                iterations,
                residual: beta,
            });
        }
        // a restart cycle that gains less than 1% means round-off has taken over
        let stalled = beta > 0.99 * last_beta;
        last_beta = beta;
        if (stalled || iterations >= opts.max_iter)
            && beta <= opts.accept_rel * bnorm + opts.abs_tol
        {
            return Ok(GmresOutcome {
                x,
                iterations,
                residual: beta,
            });
        }
        if stalled || iterations >= opts.max_iter {
            return Err(LabError::solver(
                "GMRES did not reach its tolerance",
                format!("iterations = {iterations}, residual = {beta:e}, target = {target:e}"),
            ));
        }
        let mut v: Vec<Vec<f64>> = vec![r.iter().map(|ri| ri / beta).collect()];
        let mut z: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut h = vec![vec![0.0; m]; m + 1];
        let (mut cs, mut sn) = (vec![0.0; m], vec![0.0; m]);
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut used = 0;
        for j in 0..m {
            iterations += 1;
            let zj = apply_m_inv(&v[j]);
            let mut w = apply_a(&zj);
            z.push(zj);
            for _pass in 0..2 {
                for i in 0..=j {
                    let hij = dot(&w, &v[i]);
                    h[i][j] += hij;
                    w.iter_mut().zip(&v[i]).for_each(|(wk, vk)| *wk -= hij * vk);
                }
            }
            let hn = nrm(&w);
            h[j + 1][j] = hn;
            for i in 0..j {
                let t = cs[i] * h[i][j] + sn[i] * h[i + 1][j];
                h[i + 1][j] = -sn[i] * h[i][j] + cs[i] * h[i + 1][j];
                h[i][j] = t;
            }
            let d = (h[j][j] * h[j][j] + h[j + 1][j] * h[j + 1][j]).sqrt();
            if d == 0.0 {
                used = j;
                break;
            }
            cs[j] = h[j][j] / d;
            sn[j] = h[j + 1][j] / d;
            h[j][j] = d;
            h[j + 1][j] = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] *= cs[j];
            used = j + 1;
            if g[j + 1].abs() <= target || hn == 0.0 || iterations >= opts.max_iter {
                break;
            }
            v.push(w.iter().map(|wk| wk / hn).collect());
        }
        // back substitution
        let mut y = vec![0.0; used];
        for i in (0..used).rev() {
            let s: f64 = (i + 1..used).map(|k| h[i][k] * y[k]).sum();
            y[i] = (g[i] - s) / h[i][i];
        }
        for (yi, zi) in y.iter().zip(&z) {
            x.iter_mut().zip(zi).for_each(|(xk, zk)| *xk += yi * zk);
        }
    }
}
