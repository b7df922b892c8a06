use serde::{Deserialize, Serialize};

/// Smooth even cutoff `chi_M(x) = chi(|x| - M)`, with `chi = 0` on `(-inf, 1]` and
/// `chi = 1` on `[2, inf)`; `M^2` is the high-energy threshold for the Born series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffSpec {
    pub m: f64,
}

impl Default for CutoffSpec {
    fn default() -> Self {
        Self { m: 5.0 }
    }
}

fn psi(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        (-1.0 / s).exp()
    }
}

/// The smooth step: 0 for `t <= 1`, 1 for `t >= 2`.
pub fn smooth_step(t: f64) -> f64 {
    let s = t - 1.0;
    let a = psi(s);
    let b = psi(1.0 - s);
    if a + b == 0.0 {
        return if s >= 1.0 { 1.0 } else { 0.0 };
    }
    a / (a + b)
}

impl CutoffSpec {
    pub fn new(m: f64) -> Self {
        Self { m }
    }

    pub fn chi(&self, x: f64) -> f64 {
        smooth_step(x.abs() - self.m)
    }

    pub fn chi_tilde(&self, x: f64) -> f64 {
        1.0 - self.chi(x)
    }

    /// Smallest `|lambda|` admitted by the Born series.
    pub fn threshold_lambda(&self) -> f64 {
        self.m * self.m
    }

    /// `(x, chi_M(x))` samples across the transition region `[M, M + 3]`.
    pub fn profile(&self, count: usize) -> Vec<(f64, f64)> {
        let count = count.max(2);
        (0..count)
            .map(|i| {
                let x = self.m + 3.0 * i as f64 / (count - 1) as f64;
                (x, self.chi(x))
            })
            .collect()
    }
}
