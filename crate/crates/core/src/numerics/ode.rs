//! Dormand-Prince 5(4) with its fourth-order continuous extension.

use num_complex::Complex64;

use crate::error::{LabError, Result};

type C = Complex64;

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Smallest accepted step magnitude before giving up.
    pub h_min: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-12,
            atol: 1e-13,
            h_min: 1e-12,
            h_max: 0.25,
            max_steps: 2_000_000,
        }
    }
}

#[derive(Debug, Clone)]
struct Segment<const N: usize> {
    x0: f64,
    h: f64,
    r: [[C; N]; 5],
}

/// Dense solution of an ODE integrated with [`dopri5`]; may be assembled from pieces.
#[derive(Debug, Clone)]
pub struct OdeSolution<const N: usize> {
    segments: Vec<Segment<N>>,
    pub accepted: usize,
    pub rejected: usize,
}

impl<const N: usize> OdeSolution<N> {
    fn empty() -> Self {
        Self {
            segments: Vec::new(),
            accepted: 0,
            rejected: 0,
        }
    }

    /// Append a later piece integrated in the same direction.
    pub fn extend(&mut self, other: OdeSolution<N>) {
        self.segments.extend(other.segments);
        self.accepted += other.accepted;
        self.rejected += other.rejected;
    }

    fn lo_hi(s: &Segment<N>) -> (f64, f64) {
        let x1 = s.x0 + s.h;
        if s.h > 0.0 {
            (s.x0, x1)
        } else {
            (x1, s.x0)
        }
    }

    /// Covered interval `(min, max)`.
    pub fn span(&self) -> (f64, f64) {
        let a = Self::lo_hi(&self.segments[0]);
        let b = Self::lo_hi(self.segments.last().expect("non-empty solution"));
        (a.0.min(b.0), a.1.max(b.1))
    }

    /// Interpolated state at `x`, which must lie inside [`OdeSolution::span`] (clamped otherwise).
    pub fn eval(&self, x: f64) -> [C; N] {
        let forward = self.segments[0].h > 0.0;
        // segments are ordered along the integration direction
        let idx = self.segments.partition_point(|s| {
            let end = s.x0 + s.h;
            if forward {
                end < x
            } else {
                end > x
            }
        });
        let s = &self.segments[idx.min(self.segments.len() - 1)];
        let th = if s.h == 0.0 {
            0.0
        } else {
            ((x - s.x0) / s.h).clamp(0.0, 1.0)
        };
        let th1 = 1.0 - th;
        let mut y = [C::new(0.0, 0.0); N];
        for i in 0..N {
            y[i] = s.r[0][i]
                + th * (s.r[1][i] + th1 * (s.r[2][i] + th * (s.r[3][i] + th1 * s.r[4][i])));
        }
        y
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

fn comb<const N: usize>(y: &[C; N], h: f64, terms: &[(f64, &[C; N])]) -> [C; N] {
    let mut out = *y;
    for (c, k) in terms {
        if *c != 0.0 {
            for i in 0..N {
                out[i] += k[i] * (h * c);
            }
        }
    }
    out
}

/// Integrate `y' = f(x, y)` from `x0` to `x1` (either direction) with adaptive steps.
pub fn dopri5<const N: usize, F>(
    mut f: F,
    x0: f64,
    y0: [C; N],
    x1: f64,
    opts: &OdeOptions,
) -> Result<OdeSolution<N>>
where
    F: FnMut(f64, &[C; N]) -> [C; N],
{
    let mut sol = OdeSolution::empty();
    let span = x1 - x0;
    let dir = if span >= 0.0 { 1.0 } else { -1.0 };
    if span == 0.0 {
        sol.segments.push(Segment {
            x0,
            h: 0.0,
            r: [
                y0,
                [C::new(0.0, 0.0); N],
                [C::new(0.0, 0.0); N],
                [C::new(0.0, 0.0); N],
                [C::new(0.0, 0.0); N],
            ],
        });
        return Ok(sol);
    }
    let mut x = x0;
    let mut y = y0;
    let mut k1 = f(x, &y);
    let mut h = dir * (opts.h_max.min(span.abs())).min(1e-2);
    let mut steps = 0usize;
    loop {
        if (x1 - x) * dir <= 0.0 {
            break;
        }
        if steps >= opts.max_steps {
            return Err(LabError::solver(
                "ODE integration exceeded the step budget",
                format!(
                    "x = {x}, h = {h}, accepted = {}, rejected = {}",
                    sol.accepted, sol.rejected
                ),
            ));
        }
        steps += 1;
        let last = (x + h - x1) * dir >= 0.0;
        if last {
            h = x1 - x;
        }
        let k2 = f(x + C2 * h, &comb(&y, h, &[(A21, &k1)]));
        let k3 = f(x + C3 * h, &comb(&y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = f(
            x + C4 * h,
            &comb(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
        );
        let k5 = f(
            x + C5 * h,
            &comb(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = f(
            x + h,
            &comb(
                &y,
                h,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            ),
        );
        let y_new = comb(
            &y,
            h,
            &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
        );
        let x_new = if last { x1 } else { x + h };
        let k7 = f(x_new, &y_new);
        let mut err2 = 0.0;
        for i in 0..N {
            let e =
                (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * h;
            let sc = opts.atol + opts.rtol * y[i].norm().max(y_new[i].norm());
            err2 += (e.norm() / sc).powi(2);
        }
        let err = (err2 / N as f64).sqrt();
        if !err.is_finite() {
            return Err(LabError::solver(
                "non-finite ODE state",
                format!("x = {x}, h = {h}"),
            ));
        }
        if err <= 1.0 {
            let mut r = [[C::new(0.0, 0.0); N]; 5];
            for i in 0..N {
                let ydiff = y_new[i] - y[i];
                let bspl = k1[i] * h - ydiff;
                r[0][i] = y[i];
                r[1][i] = ydiff;
                r[2][i] = bspl;
                r[3][i] = ydiff - k7[i] * h - bspl;
                r[4][i] =
                    (k1[i] * D1 + k3[i] * D3 + k4[i] * D4 + k5[i] * D5 + k6[i] * D6 + k7[i] * D7)
                        * h;
            }
            sol.segments.push(Segment { x0: x, h, r });
            sol.accepted += 1;
            x = x_new;
            y = y_new;
            k1 = k7;
            if last {
                break;
            }
            let fac = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h = dir * (h.abs() * fac).min(opts.h_max);
        } else {
            sol.rejected += 1;
            let fac = (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            h *= fac;
            if h.abs() < opts.h_min {
                return Err(LabError::solver(
                    "ODE step size fell below the rejection floor",
                    format!("x = {x}, h = {h:e}, err = {err:e}"),
                ));
            }
        }
    }
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_dense_output() {
        // y'' = -y as a first-order system, y(0) = 0, y'(0) = 1
        let f = |_x: f64, y: &[C; 2]| [y[1], -y[0]];
        let sol = dopri5(
            f,
            0.0,
            [C::new(0.0, 0.0), C::new(1.0, 0.0)],
            10.0,
            &OdeOptions::default(),
        )
        .unwrap();
        for i in 0..=96 {
            let x = 0.1031 * i as f64;
            let y = sol.eval(x);
            assert!((y[0].re - x.sin()).abs() < 1e-10, "x = {x}");
            assert!((y[1].re - x.cos()).abs() < 1e-10, "x = {x}");
        }
    }

    #[test]
    fn backward_complex_exponential() {
        let k = C::new(0.0, 3.0);
        let f = move |_x: f64, y: &[C; 1]| [k * y[0]];
        let sol = dopri5(f, 2.0, [C::new(1.0, 0.0)], -1.0, &OdeOptions::default()).unwrap();
        for &x in &[2.0, 1.3, 0.0, -0.77, -1.0] {
            let exact = (k * (x - 2.0)).exp();
            assert!((sol.eval(x)[0] - exact).norm() < 1e-10);
        }
    }
}
