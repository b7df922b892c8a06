use num_complex::Complex64;

use crate::error::{LabError, Result};
use crate::numerics::{dopri5, OdeOptions, OdeSolution};
use crate::potentials::Potential;

type C = Complex64;

/// Tail tolerance defining the truncation points: `int_{x_trunc}^inf <y>|V| < JOST_TAIL_TOL`.
pub const JOST_TAIL_TOL: f64 = 1e-12;

const ZERO: C = C::new(0.0, 0.0);
const ONE: C = C::new(1.0, 0.0);

/// `(e^z - 1) / z`, accurate near zero.
fn phi1(z: C) -> C {
    if z.norm() < 1e-3 {
        ONE + z / 2.0 + z * z / 6.0 + z * z * z / 24.0
    } else {
        (z.exp() - ONE) / z
    }
}

/// Normalized Jost solutions `m1 = e^{-ikx} f1`, `m2 = e^{ikx} f2` at one wavenumber.
///
/// Inside `[x_left, x_right]` the profiles come from an adaptive integration of
/// `m1'' + 2ik m1' = V m1` (inward from `x_right`, `m1 = 1`, `m1' = 0`) and
/// `m2'' - 2ik m2' = V m2` (outward from `x_left`). Outside, `V` is negligible and the
/// profiles are continued with the exact free solutions.
#[derive(Debug, Clone)]
pub struct JostProfile {
    k: C,
    x_left: f64,
    x_right: f64,
    m1: Option<OdeSolution<2>>,
    m2: Option<OdeSolution<2>>,
    m1_left: (C, C),
    m2_right: (C, C),
}

fn integrate(
    potential: &Potential,
    k: C,
    sign: f64,
    from: f64,
    to: f64,
    opts: &OdeOptions,
) -> Result<OdeSolution<2>> {
    // m'' = V m - sign 2ik m'
    let two_ik = C::new(0.0, 2.0) * k * sign;
    let mut cuts: Vec<f64> = potential
        .breakpoints()
        .into_iter()
        .filter(|&c| c > from.min(to) && c < from.max(to))
        .collect();
    cuts.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));
    if to < from {
        cuts.reverse();
    }
    let mut pts = vec![from];
    pts.extend(cuts);
    pts.push(to);
    let mut y = [ONE, ZERO];
    let mut sol: Option<OdeSolution<2>> = None;
    for w in pts.windows(2) {
        let piece = dopri5(
            |x, s: &[C; 2]| [s[1], s[0] * potential.eval(x) - two_ik * s[1]],
            w[0],
            y,
            w[1],
            opts,
        )?;
        y = piece.eval(w[1]);
        match sol.as_mut() {
            Some(s) => s.extend(piece),
            None => sol = Some(piece),
        }
    }
    Ok(sol.expect("at least one piece"))
}

impl JostProfile {
    pub fn solve(potential: &Potential, k: C) -> Result<Self> {
        Self::solve_with(potential, k, &OdeOptions::default())
    }

    pub fn solve_with(potential: &Potential, k: C, opts: &OdeOptions) -> Result<Self> {
        if k.im < 0.0 {
            return Err(LabError::contract(format!(
                "Jost solutions need Im k >= 0, got k = {k}"
            )));
        }
        if !(k.re.is_finite() && k.im.is_finite()) {
            return Err(LabError::contract("wavenumber must be finite"));
        }
        let (x_left, x_right) = potential.truncation(JOST_TAIL_TOL);
        if potential.is_zero() || x_right <= x_left {
            return Ok(Self {
                k,
                x_left: 0.0,
                x_right: 0.0,
                m1: None,
                m2: None,
                m1_left: (ONE, ZERO),
                m2_right: (ONE, ZERO),
            });
        }
        let m1 = integrate(potential, k, 1.0, x_right, x_left, opts)?;
        let m2 = integrate(potential, k, -1.0, x_left, x_right, opts)?;
        let l = m1.eval(x_left);
        let r = m2.eval(x_right);
        Ok(Self {
            k,
            x_left,
            x_right,
            m1: Some(m1),
            m2: Some(m2),
            m1_left: (l[0], l[1]),
            m2_right: (r[0], r[1]),
        })
    }

    pub fn k(&self) -> C {
        self.k
    }

    /// Truncation interval on which the profiles were integrated.
    pub fn window(&self) -> (f64, f64) {
        (self.x_left, self.x_right)
    }

    /// `(m1, m1')` at `x`.
    pub fn m1(&self, x: f64) -> (C, C) {
        if x >= self.x_right {
            return (ONE, ZERO);
        }
        if x <= self.x_left {
            // m = A + B e^{-2ikx}
            let d = x - self.x_left;
            let z = C::new(0.0, -2.0) * self.k * d;
            let (m, dm) = self.m1_left;
            return (m + dm * d * phi1(z), dm * z.exp());
        }
        let s = self.m1.as_ref().expect("profile inside window").eval(x);
        (s[0], s[1])
    }

    /// `(m2, m2')` at `x`.
    pub fn m2(&self, x: f64) -> (C, C) {
        if x <= self.x_left {
            return (ONE, ZERO);
        }
        if x >= self.x_right {
            // m = A + B e^{2ikx}
            let d = x - self.x_right;
            let z = C::new(0.0, 2.0) * self.k * d;
            let (m, dm) = self.m2_right;
            return (m + dm * d * phi1(z), dm * z.exp());
        }
        let s = self.m2.as_ref().expect("profile inside window").eval(x);
        (s[0], s[1])
    }

    /// `(f1, f1')` with `f1 = e^{ikx} m1`.
    pub fn f1(&self, x: f64) -> (C, C) {
        let (m, dm) = self.m1(x);
        let e = (C::new(0.0, 1.0) * self.k * x).exp();
        (e * m, e * (C::new(0.0, 1.0) * self.k * m + dm))
    }

    /// `(f2, f2')` with `f2 = e^{-ikx} m2`.
    pub fn f2(&self, x: f64) -> (C, C) {
        let (m, dm) = self.m2(x);
        let e = (C::new(0.0, -1.0) * self.k * x).exp();
        (e * m, e * (C::new(0.0, -1.0) * self.k * m + dm))
    }

    /// `W = f1' f2 - f1 f2'` written through the m-profiles (no exponentials).
    pub fn wronskian_at(&self, x: f64) -> C {
        let (a, da) = self.m1(x);
        let (b, db) = self.m2(x);
        C::new(0.0, 2.0) * self.k * a * b + da * b - a * db
    }

    /// Points spread over the truncation window, used for x-independence checks.
    pub fn probe_points(&self, count: usize) -> Vec<f64> {
        if self.x_right <= self.x_left {
            return (0..count)
                .map(|i| i as f64 - (count as f64 - 1.0) / 2.0)
                .collect();
        }
        let (a, b) = (self.x_left, self.x_right);
        (0..count)
            .map(|i| a + (b - a) * (i as f64 + 0.5) / count as f64)
            .collect()
    }

    /// Wronskian averaged over 10 probe points, with its x-variation.
    pub fn wronskian_estimate(&self) -> WronskianEstimate {
        let vals: Vec<C> = self
            .probe_points(10)
            .into_iter()
            .map(|x| self.wronskian_at(x))
            .collect();
        let mean = vals.iter().sum::<C>() / vals.len() as f64;
        let variation = vals.iter().map(|w| (w - mean).norm()).fold(0.0, f64::max);
        WronskianEstimate {
            value: mean,
            variation,
        }
    }

    /// The Wronskian with the accuracy contract enforced: variation <= 1e-6 |W|.
    ///
    /// Near a zero of `W` the relative test is meaningless, so the reference magnitude
    /// is floored at `1e-6 (1 + |k|)`.
    pub fn wronskian(&self) -> Result<WronskianEstimate> {
        let est = self.wronskian_estimate();
        let scale = est.value.norm().max(1e-6 * (1.0 + self.k.norm()));
        if est.variation > 1e-6 * scale {
            return Err(LabError::Accuracy(format!(
                "Wronskian varies by {:.3e} across x at k = {} (|W| = {:.3e})",
                est.variation,
                self.k,
                est.value.norm()
            )));
        }
        Ok(est)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WronskianEstimate {
    pub value: C,
    /// Largest deviation from the mean over the probe points.
    pub variation: f64,
}

/// Jost profiles on a set of wavenumbers.
#[derive(Debug, Clone)]
pub struct JostSolution {
    profiles: Vec<JostProfile>,
}

/// Jost profiles sampled on an `(x, k)` product grid; arrays are indexed `[k][x]`.
#[derive(Debug, Clone)]
pub struct JostTable {
    pub x: Vec<f64>,
    pub k: Vec<C>,
    pub m1: Vec<Vec<C>>,
    pub m2: Vec<Vec<C>>,
    pub dm1_dx: Vec<Vec<C>>,
    pub dm2_dx: Vec<Vec<C>>,
}

impl JostSolution {
    /// Solve sequentially at every wavenumber.
    pub fn solve(potential: &Potential, ks: &[C]) -> Result<Self> {
        let profiles = ks
            .iter()
            .map(|&k| JostProfile::solve(potential, k))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { profiles })
    }

    /// Solve at every `k` in `ks` and at `-k`, as needed for reflection coefficients.
    pub fn solve_symmetric(potential: &Potential, ks: &[f64]) -> Result<Self> {
        let mut all = Vec::with_capacity(2 * ks.len());
        for &k in ks {
            all.push(C::new(k, 0.0));
            if k != 0.0 {
                all.push(C::new(-k, 0.0));
            }
        }
        Self::solve(potential, &all)
    }

    /// Assemble from independently computed profiles (e.g. a parallel map over k).
    pub fn from_profiles(profiles: Vec<JostProfile>) -> Self {
        Self { profiles }
    }

    pub fn profiles(&self) -> &[JostProfile] {
        &self.profiles
    }

    pub fn k_grid(&self) -> Vec<C> {
        self.profiles.iter().map(|p| p.k()).collect()
    }

    pub fn find(&self, k: C) -> Option<&JostProfile> {
        self.profiles.iter().find(|p| p.k() == k)
    }

    pub fn tabulate(&self, xs: &[f64]) -> JostTable {
        let mut t = JostTable {
            x: xs.to_vec(),
            k: self.k_grid(),
            m1: Vec::new(),
            m2: Vec::new(),
            dm1_dx: Vec::new(),
            dm2_dx: Vec::new(),
        };
        for p in &self.profiles {
            let (a, da): (Vec<C>, Vec<C>) = xs.iter().map(|&x| p.m1(x)).unzip();
            let (b, db): (Vec<C>, Vec<C>) = xs.iter().map(|&x| p.m2(x)).unzip();
            t.m1.push(a);
            t.dm1_dx.push(da);
            t.m2.push(b);
            t.dm2_dx.push(db);
        }
        t
    }
}

/// `count` log-spaced wavenumbers in `[k_min, k_max]`.
pub fn log_k_grid(k_min: f64, k_max: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![k_min];
    }
    let (a, b) = (k_min.ln(), k_max.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}
