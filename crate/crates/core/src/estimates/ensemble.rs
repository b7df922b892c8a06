use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::field::{ComplexField, SpatialGrid};

type C = Complex64;

/// `exp(-(x - center)^2 / (2 width^2) + i xi x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianPacket {
    pub center: f64,
    pub width: f64,
    pub xi: f64,
}

impl GaussianPacket {
    pub fn eval(&self, x: f64) -> C {
        let d = (x - self.center) / self.width;
        C::from_polar((-0.5 * d * d).exp(), self.xi * x)
    }

    pub fn sample(&self, grid: SpatialGrid) -> Result<ComplexField> {
        ComplexField::from_fn(grid, |x| self.eval(x))
    }
}

/// Randomized Gaussian packets drawn from a seeded ChaCha8 stream.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianEnsemble {
    pub size: usize,
    pub seed: u64,
    #[serde(default = "default_center")]
    pub center: (f64, f64),
    #[serde(default = "default_width")]
    pub width: (f64, f64),
    #[serde(default = "default_xi")]
    pub xi: (f64, f64),
}

fn default_center() -> (f64, f64) {
    (-10.0, 10.0)
}

fn default_width() -> (f64, f64) {
    (0.5, 2.0)
}

fn default_xi() -> (f64, f64) {
    (0.0, 4.0)
}

fn draw(rng: &mut ChaCha8Rng, (a, b): (f64, f64)) -> f64 {
    if a == b {
        a
    } else {
        rng.gen_range(a..b)
    }
}

fn check_range(name: &str, (a, b): (f64, f64)) -> Result<()> {
    if !(a.is_finite() && b.is_finite() && a <= b) {
        return Err(LabError::contract(format!(
            "{name} range [{a}, {b}] is invalid"
        )));
    }
    Ok(())
}

impl GaussianEnsemble {
    pub fn new(size: usize, seed: u64) -> Self {
        Self {
            size,
            seed,
            center: default_center(),
            width: default_width(),
            xi: default_xi(),
        }
    }

    pub fn packets(&self) -> Result<Vec<GaussianPacket>> {
        check_range("center", self.center)?;
        check_range("width", self.width)?;
        check_range("xi", self.xi)?;
        if !(self.width.0 > 0.0) {
            return Err(LabError::contract("widths must be positive"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        Ok((0..self.size)
            .map(|_| GaussianPacket {
                center: draw(&mut rng, self.center),
                width: draw(&mut rng, self.width),
                xi: draw(&mut rng, self.xi),
            })
            .collect())
    }

    pub fn fields(&self, grid: SpatialGrid) -> Result<Vec<ComplexField>> {
        self.packets()?.iter().map(|p| p.sample(grid)).collect()
    }
}

/// Separable source `g(t, x) = a(t) b(x)` with a Gaussian time envelope
/// `a(t) = exp(-(t - t_center)^2 / (2 t_width^2) - i omega t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourcePacket {
    pub space: GaussianPacket,
    pub t_center: f64,
    pub t_width: f64,
    pub omega: f64,
}

impl SourcePacket {
    pub fn envelope(&self, t: f64) -> C {
        let d = (t - self.t_center) / self.t_width;
        C::from_polar((-0.5 * d * d).exp(), -self.omega * t)
    }
}

/// Sources concentrated in space and time, drawn from a seeded ChaCha8 stream.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceEnsemble {
    pub space: GaussianEnsemble,
    #[serde(default = "default_t_center")]
    pub t_center: (f64, f64),
    #[serde(default = "default_t_width")]
    pub t_width: (f64, f64),
    #[serde(default = "default_omega")]
    pub omega: (f64, f64),
}

fn default_t_center() -> (f64, f64) {
    (4.0, 8.0)
}

fn default_t_width() -> (f64, f64) {
    (0.5, 1.5)
}

fn default_omega() -> (f64, f64) {
    (-2.0, 2.0)
}

impl SourceEnsemble {
    pub fn new(size: usize, seed: u64) -> Self {
        Self {
            space: GaussianEnsemble::new(size, seed),
            t_center: default_t_center(),
            t_width: default_t_width(),
            omega: default_omega(),
        }
    }

    pub fn packets(&self) -> Result<Vec<SourcePacket>> {
        check_range("t_center", self.t_center)?;
        check_range("t_width", self.t_width)?;
        check_range("omega", self.omega)?;
        if !(self.t_width.0 > 0.0) {
            return Err(LabError::contract("time widths must be positive"));
        }
        let space = self.space.packets()?;
        // a second stream so the spatial draws match the plain ensemble with the same seed
        let mut rng = ChaCha8Rng::seed_from_u64(self.space.seed ^ 0x005e_ed0f_7153);
        Ok(space
            .into_iter()
            .map(|sp| SourcePacket {
                space: sp,
                t_center: draw(&mut rng, self.t_center),
                t_width: draw(&mut rng, self.t_width),
                omega: draw(&mut rng, self.omega),
            })
            .collect())
    }
}
