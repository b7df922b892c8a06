use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use soliton_lab::dynamics::Perturbation;
use soliton_lab::field::SpatialGrid;
use soliton_lab::potentials::Potential;
use soliton_lab::soliton::NonlinearityParams;
use soliton_lab::spectrum::Sponge;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Scatter,
    Spectrum,
    Branch,
    Evolve,
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Scatter => "scatter",
            Command::Spectrum => "spectrum",
            Command::Branch => "branch",
            Command::Evolve => "evolve",
            Command::Verify => "verify",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
pub enum Lemma {
    #[serde(rename = "2.1")]
    #[value(name = "2.1")]
    Strichartz,
    #[serde(rename = "2.2")]
    #[value(name = "2.2")]
    LocalSmoothing,
    #[serde(rename = "2.3")]
    #[value(name = "2.3")]
    Retarded,
    #[serde(rename = "2.4")]
    #[value(name = "2.4")]
    ChristKiselev,
}

impl Lemma {
    pub fn id(self) -> &'static str {
        match self {
            Lemma::Strichartz => "2.1",
            Lemma::LocalSmoothing => "2.2",
            Lemma::Retarded => "2.3",
            Lemma::ChristKiselev => "2.4",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PotentialSection {
    /// `zero`, `sech2:D`, `gaussian:D,W`, `square_well:D,A` or `exp_decay:D,R`.
    pub spec: String,
    pub alpha_decay: Option<f64>,
}

impl Default for PotentialSection {
    fn default() -> Self {
        Self {
            spec: "sech2:-1.5".into(),
            alpha_decay: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub half_width: f64,
    pub n: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            half_width: 40.0,
            n: 1024,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NonlinearitySection {
    pub p: f64,
    pub alpha: f64,
}

impl Default for NonlinearitySection {
    fn default() -> Self {
        Self { p: 5.0, alpha: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScatterSection {
    pub k_min: f64,
    pub k_max: f64,
    pub k_count: usize,
}

impl Default for ScatterSection {
    fn default() -> Self {
        Self {
            k_min: 0.2,
            k_max: 10.0,
            k_count: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumSection {
    /// Times of the dispersive decay probe; empty skips it.
    pub decay_times: Vec<f64>,
    pub decay_dt: f64,
    pub decay_center: f64,
    pub decay_width: f64,
    pub decay_xi: f64,
}

impl Default for SpectrumSection {
    fn default() -> Self {
        Self {
            decay_times: Vec::new(),
            decay_dt: 0.02,
            decay_center: 0.0,
            decay_width: 1.0,
            decay_xi: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BranchSection {
    /// Range of `|E - E*|`.
    pub offset_min: f64,
    pub offset_max: f64,
    pub samples: usize,
}

impl Default for BranchSection {
    fn default() -> Self {
        Self {
            offset_min: 1e-4,
            offset_max: 1e-2,
            samples: 13,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolveSection {
    /// `|E0 - E*|`; the side is fixed by the sign of the nonlinearity.
    pub e_offset: f64,
    pub theta0: f64,
    pub t_end: f64,
    pub dt: f64,
    pub dt_store: f64,
    pub sponge: Option<Sponge>,
    pub perturbation: Perturbation,
    pub table_window: (f64, f64),
    pub table_samples: usize,
    pub snapshot_every: f64,
    /// Extract `E+`, `v+` and the scattering residual (keeps the sources on `|x| <= source_window`).
    pub asymptotics: bool,
    pub source_window: f64,
}

impl Default for EvolveSection {
    fn default() -> Self {
        Self {
            e_offset: 1e-2,
            theta0: 0.0,
            t_end: 50.0,
            dt: 1e-3,
            dt_store: 0.05,
            sponge: None,
            perturbation: Perturbation::None,
            table_window: (0.5, 2.0),
            table_samples: 12,
            snapshot_every: 5.0,
            asymptotics: false,
            source_window: 60.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifySection {
    pub lemma: Lemma,
    pub ensemble: usize,
    pub horizon: f64,
    pub dt: f64,
    pub dt_store: f64,
    pub sponge: Option<Sponge>,
}

impl Default for VerifySection {
    fn default() -> Self {
        Self {
            lemma: Lemma::Strichartz,
            ensemble: 50,
            horizon: 40.0,
            dt: 0.025,
            dt_store: 0.05,
            sponge: Some(Sponge {
                strength: 10.0,
                fraction: 0.1,
            }),
        }
    }
}

/// The TOML file: top-level `seed` and `output`, one section per module.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct ConfigFile {
    pub seed: u64,
    /// Where artifacts go; not part of the config hash.
    #[serde(skip_serializing)]
    pub output: Option<PathBuf>,
    pub potential: PotentialSection,
    pub grid: GridSection,
    pub nonlinearity: NonlinearitySection,
    pub scatter: ScatterSection,
    pub spectrum: SpectrumSection,
    pub branch: BranchSection,
    pub evolve: EvolveSection,
    pub verify: VerifySection,
}

impl ConfigFile {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }
}

/// A fully resolved run: the subcommand plus every parameter.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub command: Command,
    #[serde(flatten)]
    pub file: ConfigFile,
}

impl ExperimentConfig {
    pub fn new(command: Command, file: ConfigFile) -> Self {
        Self { command, file }
    }

    pub fn seed(&self) -> u64 {
        self.file.seed
    }

    pub fn output_dir(&self) -> PathBuf {
        self.file
            .output
            .clone()
            .unwrap_or_else(|| PathBuf::from("out"))
    }

    /// sha256 of the canonical JSON form, hex encoded.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn potential(&self) -> CliResult<Potential> {
        let v: Potential = self.file.potential.spec.parse()?;
        Ok(match self.file.potential.alpha_decay {
            Some(a) => v.with_alpha_decay(a)?,
            None => v,
        })
    }

    pub fn grid(&self) -> CliResult<SpatialGrid> {
        Ok(SpatialGrid::symmetric(
            self.file.grid.half_width,
            self.file.grid.n,
        )?)
    }

    pub fn params(&self) -> CliResult<NonlinearityParams> {
        Ok(NonlinearityParams::new(
            self.file.nonlinearity.p,
            self.file.nonlinearity.alpha,
        )?)
    }

    /// Schema checks that do not need any numerics.
    pub fn validate(&self) -> CliResult<()> {
        let bad = |m: String| Err(CliError::Config(m));
        self.potential()?;
        self.grid()?;
        self.params()?;
        let f = &self.file;
        match self.command {
            Command::Scatter => {
                let s = f.scatter;
                if !(s.k_min > 0.0 && s.k_max > s.k_min) || s.k_count < 2 {
                    return bad(format!(
                        "scatter needs 0 < k_min < k_max and k_count >= 2, got {s:?}"
                    ));
                }
            }
            Command::Spectrum => {
                let s = &f.spectrum;
                if !s.decay_times.is_empty()
                    && (s.decay_times.len() < 2 || s.decay_times.iter().any(|t| !(*t > 0.0)))
                {
                    return bad("decay_times needs at least two positive times".into());
                }
                if !(s.decay_dt > 0.0 && s.decay_width > 0.0) {
                    return bad("decay_dt and decay_width must be positive".into());
                }
            }
            Command::Branch => {
                let b = f.branch;
                if !(b.offset_min > 0.0 && b.offset_max > b.offset_min) || b.samples < 2 {
                    return bad(format!(
                        "branch needs 0 < offset_min < offset_max and samples >= 2, got {b:?}"
                    ));
                }
            }
            Command::Evolve => {
                let e = &f.evolve;
                if !(e.e_offset > 0.0
                    && e.t_end > 0.0
                    && e.dt > 0.0
                    && e.dt_store >= e.dt
                    && e.snapshot_every > 0.0)
                {
                    return bad("evolve needs positive e_offset, t_end, dt, snapshot_every and dt_store >= dt".into());
                }
                if e.asymptotics && !(e.source_window > 0.0) {
                    return bad("asymptotics needs a positive source_window".into());
                }
            }
            Command::Verify => {
                let v = f.verify;
                if v.ensemble == 0 || !(v.horizon > 0.0 && v.dt > 0.0 && v.dt_store >= v.dt) {
                    return bad(
                        "verify needs ensemble >= 1, horizon > 0 and dt_store >= dt > 0".into(),
                    );
                }
            }
        }
        Ok(())
    }
}
