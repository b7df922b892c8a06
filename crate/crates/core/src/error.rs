use thiserror::Error;

/// Every failure mode surfaced by the library.
#[derive(Debug, Error)]
pub enum LabError {
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("hypothesis violation: {0}")]
    Hypothesis(String),

    #[error("solver failure: {message} ({diagnostics})")]
    Solver {
        message: String,
        diagnostics: String,
    },

    #[error("accuracy check failed: {0}")]
    Accuracy(String),

    #[error("spectral parameter {lambda} is within {guard} of the eigenvalue {pole}")]
    PoleProximity { lambda: f64, pole: f64, guard: f64 },

    #[error("series diverges: {0}")]
    Divergence(String),

    #[error("not converged: {0}")]
    NotConverged(String),

    #[error("wrong bifurcation side: {0}")]
    BifurcationSide(String),

    #[error("continuation failed at E = {energy}: {reason}")]
    Continuation { energy: f64, reason: String },

    #[error("decomposition lost at t = {t}: {reason}")]
    DecompositionLost { t: f64, reason: String },

    #[error("modulation matrix is degenerate (condition number {0:e})")]
    ModulationDegeneracy(f64),

    #[error("boundary contamination: {0}")]
    BoundaryContamination(String),

    #[error("step size too large: {0}")]
    StepSize(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl LabError {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        LabError::Contract(msg.into())
    }

    pub(crate) fn solver(msg: impl Into<String>, diagnostics: impl Into<String>) -> Self {
        LabError::Solver {
            message: msg.into(),
            diagnostics: diagnostics.into(),
        }
    }

    /// True for failures caused by the input violating a mathematical assumption
    /// (as opposed to a numerical breakdown).
    pub fn is_hypothesis_violation(&self) -> bool {
        matches!(self, LabError::Hypothesis(_) | LabError::BifurcationSide(_))
    }

    /// True for contract and format problems that originate in the caller's input.
    pub fn is_usage(&self) -> bool {
        matches!(self, LabError::Contract(_) | LabError::Format(_))
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
