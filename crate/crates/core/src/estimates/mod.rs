//! Mixed space-time norms and harnesses that estimate the best constants in the linear
//! dispersive and smoothing bounds over randomized ensembles.

mod ensemble;
mod harness;
mod mixed;

pub use ensemble::{GaussianEnsemble, GaussianPacket, SourceEnsemble, SourcePacket};
pub use harness::{
    christ_kiselev_ratio, local_smoothing_frequency_probe, local_smoothing_ratios, retarded_ratios,
    strichartz_ratio, verify_christ_kiselev, verify_local_smoothing, verify_local_smoothing_dual,
    verify_retarded, verify_strichartz, DualityReport, EstimateReport, FrequencyProbeRow,
    HarnessConfig, LocalSmoothingReport, RetardedReport,
};
pub use mixed::{mixed_norm, FieldHistory, MixedNormAccumulator, MixedNormSpec, Outer};
