//! Uplink simulation of a multi-cell massive MIMO system under pilot
//! contamination, with matched-filter, in-cell MMSE and group-blind
//! receivers, plus the large-antenna closed forms they converge to.
//!
//! Core numerics are generic over [`Real`] (`f32` or `f64`); the aliases at
//! the crate root fix the scalar to `f64`, which is what the experiment
//! engine and the command-line tool use.

pub mod channel;
pub mod detect;
pub mod engine;
pub mod error;
pub mod estimation;
pub mod linalg;
pub mod metrics;
pub mod scalar;

pub use channel::{
    assemble_received, draw_channel_realization, synthesize_symbol_period, SymbolAlphabet,
};
pub use detect::{
    complement_basis, covariance, group_blind_detector, inner_mmse, matched_filter,
    outer_component, signal_basis, CovarianceInputs, CovarianceMode, DetectorKind, SubspaceMode,
};
pub use engine::{
    run_plan, seed_substream, ExperimentPlan, MetricsRecord, PointStatus, SinrEvaluation,
};
pub use error::{Error, Result};
pub use estimation::{estimate_channels, training_coefficient};
pub use scalar::Real;

pub type ScenarioConfig = channel::ScenarioConfig<f64>;
pub type ChannelRealization = channel::ChannelRealization<f64>;
pub type SymbolFrame = channel::SymbolFrame<f64>;
pub type PilotEstimate = estimation::PilotEstimate<f64>;
pub type DetectorBank = detect::DetectorBank<f64>;
pub type CovarianceModel = detect::CovarianceModel<f64>;
pub type SignalBasis = detect::SignalBasis<f64>;
pub type ComplementBasis = detect::ComplementBasis<f64>;
pub type SinrBreakdown = metrics::SinrBreakdown<f64>;
pub type AsymptoticReport = metrics::AsymptoticReport<f64>;
pub type Lemma1Coefficients = metrics::Lemma1Coefficients<f64>;
pub type RateEstimate = metrics::RateEstimate<f64>;
pub type CMatrix = linalg::CMatrix<f64>;
pub type CVector = linalg::CVector<f64>;

/// Single-precision variants.
pub mod f32 {
    pub type ScenarioConfig = crate::channel::ScenarioConfig<f32>;
    pub type ChannelRealization = crate::channel::ChannelRealization<f32>;
    pub type PilotEstimate = crate::estimation::PilotEstimate<f32>;
    pub type DetectorBank = crate::detect::DetectorBank<f32>;
    pub type CovarianceModel = crate::detect::CovarianceModel<f32>;
    pub type SinrBreakdown = crate::metrics::SinrBreakdown<f32>;
}
