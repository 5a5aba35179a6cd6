//! Decision-curve analytics for binary risk prediction models.
//!
//! Net benefit, PPV curves with their treat-none / treat-all reference
//! curves, threshold-split calibration diagnostics, PPV feasibility bounds,
//! pairwise model comparison and bootstrap bands. Every metric is generic over
//! [`Scalar`]; `f64` is the default, `f32` and the exact rational [`Exact`] are
//! also supported.

pub mod calibration;
pub mod cli;
pub mod comparison;
pub mod curves;
pub mod equivalences;
pub mod error;
pub mod io;
pub mod metrics;
pub mod resampling;
pub mod scalar;

pub use calibration::{
    nb_decomposition, nb_gap_treat_all, nb_via_calibration, prevalence_identity_residual,
    threshold_calibration, CalibrationSummary,
};
pub use comparison::{compare_models, ppv_superiority_reference, ComparisonVerdict, Winner};
pub use curves::{
    decision_curve, generate_synthetic, miscalibration_scan, ppv_curve, Curve, CurveKind, CurvePoint,
    RiskDistribution, SyntheticSpec, ThresholdGrid,
};
pub use equivalences::{
    ppv_bounds_given_nb, ppv_from_nb, treat_all_reference_ppv, treat_none_reference,
    verdict_vs_defaults, BoundKind, DefaultsVerdict, PpvInterval,
};
pub use error::{Error, Result};
pub use metrics::{
    classify_at_threshold, intervention_utility, nb_equality_gap, net_benefit, net_benefit_treat_all,
    net_benefit_treat_none, ppv, PredictionRecord, PredictionSet, Threshold, ThresholdConfusion,
    UtilityWeights,
};
pub use resampling::{bootstrap_bands, BandMethod, BandSpec, CurveBand};
pub use scalar::{Exact, Scalar};

pub type PredictionSet32 = PredictionSet<f32>;
pub type ExactPredictionSet = PredictionSet<Exact>;
pub type Threshold32 = Threshold<f32>;
pub type ExactThreshold = Threshold<Exact>;
pub type ThresholdConfusion32 = ThresholdConfusion<f32>;
pub type ExactConfusion = ThresholdConfusion<Exact>;
pub type CalibrationSummary32 = CalibrationSummary<f32>;
pub type ExactCalibrationSummary = CalibrationSummary<Exact>;
pub type CurvePoint32 = CurvePoint<f32>;
pub type ExactCurvePoint = CurvePoint<Exact>;
pub type ExactPpvInterval = PpvInterval<Exact>;
pub type ExactComparisonVerdict = ComparisonVerdict<Exact>;
