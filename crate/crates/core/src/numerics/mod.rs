//! Detector numerics: special functions, detection probabilities, threshold
//! inversion, OR-rule fusion, ROC points and statistic sampling.

pub mod detection;
pub mod fusion;
pub mod quadrature;
pub mod roc;
pub mod special;
pub mod statistic;
pub mod threshold;

pub use detection::{
    pfa_from_threshold, pmd_average, pmd_average_rayleigh, pmd_instantaneous, ApproxMode, DetectionProbabilities,
    DetectorConfig, SnrDensity, Threshold, ThresholdMode,
};
pub use fusion::{branch_target, fusion_or, threshold_cooperative, threshold_cooperative_for};
pub use roc::{average_pfa_adaptive, roc_curve, roc_curve_for, RocMode, RocPoint};
pub use special::{
    bessel_i0e, marcum_q, marcum_q_complement, normal_cdf, normal_quantile, normal_sf, regularized_lower_gamma,
    regularized_upper_gamma,
};
pub use statistic::simulate_decision_statistic;
pub use threshold::{
    expected_pmd_mismatched, threshold_adaptive, threshold_fixed, threshold_for_density, threshold_mismatched,
};
