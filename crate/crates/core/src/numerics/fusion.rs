//! OR-rule hard-decision fusion of L independent detectors.

use crate::error::{Error, Result};

use super::detection::{DetectionProbabilities, DetectorConfig, SnrDensity, Threshold};
use super::threshold::threshold_for_density;

/// Fused probabilities when H₁ is declared if any of `branches` local decisions is H₁.
pub fn fusion_or(p: DetectionProbabilities, branches: u32) -> Result<DetectionProbabilities> {
    if branches < 1 {
        return Err(Error::domain("OR-rule fusion needs at least one branch"));
    }
    if branches == 1 {
        return Ok(p);
    }
    let l = branches as i32;
    DetectionProbabilities::new(p.p_md.powi(l), 1.0 - (1.0 - p.p_fa).powi(l))
}

/// Per-branch miss-detection target that makes the fused rate hit `target`.
pub fn branch_target(target: f64, branches: u32) -> f64 {
    target.powf(1.0 / f64::from(branches))
}

/// Fixed per-branch threshold whose fused Rayleigh-averaged miss rate equals the target.
pub fn threshold_cooperative(cfg: &DetectorConfig, lambda_bar: f64, branches: u32) -> Result<Threshold> {
    if !(lambda_bar > 0.0) {
        return Err(Error::domain(format!("mean SNR must be positive, got {lambda_bar}")));
    }
    threshold_cooperative_for(cfg, &SnrDensity::Exponential { mean: lambda_bar }, branches)
}

/// [`threshold_cooperative`] for an arbitrary per-branch SNR density.
pub fn threshold_cooperative_for(cfg: &DetectorConfig, density: &SnrDensity, branches: u32) -> Result<Threshold> {
    if branches < 1 {
        return Err(Error::domain("cooperative sensing needs at least one branch"));
    }
    threshold_for_density(cfg, density, branch_target(cfg.pmd_target, branches))
}
