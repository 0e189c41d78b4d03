//! Receiver operating characteristic of fixed versus CSI-adaptive thresholds.

use crate::error::{Error, Result};

use super::detection::{pfa_from_threshold, DetectorConfig, SnrDensity};
use super::quadrature::Tolerance;
use super::threshold::{threshold_adaptive_with_tol, threshold_for_density};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RocMode {
    FixedThreshold,
    AdaptiveThreshold,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    pub p_fa: f64,
    pub p_md: f64,
}

/// The adaptive integrand already carries a bisection; it is resolved to
/// 1e-12 so the outer quadrature sees a smooth function.
const INNER_TOL: f64 = 1e-12;
const ROC_TOL: Tolerance = Tolerance::new(1e-12, 1e-8);

/// Average false-alarm probability of the adaptive detector, E_λ[p_FA(τ(λ))].
pub fn average_pfa_adaptive(cfg: &DetectorConfig, density: &SnrDensity) -> Result<f64> {
    density.expect(
        |l| pfa_from_threshold(cfg, threshold_adaptive_with_tol(cfg, l, INNER_TOL)?),
        ROC_TOL,
    )
}

/// ROC points for each miss-detection target in `targets` under Rayleigh fading.
pub fn roc_curve(mode: RocMode, cfg: &DetectorConfig, lambda_bar: f64, targets: &[f64]) -> Result<Vec<RocPoint>> {
    if !(lambda_bar > 0.0) {
        return Err(Error::domain(format!("mean SNR must be positive, got {lambda_bar}")));
    }
    roc_curve_for(mode, cfg, &SnrDensity::Exponential { mean: lambda_bar }, targets)
}

/// [`roc_curve`] for an arbitrary SNR density.
pub fn roc_curve_for(mode: RocMode, cfg: &DetectorConfig, density: &SnrDensity, targets: &[f64]) -> Result<Vec<RocPoint>> {
    if targets.is_empty() {
        return Err(Error::Empty("ROC target grid"));
    }
    if targets.iter().any(|&t| !(t > 0.0 && t < 1.0)) || targets.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain("ROC targets must be strictly increasing and lie in (0, 1)"));
    }
    targets
        .iter()
        .map(|&target| {
            let c = cfg.with_target(target);
            let p_fa = match mode {
                RocMode::FixedThreshold => pfa_from_threshold(&c, threshold_for_density(&c, density, target)?)?,
                RocMode::AdaptiveThreshold => average_pfa_adaptive(&c, density)?,
            };
            Ok(RocPoint { p_fa, p_md: target })
        })
        .collect()
}
