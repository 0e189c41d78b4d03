//! Per-scenario detector setup, computed once before any slot runs.

use rayon::prelude::*;

use crate::channel::{FadingKind, FadingSpec};
use crate::error::{Error, Result};
use crate::numerics::{
    fusion_or, pfa_from_threshold, pmd_average, threshold_adaptive, threshold_cooperative_for, threshold_for_density,
    threshold_mismatched, ApproxMode, DetectionProbabilities, DetectorConfig, Threshold, ThresholdMode,
};

/// Interpolation nodes of a threshold table.
const TABLE_POINTS: usize = 1025;
/// Tables cover SNRs up to this many linear means; larger values are inverted directly.
const TABLE_SPAN: f64 = 50.0;

/// τ(x) sampled on a uniform grid over [0, `hi`] and linearly interpolated.
#[derive(Debug, Clone)]
pub(crate) struct ThresholdTable {
    step: f64,
    values: Vec<f64>,
}

impl ThresholdTable {
    fn build<F>(hi: f64, f: F) -> Result<Self>
    where
        F: Fn(f64) -> Result<Threshold> + Sync,
    {
        let step = hi / (TABLE_POINTS - 1) as f64;
        let values = (0..TABLE_POINTS)
            .into_par_iter()
            .map(|i| f(i as f64 * step).map(Threshold::value))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { step, values })
    }

    fn lookup(&self, x: f64) -> Option<Threshold> {
        let pos = x / self.step;
        let i = pos.floor() as usize;
        if i + 1 >= self.values.len() {
            return None;
        }
        let frac = pos - i as f64;
        let tau = self.values[i] + frac * (self.values[i + 1] - self.values[i]);
        Threshold::new(tau).ok()
    }
}

/// How each SU turns its CSI into a threshold and the reliability numbers
/// its belief update uses.
#[derive(Debug, Clone)]
pub(crate) enum SensingPlan {
    /// The true state is observed without error.
    Perfect,
    /// One threshold for every slot; beliefs use the fading-averaged probabilities.
    Fixed { tau: Threshold, average: DetectionProbabilities },
    /// Threshold from the realized λ. `table` is only built in exact mode,
    /// where inversion needs bisection.
    Adaptive { table: Option<ThresholdTable> },
    /// Threshold from the observation λ̂.
    Mismatched { nmse: f64, mean: f64, table: ThresholdTable },
    /// Per-branch threshold; beliefs use the fused averaged probabilities.
    Cooperative { branches: u32, tau: Threshold, fused: DetectionProbabilities },
}

impl SensingPlan {
    pub(crate) fn build(
        detector: &DetectorConfig,
        pu_su: &FadingSpec,
        perfect: bool,
        nmse: Option<f64>,
    ) -> Result<Self> {
        if perfect {
            return Ok(SensingPlan::Perfect);
        }
        let density = pu_su.density();
        match detector.threshold_mode {
            ThresholdMode::Fixed => {
                let tau = threshold_for_density(detector, &density, detector.pmd_target)?;
                let average =
                    DetectionProbabilities::new(pmd_average(detector, &density, tau)?, pfa_from_threshold(detector, tau)?)?;
                Ok(SensingPlan::Fixed { tau, average })
            }
            ThresholdMode::Adaptive => {
                let table = match detector.approx_mode {
                    ApproxMode::Gaussian => None,
                    ApproxMode::Exact => {
                        let hi = TABLE_SPAN * pu_su.mean_linear();
                        Some(ThresholdTable::build(hi, |l| threshold_adaptive(detector, l))?)
                    }
                };
                Ok(SensingPlan::Adaptive { table })
            }
            ThresholdMode::Mismatched => {
                let nmse = nmse.ok_or_else(|| Error::Validation("mismatched threshold mode needs mismatch.nmse".into()))?;
                let mean = match pu_su.kind {
                    FadingKind::RayleighIid { mean_snr_db } => crate::db_to_linear(mean_snr_db),
                    FadingKind::LognormalCorrelated { .. } => {
                        return Err(Error::Validation("mismatched CSI requires Rayleigh PU-to-SU fading".into()))
                    }
                };
                let table =
                    ThresholdTable::build(TABLE_SPAN * mean, |lh| threshold_mismatched(detector, lh, nmse, mean))?;
                Ok(SensingPlan::Mismatched { nmse, mean, table })
            }
            ThresholdMode::Cooperative { branches } => {
                let tau = threshold_cooperative_for(detector, &density, branches)?;
                let branch =
                    DetectionProbabilities::new(pmd_average(detector, &density, tau)?, pfa_from_threshold(detector, tau)?)?;
                Ok(SensingPlan::Cooperative { branches, tau, fused: fusion_or(branch, branches)? })
            }
        }
    }

    /// Threshold for one (SU, channel) pair given its CSI: λ for adaptive
    /// mode, λ̂ for mismatched mode. Other plans ignore `csi`.
    pub(crate) fn threshold(&self, detector: &DetectorConfig, csi: f64) -> Result<Threshold> {
        match self {
            SensingPlan::Perfect => Threshold::new(0.0),
            SensingPlan::Fixed { tau, .. } | SensingPlan::Cooperative { tau, .. } => Ok(*tau),
            SensingPlan::Adaptive { table } => match table.as_ref().and_then(|t| t.lookup(csi)) {
                Some(tau) => Ok(tau),
                None => threshold_adaptive(detector, csi),
            },
            SensingPlan::Mismatched { nmse, mean, table } => match table.lookup(csi) {
                Some(tau) => Ok(tau),
                None => threshold_mismatched(detector, csi, *nmse, *mean),
            },
        }
    }
}
