//! Direct sampling of the energy-detector decision statistic.

use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

use crate::error::{Error, Result};

use super::detection::DetectorConfig;

/// One draw of the decision statistic: central chi-square with 2ν degrees of
/// freedom when `lambda == 0`, noncentral with noncentrality 2νλ otherwise.
pub fn simulate_decision_statistic<R: Rng + ?Sized>(cfg: &DetectorConfig, lambda: f64, rng: &mut R) -> Result<f64> {
    if !(lambda >= 0.0) || lambda.is_infinite() {
        return Err(Error::domain(format!("SNR must be finite and >= 0, got {lambda}")));
    }
    let dof = 2.0 * f64::from(cfg.nu);
    if lambda == 0.0 {
        let chi = ChiSquared::new(dof).map_err(|e| Error::domain(e.to_string()))?;
        return Ok(chi.sample(rng));
    }
    // (Z + √nc)² + χ²_{k-1}
    let shift = (dof * lambda).sqrt();
    let z: f64 = StandardNormal.sample(rng);
    let rest = ChiSquared::new(dof - 1.0).map_err(|e| Error::domain(e.to_string()))?;
    Ok((z + shift).powi(2) + rest.sample(rng))
}
