//! Threshold inversion: find τ such that the relevant miss-detection
//! probability equals the prescribed target.
//!
//! All inverted functions are non-decreasing in τ and vanish at τ = 0, so a
//! bracket-then-bisect search is sufficient and always safe.

use crate::channel::{conditional_breakpoints, conditional_pdf};
use crate::error::{Error, Result};

use super::detection::{pmd_average, pmd_instantaneous, ApproxMode, DetectorConfig, SnrDensity, Threshold, AVERAGE_TOL};
use super::quadrature::try_integrate;
use super::special::normal_quantile;

/// Probability tolerance of every inversion.
pub const PROB_TOL: f64 = 1e-9;
const MAX_BISECTIONS: usize = 200;
/// The search never looks beyond ten times the H₁ mean at the largest SNR considered.
const LIMIT_FACTOR: f64 = 10.0;

/// Smallest τ ≥ 0 (to `prob_tol`) with `pmd(τ) = target`.
pub(crate) fn invert_pmd<F>(mut pmd: F, target: f64, start: f64, limit: f64, prob_tol: f64) -> Result<Threshold>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::domain(format!("target probability must lie in (0, 1), got {target}")));
    }
    let mut lo = 0.0;
    let mut hi = start.max(1.0).min(limit);
    loop {
        let v = pmd(hi)?;
        if (v - target).abs() <= prob_tol {
            return Threshold::new(hi);
        }
        if v > target {
            break;
        }
        lo = hi;
        if hi >= limit {
            return Err(Error::Bracketing { target, limit });
        }
        hi = (2.0 * hi).min(limit);
    }
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        let v = pmd(mid)?;
        if (v - target).abs() <= prob_tol {
            return Threshold::new(mid);
        }
        if v < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            // The target sits on a jump at floating-point resolution.
            return Threshold::new(mid);
        }
    }
    Err(Error::Convergence { what: "threshold bisection", iterations: MAX_BISECTIONS })
}

fn search_range(cfg: &DetectorConfig, lambda_max: f64) -> (f64, f64) {
    let nu = f64::from(cfg.nu);
    (2.0 * nu, 2.0 * nu * (1.0 + lambda_max) * LIMIT_FACTOR)
}

/// Threshold meeting `target` for the miss-detection rate averaged over `density`.
pub fn threshold_for_density(cfg: &DetectorConfig, density: &SnrDensity, target: f64) -> Result<Threshold> {
    density.validate()?;
    let (start, limit) = search_range(cfg, density.upper_support());
    invert_pmd(|tau| pmd_average(cfg, density, Threshold::new(tau)?), target, start, limit, PROB_TOL)
}

/// Conventional fixed threshold: inverts the Rayleigh-averaged miss-detection rate.
pub fn threshold_fixed(cfg: &DetectorConfig, lambda_bar: f64) -> Result<Threshold> {
    if !(lambda_bar > 0.0) {
        return Err(Error::domain(format!("mean SNR must be positive, got {lambda_bar}")));
    }
    threshold_for_density(cfg, &SnrDensity::Exponential { mean: lambda_bar }, cfg.pmd_target)
}

/// Threshold adapted to the instantaneous SNR `lambda`.
///
/// Gaussian mode uses the closed form μ₁ + σ₁Φ⁻¹(target), clamped at zero;
/// exact mode bisects the Marcum-Q miss-detection probability.
pub fn threshold_adaptive(cfg: &DetectorConfig, lambda: f64) -> Result<Threshold> {
    threshold_adaptive_with_tol(cfg, lambda, PROB_TOL)
}

pub(crate) fn threshold_adaptive_with_tol(cfg: &DetectorConfig, lambda: f64, prob_tol: f64) -> Result<Threshold> {
    if !(lambda >= 0.0) || lambda.is_infinite() {
        return Err(Error::domain(format!("SNR must be finite and >= 0, got {lambda}")));
    }
    match cfg.approx_mode {
        ApproxMode::Gaussian => {
            let (mean, sd) = cfg.statistic_moments(lambda);
            Threshold::new((mean + sd * normal_quantile(cfg.pmd_target)).max(0.0))
        }
        ApproxMode::Exact => {
            let (start, limit) = search_range(cfg, lambda);
            let start = start * (1.0 + lambda);
            invert_pmd(
                |tau| pmd_instantaneous(cfg, lambda, Threshold::new(tau)?),
                cfg.pmd_target,
                start,
                limit,
                prob_tol,
            )
        }
    }
}

/// Miss-detection probability expected under the conditional density of the
/// true SNR given the observation `lambda_hat`.
pub fn expected_pmd_mismatched(
    cfg: &DetectorConfig,
    lambda_hat: f64,
    nmse: f64,
    lambda_bar: f64,
    tau: Threshold,
) -> Result<f64> {
    check_mismatch_args(lambda_hat, nmse, lambda_bar)?;
    if nmse == 0.0 {
        return pmd_instantaneous(cfg, lambda_hat, tau);
    }
    if tau.value() == 0.0 {
        return Ok(0.0);
    }
    let pts = conditional_breakpoints(lambda_hat, nmse, lambda_bar);
    let p = try_integrate(
        |l| Ok(pmd_instantaneous(cfg, l, tau)? * conditional_pdf(l, lambda_hat, nmse, lambda_bar)?),
        &pts,
        AVERAGE_TOL,
    )?;
    Ok(p.clamp(0.0, 1.0))
}

/// Threshold from a mismatched SNR observation: inverts the miss-detection
/// probability averaged over f(λ | λ̂).
pub fn threshold_mismatched(cfg: &DetectorConfig, lambda_hat: f64, nmse: f64, lambda_bar: f64) -> Result<Threshold> {
    check_mismatch_args(lambda_hat, nmse, lambda_bar)?;
    if nmse == 0.0 {
        return threshold_adaptive(cfg, lambda_hat);
    }
    let pts = conditional_breakpoints(lambda_hat, nmse, lambda_bar);
    let (start, limit) = search_range(cfg, *pts.last().expect("breakpoints are non-empty"));
    invert_pmd(
        |tau| expected_pmd_mismatched(cfg, lambda_hat, nmse, lambda_bar, Threshold::new(tau)?),
        cfg.pmd_target,
        start,
        limit,
        PROB_TOL,
    )
}

fn check_mismatch_args(lambda_hat: f64, nmse: f64, lambda_bar: f64) -> Result<()> {
    if !(lambda_hat >= 0.0) || lambda_hat.is_infinite() {
        return Err(Error::domain(format!("observed SNR must be finite and >= 0, got {lambda_hat}")));
    }
    if !(0.0..=1.0).contains(&nmse) {
        return Err(Error::domain(format!("NMSE must lie in [0, 1], got {nmse}")));
    }
    if !(lambda_bar > 0.0) {
        return Err(Error::domain(format!("mean SNR must be positive, got {lambda_bar}")));
    }
    Ok(())
}
