//! Energy-detector configuration and the miss-detection / false-alarm
//! probabilities of the 2ν-degree-of-freedom decision statistic.

use crate::error::{Error, Result};

use super::quadrature::{try_integrate, Tolerance};
use super::special::{marcum_q_complement, normal_cdf, normal_sf, regularized_lower_gamma, regularized_upper_gamma};

/// How the detection threshold is chosen each slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdMode {
    /// One threshold from the miss-detection rate averaged over fading.
    Fixed,
    /// Threshold re-inverted every slot from the instantaneous PU-to-SU SNR.
    Adaptive,
    /// Adaptive, but from a noisy SNR observation and its conditional density.
    Mismatched,
    /// Fixed per-branch threshold under OR-rule fusion of `branches` detectors.
    Cooperative { branches: u32 },
}

impl ThresholdMode {
    /// Whether the mode follows the instantaneous CSI (and therefore weights
    /// rewards by the instantaneous false-alarm probability).
    pub fn is_csi_adaptive(self) -> bool {
        matches!(self, ThresholdMode::Adaptive | ThresholdMode::Mismatched)
    }
}

/// Which distribution the probabilities are computed from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApproxMode {
    /// Central / noncentral chi-square.
    Exact,
    /// Normal distributions with the chi-square means and variances.
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorConfig {
    /// Number of collected samples ν; the statistic has 2ν degrees of freedom.
    pub nu: u32,
    /// Prescribed miss-detection (collision) probability.
    pub pmd_target: f64,
    pub threshold_mode: ThresholdMode,
    pub approx_mode: ApproxMode,
}

impl DetectorConfig {
    pub fn new(nu: u32, pmd_target: f64, threshold_mode: ThresholdMode, approx_mode: ApproxMode) -> Result<Self> {
        let cfg = Self { nu, pmd_target, threshold_mode, approx_mode };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nu < 1 {
            return Err(Error::Validation("detector.nu must be >= 1".into()));
        }
        if !(self.pmd_target > 0.0 && self.pmd_target < 1.0) {
            return Err(Error::Validation(format!(
                "detector.pmd_target must lie in (0, 1), got {}",
                self.pmd_target
            )));
        }
        if let ThresholdMode::Cooperative { branches } = self.threshold_mode {
            if branches < 1 {
                return Err(Error::Validation("detector.cooperative_l must be >= 1".into()));
            }
        }
        Ok(())
    }

    pub fn with_target(mut self, pmd_target: f64) -> Self {
        self.pmd_target = pmd_target;
        self
    }

    pub fn with_approx(mut self, approx_mode: ApproxMode) -> Self {
        self.approx_mode = approx_mode;
        self
    }

    fn nu_f(&self) -> f64 {
        f64::from(self.nu)
    }

    /// Mean and standard deviation of the statistic for per-sample SNR `lambda`.
    pub(crate) fn statistic_moments(&self, lambda: f64) -> (f64, f64) {
        let nu = self.nu_f();
        (2.0 * nu * (1.0 + lambda), (4.0 * nu * (1.0 + 2.0 * lambda)).sqrt())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionProbabilities {
    pub p_md: f64,
    pub p_fa: f64,
}

impl DetectionProbabilities {
    pub fn new(p_md: f64, p_fa: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p_md) || !(0.0..=1.0).contains(&p_fa) {
            return Err(Error::domain(format!("probabilities must lie in [0, 1], got p_md = {p_md}, p_fa = {p_fa}")));
        }
        Ok(Self { p_md, p_fa })
    }
}

/// Decision threshold on the chi-square statistic.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Threshold(f64);

impl Threshold {
    pub fn new(tau: f64) -> Result<Self> {
        if !(tau >= 0.0) || tau.is_infinite() {
            return Err(Error::domain(format!("threshold must be finite and >= 0, got {tau}")));
        }
        Ok(Self(tau))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Distribution of the per-sample PU-to-SU SNR, used to average detection
/// probabilities over fading.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SnrDensity {
    /// Rayleigh-faded link: exponential SNR with the given linear mean.
    Exponential { mean: f64 },
    /// Lognormal shadowing: SNR in dB is normal.
    Lognormal { mu_db: f64, sigma_db: f64 },
}

/// Exponential tail beyond 40 means carries e^{-40} < 1e-17 of the mass.
const EXPONENTIAL_SPAN: f64 = 40.0;
const LOGNORMAL_SPAN_SD: f64 = 10.0;

pub(crate) const AVERAGE_TOL: Tolerance = Tolerance::new(1e-14, 1e-8);

impl SnrDensity {
    pub fn validate(&self) -> Result<()> {
        match *self {
            SnrDensity::Exponential { mean } if !(mean > 0.0 && mean.is_finite()) => {
                Err(Error::domain(format!("mean SNR must be positive, got {mean}")))
            }
            SnrDensity::Lognormal { sigma_db, .. } if !(sigma_db > 0.0) => {
                Err(Error::domain(format!("lognormal sigma must be positive, got {sigma_db}")))
            }
            _ => Ok(()),
        }
    }

    /// Largest SNR the averaging quadrature visits.
    pub fn upper_support(&self) -> f64 {
        match *self {
            SnrDensity::Exponential { mean } => EXPONENTIAL_SPAN * mean,
            SnrDensity::Lognormal { mu_db, sigma_db } => crate::db_to_linear(mu_db + LOGNORMAL_SPAN_SD * sigma_db),
        }
    }

    /// E[g(λ)] by adaptive quadrature.
    pub fn expect<G>(&self, mut g: G, tol: Tolerance) -> Result<f64>
    where
        G: FnMut(f64) -> Result<f64>,
    {
        self.validate()?;
        match *self {
            SnrDensity::Exponential { mean } => {
                let pts: Vec<f64> = [0.0, 0.5, 1.0, 2.0, 4.0, 10.0, EXPONENTIAL_SPAN].iter().map(|k| k * mean).collect();
                try_integrate(|l| Ok(g(l)? * (-l / mean).exp() / mean), &pts, tol)
            }
            SnrDensity::Lognormal { mu_db, sigma_db } => {
                // Integrate over the dB variable against the normal density.
                let pts: Vec<f64> = [-10.0, -4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0, 10.0]
                    .iter()
                    .map(|k| mu_db + k * sigma_db)
                    .collect();
                let norm = 1.0 / (sigma_db * (2.0 * std::f64::consts::PI).sqrt());
                try_integrate(
                    |x| {
                        let z = (x - mu_db) / sigma_db;
                        Ok(g(crate::db_to_linear(x))? * norm * (-0.5 * z * z).exp())
                    },
                    &pts,
                    tol,
                )
            }
        }
    }
}

/// False-alarm probability Pr[S > τ | H₀].
///
/// A zero threshold always alarms: the statistic is non-negative, so both
/// modes return exactly 1 at τ = 0.
pub fn pfa_from_threshold(cfg: &DetectorConfig, tau: Threshold) -> Result<f64> {
    let tau = tau.value();
    if tau == 0.0 {
        return Ok(1.0);
    }
    match cfg.approx_mode {
        ApproxMode::Exact => regularized_upper_gamma(cfg.nu, 0.5 * tau),
        ApproxMode::Gaussian => {
            let (mean, sd) = cfg.statistic_moments(0.0);
            Ok(normal_sf((tau - mean) / sd))
        }
    }
}

/// Instantaneous miss-detection probability Pr[S ≤ τ | H₁, λ].
pub fn pmd_instantaneous(cfg: &DetectorConfig, lambda: f64, tau: Threshold) -> Result<f64> {
    if !(lambda >= 0.0) {
        return Err(Error::domain(format!("SNR must be >= 0, got {lambda}")));
    }
    let tau = tau.value();
    if tau == 0.0 {
        return Ok(0.0);
    }
    match cfg.approx_mode {
        ApproxMode::Exact => {
            if lambda == 0.0 {
                return regularized_lower_gamma(cfg.nu, 0.5 * tau);
            }
            let a = (2.0 * cfg.nu_f() * lambda).sqrt();
            marcum_q_complement(cfg.nu, a, tau.sqrt())
        }
        ApproxMode::Gaussian => {
            let (mean, sd) = cfg.statistic_moments(lambda);
            Ok(normal_cdf((tau - mean) / sd))
        }
    }
}

/// Miss-detection probability averaged over an SNR density.
pub fn pmd_average(cfg: &DetectorConfig, density: &SnrDensity, tau: Threshold) -> Result<f64> {
    if tau.value() == 0.0 {
        return Ok(0.0);
    }
    let p = density.expect(|l| pmd_instantaneous(cfg, l, tau), AVERAGE_TOL)?;
    Ok(p.clamp(0.0, 1.0))
}

/// Miss-detection probability averaged over Rayleigh fading with mean SNR `lambda_bar`.
pub fn pmd_average_rayleigh(cfg: &DetectorConfig, lambda_bar: f64, tau: Threshold) -> Result<f64> {
    if !(lambda_bar > 0.0) {
        return Err(Error::domain(format!("mean SNR must be positive, got {lambda_bar}")));
    }
    pmd_average(cfg, &SnrDensity::Exponential { mean: lambda_bar }, tau)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(nu: u32, approx: ApproxMode) -> DetectorConfig {
        DetectorConfig::new(nu, 0.1, ThresholdMode::Fixed, approx).unwrap()
    }

    fn t(v: f64) -> Threshold {
        Threshold::new(v).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(DetectorConfig::new(0, 0.1, ThresholdMode::Fixed, ApproxMode::Exact).is_err());
        assert!(DetectorConfig::new(10, 0.0, ThresholdMode::Fixed, ApproxMode::Exact).is_err());
        assert!(DetectorConfig::new(10, 1.0, ThresholdMode::Fixed, ApproxMode::Exact).is_err());
        assert!(DetectorConfig::new(10, 0.5, ThresholdMode::Cooperative { branches: 0 }, ApproxMode::Exact).is_err());
        assert!(Threshold::new(-1.0).is_err());
        assert!(DetectionProbabilities::new(1.2, 0.0).is_err());
    }

    #[test]
    fn pfa_two_dof_and_zero_threshold() {
        let c = cfg(1, ApproxMode::Exact);
        assert!((pfa_from_threshold(&c, t(2.0)).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
        for approx in [ApproxMode::Exact, ApproxMode::Gaussian] {
            for nu in [1, 7, 100] {
                assert_eq!(pfa_from_threshold(&cfg(nu, approx), t(0.0)).unwrap(), 1.0);
            }
        }
    }

    #[test]
    fn pfa_reference_at_nu_100() {
        // Γ(100, 100)/Γ(100) by mpmath quadrature.
        let exact = pfa_from_threshold(&cfg(100, ApproxMode::Exact), t(200.0)).unwrap();
        assert!((exact - 0.486_701_201_720_851_335).abs() < 1e-13);
        let gauss = pfa_from_threshold(&cfg(100, ApproxMode::Gaussian), t(200.0)).unwrap();
        assert_eq!(gauss, 0.5);
    }

    #[test]
    fn pmd_degenerate_cases() {
        for approx in [ApproxMode::Exact, ApproxMode::Gaussian] {
            let c = cfg(100, approx);
            for tau in [50.0, 180.0, 200.0, 240.0, 400.0] {
                let pmd = pmd_instantaneous(&c, 0.0, t(tau)).unwrap();
                let pfa = pfa_from_threshold(&c, t(tau)).unwrap();
                assert!((pmd + pfa - 1.0).abs() < 1e-15, "{approx:?} tau {tau}");
            }
            assert_eq!(pmd_instantaneous(&c, 0.3, t(0.0)).unwrap(), 0.0);
        }
        assert!(pmd_instantaneous(&cfg(10, ApproxMode::Exact), -0.1, t(1.0)).is_err());
    }

    #[test]
    fn pmd_monotone_in_tau_and_lambda() {
        for approx in [ApproxMode::Exact, ApproxMode::Gaussian] {
            let c = cfg(100, approx);
            let mut prev = 0.0;
            for i in 0..40 {
                let v = pmd_instantaneous(&c, 0.2, t(150.0 + 5.0 * i as f64)).unwrap();
                assert!(v >= prev);
                prev = v;
            }
            let mut prev = 1.0;
            for i in 0..40 {
                let v = pmd_instantaneous(&c, 0.05 * i as f64, t(230.0)).unwrap();
                assert!(v <= prev);
                prev = v;
            }
        }
    }

    #[test]
    fn average_pmd_limits() {
        let c = cfg(100, ApproxMode::Exact);
        assert_eq!(pmd_average_rayleigh(&c, 0.1, t(0.0)).unwrap(), 0.0);
        // Vanishing mean SNR collapses onto H₀.
        let tiny = pmd_average_rayleigh(&c, 1e-9, t(205.0)).unwrap();
        let h0 = 1.0 - pfa_from_threshold(&c, t(205.0)).unwrap();
        assert!((tiny - h0).abs() < 1e-6, "{tiny} vs {h0}");
        assert!(pmd_average_rayleigh(&c, 0.0, t(1.0)).is_err());
    }

    #[test]
    fn average_pmd_matches_exponential_sampling() {
        use rand::SeedableRng;
        use rand_distr::{Distribution, Exp};
        let c = cfg(100, ApproxMode::Exact);
        let tau = t(186.0);
        let avg = pmd_average_rayleigh(&c, 0.1, tau).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let exp = Exp::new(10.0).unwrap();
        let n = 200_000;
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let v = pmd_instantaneous(&c, exp.sample(&mut rng), tau).unwrap();
            s += v;
            s2 += v * v;
        }
        let mean = s / n as f64;
        let sd = ((s2 / n as f64 - mean * mean) / n as f64).sqrt();
        assert!((avg - mean).abs() < 3.0 * sd, "{avg} vs {mean} ± {sd}");
    }

    #[test]
    fn lognormal_average_is_normalized() {
        let d = SnrDensity::Lognormal { mu_db: -10.0, sigma_db: 5.0 };
        let one = d.expect(|_| Ok(1.0), AVERAGE_TOL).unwrap();
        assert!((one - 1.0).abs() < 1e-12);
        // E[λ] = 10^{μ/10} exp((σ ln10/10)² / 2)
        let s = 5.0 * std::f64::consts::LN_10 / 10.0;
        let mean = d.expect(Ok, AVERAGE_TOL).unwrap();
        assert!((mean - 0.1 * (0.5 * s * s).exp()).abs() < 1e-9);
    }
}
