//! Per-slot SNR fields and the mismatched-CSI observation model.
//!
//! Fields are block-fading: every slot draws a fresh M×N grid. Only the
//! PU-to-SU lognormal kind carries spatial correlation, along the SU index
//! (detectors on a linear track); channels are always independent.

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::error::{Error, Result};
use crate::numerics::{bessel_i0e, SnrDensity};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkKind {
    PuToSu,
    SuToSu,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FadingKind {
    RayleighIid { mean_snr_db: f64 },
    /// Lognormal shadowing with correlation rho^|m − m'| between SUs m, m'.
    LognormalCorrelated { mu_db: f64, sigma_db: f64, rho: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadingSpec {
    pub kind: FadingKind,
    pub applies_to: LinkKind,
}

impl FadingSpec {
    pub fn rayleigh(mean_snr_db: f64, applies_to: LinkKind) -> Self {
        Self { kind: FadingKind::RayleighIid { mean_snr_db }, applies_to }
    }

    pub fn lognormal(mu_db: f64, sigma_db: f64, rho: f64, applies_to: LinkKind) -> Self {
        Self { kind: FadingKind::LognormalCorrelated { mu_db, sigma_db, rho }, applies_to }
    }

    pub fn validate(&self) -> Result<()> {
        let link = match self.applies_to {
            LinkKind::PuToSu => "pu_su",
            LinkKind::SuToSu => "su_su",
        };
        match self.kind {
            FadingKind::RayleighIid { mean_snr_db } if !mean_snr_db.is_finite() => {
                Err(Error::Validation(format!("fading.{link}.mean_snr_db must be finite")))
            }
            FadingKind::LognormalCorrelated { mu_db, sigma_db, rho } => {
                if !mu_db.is_finite() {
                    return Err(Error::Validation(format!("fading.{link}.mu_db must be finite")));
                }
                if !(sigma_db > 0.0 && sigma_db.is_finite()) {
                    return Err(Error::Validation(format!("fading.{link}.sigma_db must be > 0")));
                }
                if !(0.0..1.0).contains(&rho) {
                    return Err(Error::Validation(format!("fading.{link}.rho must lie in [0, 1)")));
                }
                if self.applies_to == LinkKind::SuToSu && rho != 0.0 {
                    return Err(Error::Validation("fading.su_su.rho must be 0: SU-to-SU links are independent".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Marginal density of one entry of the field.
    pub fn density(&self) -> SnrDensity {
        match self.kind {
            FadingKind::RayleighIid { mean_snr_db } => SnrDensity::Exponential { mean: crate::db_to_linear(mean_snr_db) },
            FadingKind::LognormalCorrelated { mu_db, sigma_db, .. } => SnrDensity::Lognormal { mu_db, sigma_db },
        }
    }

    /// Linear mean of one entry.
    pub fn mean_linear(&self) -> f64 {
        match self.kind {
            FadingKind::RayleighIid { mean_snr_db } => crate::db_to_linear(mean_snr_db),
            FadingKind::LognormalCorrelated { mu_db, sigma_db, .. } => {
                let s = sigma_db * std::f64::consts::LN_10 / 10.0;
                crate::db_to_linear(mu_db) * (0.5 * s * s).exp()
            }
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, num_sus: usize, num_channels: usize, rng: &mut R) -> SnrGrid {
        match self.kind {
            FadingKind::RayleighIid { mean_snr_db } => {
                draw_rayleigh_field(crate::db_to_linear(mean_snr_db), num_sus, num_channels, rng)
            }
            FadingKind::LognormalCorrelated { mu_db, sigma_db, rho } => {
                draw_correlated_lognormal_field(mu_db, sigma_db, rho, num_sus, num_channels, rng)
            }
        }
    }

    /// One independent draw from the marginal.
    pub fn draw_one<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.kind {
            FadingKind::RayleighIid { mean_snr_db } => {
                let e: f64 = Exp1.sample(rng);
                e * crate::db_to_linear(mean_snr_db)
            }
            FadingKind::LognormalCorrelated { mu_db, sigma_db, .. } => {
                let z: f64 = StandardNormal.sample(rng);
                crate::db_to_linear(mu_db + sigma_db * z)
            }
        }
    }
}

/// M×N grid of linear SNRs indexed by (SU, channel).
#[derive(Debug, Clone, PartialEq)]
pub struct SnrGrid {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl SnrGrid {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for m in 0..rows {
            for n in 0..cols {
                data.push(f(m, n));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, m: usize, n: usize) -> f64 {
        self.data[m * self.cols + n]
    }

    #[inline]
    pub fn row(&self, m: usize) -> &[f64] {
        &self.data[m * self.cols..(m + 1) * self.cols]
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }
}

/// Instantaneous SNRs for one slot.
#[derive(Debug, Clone, PartialEq)]
pub struct GainField {
    /// PU-to-SU SNR per sample.
    pub lambda: SnrGrid,
    /// SU-to-SU link SNR.
    pub gamma: SnrGrid,
    /// Mismatched observation of `lambda`, when CSI is imperfect.
    pub lambda_hat: Option<SnrGrid>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MismatchSpec {
    /// Normalized mean-square error E[(λ − λ̂)²] / E[λ²].
    pub nmse: f64,
}

impl MismatchSpec {
    pub fn new(nmse: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&nmse) {
            return Err(Error::Validation(format!("mismatch.nmse must lie in [0, 1], got {nmse}")));
        }
        Ok(Self { nmse })
    }
}

/// I.i.d. exponential SNRs (Rayleigh amplitude) with the given linear mean.
pub fn draw_rayleigh_field<R: Rng + ?Sized>(mean_snr_linear: f64, num_sus: usize, num_channels: usize, rng: &mut R) -> SnrGrid {
    SnrGrid::from_fn(num_sus, num_channels, |_, _| {
        let e: f64 = Exp1.sample(rng);
        e * mean_snr_linear
    })
}

/// Lognormal SNRs whose dB values are Gaussian with correlation rho^|m − m'|
/// across SUs (an AR(1) pass along the SU index), independent across channels.
pub fn draw_correlated_lognormal_field<R: Rng + ?Sized>(
    mu_db: f64,
    sigma_db: f64,
    rho: f64,
    num_sus: usize,
    num_channels: usize,
    rng: &mut R,
) -> SnrGrid {
    let innovation = (1.0 - rho * rho).sqrt();
    let mut db = vec![0.0; num_sus * num_channels];
    for n in 0..num_channels {
        let mut x: f64 = StandardNormal.sample(rng);
        for m in 0..num_sus {
            if m > 0 {
                let z: f64 = StandardNormal.sample(rng);
                x = rho * x + innovation * z;
            }
            db[m * num_channels + n] = mu_db + sigma_db * x;
        }
    }
    SnrGrid::from_fn(num_sus, num_channels, |m, n| crate::db_to_linear(db[m * num_channels + n]))
}

/// Observation λ̂ of a realized SNR λ under the outdated-estimate model:
/// ĥ = ρ_e h + √(1 − ρ_e²) e with ρ_e² = 1 − nmse and e ~ CN(0, 1).
///
/// By circular symmetry only |h| = √(λ / λ̄) matters.
pub fn observe_mismatched<R: Rng + ?Sized>(lambda: f64, mean_snr_linear: f64, nmse: f64, rng: &mut R) -> f64 {
    if nmse == 0.0 {
        return lambda;
    }
    let rho = (1.0 - nmse).sqrt();
    let noise = (0.5 * nmse).sqrt();
    let amp = (lambda / mean_snr_linear).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    let (hr, hi) = (rho * amp + noise * re, noise * im);
    mean_snr_linear * (hr * hr + hi * hi)
}

/// Jointly distributed (λ, λ̂): λ exponential with the given mean, λ̂ its
/// mismatched observation.
pub fn draw_mismatched_pair<R: Rng + ?Sized>(mean_snr_linear: f64, nmse: f64, rng: &mut R) -> (f64, f64) {
    let e: f64 = Exp1.sample(rng);
    let lambda = e * mean_snr_linear;
    (lambda, observe_mismatched(lambda, mean_snr_linear, nmse, rng))
}

/// Conditional density f(λ | λ̂) of the true SNR given its observation
/// (a scaled noncentral chi-square with two degrees of freedom):
///
/// f = 1/s · exp(−(λ + ρ²λ̂)/s) · I₀(2ρ√(λλ̂)/s),  s = λ̄(1 − ρ²) = λ̄·nmse.
pub fn conditional_pdf(lambda: f64, lambda_hat: f64, nmse: f64, mean_snr_linear: f64) -> Result<f64> {
    if !(nmse > 0.0 && nmse <= 1.0) {
        return Err(Error::domain(format!("conditional density needs NMSE in (0, 1], got {nmse}")));
    }
    if !(lambda_hat >= 0.0) || !(mean_snr_linear > 0.0) {
        return Err(Error::domain("conditional density needs λ̂ >= 0 and a positive mean SNR"));
    }
    if lambda < 0.0 {
        return Ok(0.0);
    }
    let s = mean_snr_linear * nmse;
    let rho = (1.0 - nmse).sqrt();
    let z = 2.0 * rho * (lambda * lambda_hat).sqrt() / s;
    // exp(−(λ + ρ²λ̂)/s + z) = exp(−(√λ − ρ√λ̂)²/s)
    let d = lambda.sqrt() - rho * lambda_hat.sqrt();
    Ok((-d * d / s).exp() * bessel_i0e(z) / s)
}

/// Conditional mean and standard deviation of λ given λ̂.
pub fn conditional_moments(lambda_hat: f64, nmse: f64, mean_snr_linear: f64) -> (f64, f64) {
    let s = mean_snr_linear * nmse;
    let r2 = 1.0 - nmse;
    (s + r2 * lambda_hat, (s * s + 2.0 * s * r2 * lambda_hat).sqrt())
}

/// Integration breakpoints covering the conditional density: ±12 sd around
/// the mean, plus 30 scale units of exponential tail above.
pub fn conditional_breakpoints(lambda_hat: f64, nmse: f64, mean_snr_linear: f64) -> Vec<f64> {
    let (mean, sd) = conditional_moments(lambda_hat, nmse, mean_snr_linear);
    let s = mean_snr_linear * nmse;
    let lo = (mean - 12.0 * sd).max(0.0);
    let hi = mean + 12.0 * sd + 30.0 * s;
    let mut pts = vec![lo];
    for k in [-3.0, -1.0, 0.0, 1.0, 3.0] {
        let p = mean + k * sd;
        if p > *pts.last().unwrap() && p < hi {
            pts.push(p);
        }
    }
    pts.push(hi);
    pts
}
