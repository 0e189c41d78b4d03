//! Special functions behind the detector statistics.
//!
//! Everything here works on integer orders: the energy statistic has 2ν degrees
//! of freedom with ν a sample count, so the incomplete gamma function reduces to
//! a Poisson sum and the Marcum Q function to a Poisson mixture of such sums.

use statrs::function::erf::{erfc, erfc_inv};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Half-width of the Poisson(a²/2) mixture window, in standard deviations
/// (plus the same number of absolute steps for small means).
const MIXTURE_WINDOW_SD: f64 = 10.0;

/// Relative size below which a Poisson term no longer changes a running sum.
const NEGLIGIBLE: f64 = 1e-17;

/// Regularized upper incomplete gamma function Γ(ν, x)/Γ(ν) for integer ν.
///
/// For integer order this is the Poisson probability Pr[K < ν] with
/// K ~ Poisson(x), which is summed directly so there is no cancellation.
pub fn regularized_upper_gamma(nu: u32, x: f64) -> Result<f64> {
    check_gamma_args(nu, x)?;
    Ok(poisson_cdf_below(u64::from(nu), x))
}

/// Regularized lower incomplete gamma function γ(ν, x)/Γ(ν) for integer ν,
/// i.e. Pr[K ≥ ν] with K ~ Poisson(x). Accurate when the value is tiny.
pub fn regularized_lower_gamma(nu: u32, x: f64) -> Result<f64> {
    check_gamma_args(nu, x)?;
    Ok(poisson_sf_from(u64::from(nu), x))
}

fn check_gamma_args(nu: u32, x: f64) -> Result<()> {
    if nu < 1 {
        return Err(Error::domain(format!("incomplete gamma order must be >= 1, got {nu}")));
    }
    if !(x >= 0.0) {
        return Err(Error::domain(format!("incomplete gamma argument must be >= 0, got {x}")));
    }
    Ok(())
}

/// Stirling series remainder ln k! − (k + ½) ln k + k − ½ ln 2π, for k > 15.
fn stirlerr(k: f64) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    let k2 = k * k;
    (S0 - (S1 - (S2 - (S3 - S4 / k2) / k2) / k2) / k2) / k
}

/// Deviance term x ln(x/m) + m − x, computed without cancellation near x = m.
fn bd0(x: f64, m: f64) -> f64 {
    if (x - m).abs() < 0.1 * (x + m) {
        let v = (x - m) / (x + m);
        let mut s = (x - m) * v;
        let mut ej = 2.0 * x * v;
        let v2 = v * v;
        let mut j = 1.0;
        loop {
            ej *= v2;
            let next = s + ej / (2.0 * j + 1.0);
            if next == s {
                return s;
            }
            s = next;
            j += 1.0;
        }
    }
    x * (x / m).ln() + m - x
}

/// ln Pr[K = k] for K ~ Poisson(mean), mean > 0, with full relative accuracy
/// for large k (saddle-point form).
pub(crate) fn ln_poisson_pmf(k: u64, mean: f64) -> f64 {
    if k == 0 {
        return -mean;
    }
    let kf = k as f64;
    if k <= 15 {
        return -mean + kf * mean.ln() - ln_gamma(kf + 1.0);
    }
    -stirlerr(kf) - bd0(kf, mean) - 0.5 * (2.0 * std::f64::consts::PI * kf).ln()
}

/// Σ_{k=lo}^{hi} Pr[K = k] for K ~ Poisson(mean) with mean in (0, ∞).
///
/// Starts at the largest term in the range and walks outward with the
/// multiplicative recurrence, so every addition is of a positive term.
fn poisson_range_sum(lo: u64, hi: u64, mean: f64) -> f64 {
    if lo > hi {
        return 0.0;
    }
    let mode = mean.floor().min(u64::MAX as f64) as u64;
    let anchor = mode.clamp(lo, hi);
    let t0 = ln_poisson_pmf(anchor, mean).exp();
    if t0 == 0.0 {
        return 0.0;
    }
    let mut sum = t0;
    let (mut t, mut k) = (t0, anchor);
    while k < hi {
        t *= mean / (k + 1) as f64;
        k += 1;
        sum += t;
        if t <= NEGLIGIBLE * sum {
            break;
        }
    }
    let (mut t, mut k) = (t0, anchor);
    while k > lo {
        t *= k as f64 / mean;
        k -= 1;
        sum += t;
        if t <= NEGLIGIBLE * sum {
            break;
        }
    }
    sum
}

/// Pr[K < n] for K ~ Poisson(mean).
pub(crate) fn poisson_cdf_below(n: u64, mean: f64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    if mean == 0.0 {
        return 1.0;
    }
    if mean.is_infinite() {
        return 0.0;
    }
    poisson_range_sum(0, n - 1, mean).min(1.0)
}

/// Pr[K ≥ n] for K ~ Poisson(mean).
pub(crate) fn poisson_sf_from(n: u64, mean: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    if mean == 0.0 {
        return 0.0;
    }
    if mean.is_infinite() {
        return 1.0;
    }
    poisson_range_sum(n, u64::MAX, mean).min(1.0)
}

/// Generalized Marcum Q function Q_ν(a, b) for integer order ν.
///
/// Evaluated as the Poisson(a²/2) mixture of central chi-square tails
/// Γ(ν + k, b²/2)/Γ(ν + k). The tails are advanced with the recurrence
/// Γ(n + 1, y)/Γ(n + 1) = Γ(n, y)/Γ(n) + e^{-y} yⁿ/n!, which only ever adds.
pub fn marcum_q(nu: u32, a: f64, b: f64) -> Result<f64> {
    marcum(nu, a, b, true)
}

/// 1 − Q_ν(a, b), summed directly so that small values keep their relative
/// accuracy instead of being lost to cancellation.
pub fn marcum_q_complement(nu: u32, a: f64, b: f64) -> Result<f64> {
    marcum(nu, a, b, false)
}

fn marcum(nu: u32, a: f64, b: f64, upper: bool) -> Result<f64> {
    if nu < 1 {
        return Err(Error::domain(format!("Marcum Q order must be >= 1, got {nu}")));
    }
    if !(a >= 0.0) || !(b >= 0.0) {
        return Err(Error::domain(format!("Marcum Q arguments must be >= 0, got a = {a}, b = {b}")));
    }
    let pick = |q: f64| if upper { q } else { 1.0 - q };
    if !a.is_finite() || b == 0.0 {
        return Ok(pick(1.0));
    }
    if !b.is_finite() {
        return Ok(pick(0.0));
    }
    let y = 0.5 * b * b;
    let nu = u64::from(nu);
    if a == 0.0 {
        return Ok(if upper { poisson_cdf_below(nu, y) } else { poisson_sf_from(nu, y) });
    }
    let mu = 0.5 * a * a;
    let spread = MIXTURE_WINDOW_SD * (mu.sqrt() + 1.0);
    let k_lo = (mu - spread).max(0.0).floor() as u64;
    let k_hi = (mu + spread).ceil() as u64;

    let mut total = 0.0;
    if upper {
        // Q = Σ w_k G_k with G_k = Pr[Poisson(y) < ν + k], increasing in k.
        let mut g = poisson_cdf_below(nu + k_lo, y);
        for k in k_lo..=k_hi {
            total += ln_poisson_pmf(k, mu).exp() * g;
            g = (g + ln_poisson_pmf(nu + k, y).exp()).min(1.0);
        }
    } else {
        // 1 − Q = Σ w_k C_k with C_k = Pr[Poisson(y) ≥ ν + k], decreasing in k.
        let mut c = poisson_sf_from(nu + k_hi, y);
        for k in (k_lo..=k_hi).rev() {
            total += ln_poisson_pmf(k, mu).exp() * c;
            if k > 0 {
                c = (c + ln_poisson_pmf(nu + k - 1, y).exp()).min(1.0);
            }
        }
    }
    Ok(total.clamp(0.0, 1.0))
}

/// Standard normal CDF Φ(x).
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal upper tail 1 − Φ(x), accurate deep in the tail.
pub fn normal_sf(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Standard normal quantile Φ⁻¹(p) for p in (0, 1).
pub fn normal_quantile(p: f64) -> f64 {
    let x = -std::f64::consts::SQRT_2 * erfc_inv(2.0 * p);
    if !x.is_finite() {
        return x;
    }
    // One Newton step removes the ~1e-10 relative error of the inverse erfc.
    let density = (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
    if density > 0.0 {
        x - (normal_cdf(x) - p) / density
    } else {
        x
    }
}

/// Exponentially scaled modified Bessel function e^{-x} I₀(x) for x ≥ 0.
///
/// Power series below x = 20, Hankel asymptotic expansion above.
pub fn bessel_i0e(x: f64) -> f64 {
    let x = x.abs();
    if x <= 20.0 {
        let q = 0.25 * x * x;
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k = 1.0;
        while term > 1e-17 * sum {
            term *= q / (k * k);
            sum += term;
            k += 1.0;
        }
        sum * (-x).exp()
    } else {
        // Σ ((2k-1)!!)² / (k! 8^k x^k), stopped before the terms start growing.
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k = 0.0_f64;
        loop {
            let next = term * (2.0 * k + 1.0).powi(2) / (8.0 * (k + 1.0) * x);
            if next >= term || next < 1e-17 * sum {
                break;
            }
            sum += next;
            term = next;
            k += 1.0;
        }
        sum / (2.0 * std::f64::consts::PI * x).sqrt()
    }
}
