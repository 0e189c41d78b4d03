//! Acceptance criteria, one test per criterion. Each prints a PASS/FAIL line
//! straight to stderr so the verdicts are visible without `--nocapture`.

use std::io::Write;
use std::sync::OnceLock;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crsense::channel::{conditional_breakpoints, conditional_pdf};
use crsense::experiments::{run_preset, run_scenario, ExperimentPreset, PresetId, ResultTable};
use crsense::numerics::quadrature::{try_integrate, Tolerance};
use crsense::numerics::{
    branch_target, expected_pmd_mismatched, fusion_or, pfa_from_threshold, pmd_average_rayleigh, pmd_instantaneous,
    roc_curve, threshold_adaptive, threshold_cooperative, threshold_fixed, threshold_mismatched, ApproxMode,
    DetectionProbabilities, DetectorConfig, RocMode, ThresholdMode,
};
use crsense::simulator::{run_monte_carlo, Estimate, ScenarioConfig, SensingBackend};
use crsense::strategy::{belief_correct, belief_init, belief_propagate, SensingOutcome, SensingResult};
use crsense::traffic::MarkovChainParams;

const REPS: usize = 500;
const SEED: u64 = 2024;
const LAMBDA_BAR: f64 = 0.1;
const Z95: f64 = 1.959_963_984_540_054;

fn verdict(id: &str, title: &str, pass: bool, detail: &str) {
    let line = format!("{} {id} {title}: {detail}\n", if pass { "PASS" } else { "FAIL" });
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(pass, "{id} {title}: {detail}");
}

fn detector(target: f64, approx: ApproxMode) -> DetectorConfig {
    DetectorConfig::new(100, target, ThresholdMode::Fixed, approx).unwrap()
}

fn est(t: &ResultTable, x: f64, series: &str) -> Estimate {
    t.estimate(x, series).unwrap_or_else(|| panic!("missing row ({x}, {series})"))
}

fn below(a: Estimate, b: Estimate) -> bool {
    a.mean < b.mean && !a.overlaps(&b)
}

fn fig3() -> &'static ResultTable {
    static T: OnceLock<ResultTable> = OnceLock::new();
    T.get_or_init(|| run_preset(PresetId::Fig3, REPS, SEED).unwrap())
}

#[test]
fn c1_roc_dominance() {
    let grid = [0.01, 0.05, 0.1, 0.2, 0.3];
    let mut ok = true;
    let mut detail = Vec::new();
    for approx in [ApproxMode::Exact, ApproxMode::Gaussian] {
        let d = detector(0.1, approx);
        let fixed = roc_curve(RocMode::FixedThreshold, &d, LAMBDA_BAR, &grid).unwrap();
        let adaptive = roc_curve(RocMode::AdaptiveThreshold, &d, LAMBDA_BAR, &grid).unwrap();
        for (f, a) in fixed.iter().zip(&adaptive) {
            ok &= a.p_fa < f.p_fa;
            detail.push(format!("{approx:?} {}: {:.4} < {:.4}", f.p_md, a.p_fa, f.p_fa));
        }
    }
    verdict("C1", "ROC dominance", ok, &detail.join("; "));
}

#[test]
fn c2_adaptive_threshold_gain() {
    let t = fig3();
    let mut ok = true;
    let mut detail = Vec::new();
    for x in [0.01, 0.1] {
        let fixed = est(t, x, "su.myopic_fixed");
        let adaptive = est(t, x, "su.pu_csi_adaptive");
        let gain = adaptive.mean - fixed.mean;
        ok &= (0.2..=1.2).contains(&gain) && below(fixed, adaptive);
        detail.push(format!("target {x}: gain {gain:.4} (±{:.4}/±{:.4})", fixed.ci95, adaptive.ci95));
    }
    verdict("C2", "adaptive threshold gain", ok, &detail.join("; "));
}

#[test]
fn c3_combined_adaptation_gain() {
    let t = fig3();
    let adaptive = est(t, 0.1, "su.pu_csi_adaptive");
    let combined = est(t, 0.1, "su.combined_adaptive");
    let gain = combined.mean - adaptive.mean;
    let ok = (0.15..=0.6).contains(&gain) && below(adaptive, combined);
    verdict("C3", "combined adaptation gain", ok, &format!("gain {gain:.4} at target 0.1"));
}

#[test]
fn c4_pu_protection_equivalence() {
    let t = fig3();
    let policies = ["myopic_fixed", "su_csi_fixed", "pu_csi_adaptive", "combined_adaptive"];
    let preset = ExperimentPreset::new(PresetId::Fig3);
    let mut failures = Vec::new();
    for &x in &preset.sweep {
        for (i, a) in policies.iter().enumerate() {
            for b in &policies[i + 1..] {
                let (ea, eb) = (est(t, x, &format!("pu.{a}")), est(t, x, &format!("pu.{b}")));
                if !ea.overlaps(&eb) {
                    failures.push(format!("PU {a} {:.4}±{:.4} vs {b} {:.4}±{:.4} at {x}", ea.mean, ea.ci95, eb.mean, eb.ci95));
                }
            }
            // The pooled binomial interval is Z95·σ̂; compare with 3σ at the target rate.
            let miss = est(t, x, &format!("miss.{a}"));
            let n_eff = if miss.ci95 > 0.0 { miss.mean * (1.0 - miss.mean) * (Z95 / miss.ci95).powi(2) } else { 0.0 };
            let sd = (x * (1.0 - x) / n_eff).sqrt();
            if sd.is_nan() || (miss.mean - x).abs() > 3.0 * sd {
                failures.push(format!("miss {a} {:.5} vs {x} (3σ {:.5})", miss.mean, 3.0 * sd));
            }
        }
    }
    let detail = if failures.is_empty() { "all targets".to_string() } else { failures.join("; ") };
    verdict("C4", "PU protection equivalence", failures.is_empty(), &detail);
}

#[test]
fn c5_cooperative_crossover() {
    let t = run_preset(PresetId::Fig4, REPS, SEED).unwrap();
    let rows = t.series("cooperative");
    let reference = est(&t, rows[0].x, "adaptive");
    let mut ok = true;
    let mut detail = vec![format!("adaptive {:.4}±{:.4}", reference.mean, reference.ci95)];
    for r in &rows {
        let coop = Estimate { mean: r.mean, ci95: r.ci95 };
        if r.x <= 10.0 && !below(coop, reference) {
            ok = false;
            detail.push(format!("L = {} not strictly below ({:.4}±{:.4})", r.x, r.mean, r.ci95));
        }
    }
    let crossover = rows.iter().find(|r| r.mean >= reference.mean).map(|r| r.x);
    ok &= matches!(crossover, Some(l) if (20.0..=40.0).contains(&l));
    detail.push(format!("L* = {crossover:?}"));
    verdict("C5", "cooperative crossover", ok, &detail.join("; "));
}

#[test]
fn c6_shadowing_robustness() {
    let mut preset = ExperimentPreset::new(PresetId::Fig5).with_run(REPS, SEED);
    preset.sweep = vec![0.0, 0.3, 0.5, 0.7, 0.8, 0.9];
    let t = preset.run().unwrap();
    let curve: Vec<Estimate> = [0.0, 0.3, 0.5, 0.7, 0.9].iter().map(|&x| est(&t, x, "adaptive")).collect();
    let mut ok = curve.windows(2).all(|w| w[1].mean <= w[0].mean + w[0].ci95 + w[1].ci95);
    let (a, f) = (est(&t, 0.8, "adaptive"), est(&t, 0.8, "fixed"));
    ok &= below(f, a);
    let means: Vec<String> = curve.iter().map(|e| format!("{:.4}", e.mean)).collect();
    verdict(
        "C6",
        "shadowing robustness",
        ok,
        &format!("adaptive over ρ [{}]; at ρ = 0.8 adaptive {:.4} vs fixed {:.4}", means.join(", "), a.mean, f.mean),
    );
}

#[test]
fn c7_mismatch_robustness() {
    let t = run_preset(PresetId::Fig6, REPS, SEED).unwrap();
    let perfect = est(&t, 1e-2, "perfect_csi");
    let mis = est(&t, 1e-2, "mismatched");
    let rel = (mis.mean - perfect.mean).abs() / perfect.mean;
    let (worst, fixed) = (est(&t, 1.0, "mismatched"), est(&t, 1.0, "fixed"));
    let ok = rel <= 0.05 && worst.mean >= fixed.mean - fixed.ci95;
    verdict(
        "C7",
        "mismatch robustness",
        ok,
        &format!(
            "NMSE 1e-2 within {:.2}% of perfect CSI; NMSE 1: {:.4} vs fixed {:.4}±{:.4}",
            100.0 * rel,
            worst.mean,
            fixed.mean,
            fixed.ci95
        ),
    );
}

#[test]
fn c8a_threshold_round_trips() {
    let mut worst = [0.0f64; 2];
    for (k, approx) in [ApproxMode::Exact, ApproxMode::Gaussian].into_iter().enumerate() {
        for target in [0.01, 0.1, 0.3, 0.7] {
            let d = detector(target, approx);
            let tau = threshold_fixed(&d, LAMBDA_BAR).unwrap();
            worst[k] = worst[k].max((pmd_average_rayleigh(&d, LAMBDA_BAR, tau).unwrap() - target).abs());
            for lambda in [0.0, 0.05, 0.1, 0.5, 1.0, 4.0] {
                let tau = threshold_adaptive(&d, lambda).unwrap();
                worst[k] = worst[k].max((pmd_instantaneous(&d, lambda, tau).unwrap() - target).abs());
            }
            for lh in [0.0, 0.1, 0.8] {
                let tau = threshold_mismatched(&d, lh, 0.1, LAMBDA_BAR).unwrap();
                let p = expected_pmd_mismatched(&d, lh, 0.1, LAMBDA_BAR, tau).unwrap();
                worst[k] = worst[k].max((p - target).abs());
            }
            for branches in [2, 5] {
                let tau = threshold_cooperative(&d, LAMBDA_BAR, branches).unwrap();
                let p = pmd_average_rayleigh(&d, LAMBDA_BAR, tau).unwrap();
                worst[k] = worst[k].max((p - branch_target(target, branches)).abs());
            }
        }
    }
    let ok = worst[0] <= 1e-9 && worst[1] <= 1e-6;
    verdict("C8a", "threshold round-trips", ok, &format!("max error exact {:.2e}, gaussian {:.2e}", worst[0], worst[1]));
}

#[test]
fn c8b_gaussian_vs_exact() {
    let exact = detector(0.1, ApproxMode::Exact);
    let gauss = detector(0.1, ApproxMode::Gaussian);
    let (mut worst, mut at) = (0.0f64, (0.0, 0.0));
    for i in 0..=600 {
        let tau = crsense::numerics::Threshold::new(100.0 + 0.5 * i as f64).unwrap();
        let gap = (pfa_from_threshold(&exact, tau).unwrap() - pfa_from_threshold(&gauss, tau).unwrap()).abs();
        if gap > worst {
            (worst, at) = (gap, (f64::NAN, tau.value()));
        }
        for lambda in [0.0, 0.05, 0.1, 0.5, 1.0] {
            let gap = (pmd_instantaneous(&exact, lambda, tau).unwrap() - pmd_instantaneous(&gauss, lambda, tau).unwrap()).abs();
            if gap > worst {
                (worst, at) = (gap, (lambda, tau.value()));
            }
        }
    }
    let where_ = if at.0.is_nan() { format!("p_FA at τ = {}", at.1) } else { format!("p_MD at λ = {}, τ = {}", at.0, at.1) };
    verdict("C8b", "Gaussian vs exact within 0.01", worst <= 0.01, &format!("max gap {worst:.5} ({where_})"));
}

#[test]
fn c8c_bernoulli_vs_statistic() {
    let mut detail = Vec::new();
    let mut ok = true;
    for mode in [ThresholdMode::Fixed, ThresholdMode::Adaptive] {
        let mut base = ScenarioConfig {
            num_sus: 2,
            num_channels: 4,
            num_slots: 20,
            replications: 10_000,
            seed: SEED,
            ..Default::default()
        }
        .with_uniform_chain(MarkovChainParams { p01: 0.2, p11: 0.8 });
        base.detector.threshold_mode = mode;
        base.detector.approx_mode = ApproxMode::Exact;
        let bern = run_monte_carlo(&base).unwrap();
        base.backend = SensingBackend::Statistic;
        base.seed = SEED + 1;
        let stat = run_monte_carlo(&base).unwrap();
        for (name, a, b) in [
            ("SU throughput", bern.su_throughput, stat.su_throughput),
            ("miss rate", bern.collision_rate, stat.collision_rate),
        ] {
            let sd = ((a.ci95 / Z95).powi(2) + (b.ci95 / Z95).powi(2)).sqrt();
            let z = (a.mean - b.mean).abs() / sd;
            ok &= z <= 3.0;
            detail.push(format!("{mode:?} {name} {:.4} vs {:.4} ({z:.2}σ)", a.mean, b.mean));
        }
    }
    verdict("C8c", "Bernoulli vs statistic sensing", ok, &detail.join("; "));
}

#[test]
fn c8d_belief_invariants() {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut ok = true;
    for _ in 0..10_000 {
        let theta: f64 = rng.random();
        let result = SensingResult {
            outcome: if rng.random::<bool>() { SensingOutcome::Idle } else { SensingOutcome::Busy },
            p_fa_used: rng.random_range(0.0..0.99),
            p_md_used: rng.random_range(0.0..0.99),
        };
        if let Ok(c) = belief_correct(theta, &result) {
            ok &= (0.0..=1.0).contains(&c);
        }
        let chain = MarkovChainParams { p01: rng.random_range(0.01..0.99), p11: rng.random_range(0.01..0.99) };
        let chains = vec![chain; 3];
        let stationary = belief_init(&chains).unwrap();
        let next = belief_propagate(&stationary, None, &chains);
        ok &= next.theta.iter().zip(&stationary.theta).all(|(a, b)| (a - b).abs() < 1e-12);
        let moved = belief_propagate(&stationary, Some((1, theta)), &chains);
        ok &= moved.theta.iter().all(|t| (0.0..=1.0).contains(t));
    }
    verdict("C8d", "belief invariants", ok, "range and stationary fixed point over 10000 draws");
}

#[test]
fn c8e_fusion_identities() {
    let mut ok = true;
    for (p_md, p_fa) in [(0.1, 0.2), (0.5, 0.01), (0.9, 0.6), (1e-3, 0.999)] {
        let p = DetectionProbabilities::new(p_md, p_fa).unwrap();
        ok &= fusion_or(p, 1).unwrap() == p;
        for (a, b) in [(2, 3), (5, 4)] {
            let nested = fusion_or(fusion_or(p, a).unwrap(), b).unwrap();
            let flat = fusion_or(p, a * b).unwrap();
            ok &= (nested.p_md - flat.p_md).abs() < 1e-14 && (nested.p_fa - flat.p_fa).abs() < 1e-14;
        }
        for l in [1, 2, 7, 40] {
            ok &= (branch_target(p_md, l).powi(l as i32) - p_md).abs() < 1e-14;
            let f = fusion_or(p, l).unwrap();
            ok &= f.p_md <= p.p_md && f.p_fa >= p.p_fa;
        }
    }
    verdict("C8e", "fusion identities", ok, "L = 1 identity, nesting, per-branch targets, monotonicity");
}

#[test]
fn c8f_conditional_pdf_normalization() {
    let mut worst = 0.0f64;
    for nmse in [1e-3, 1e-2, 0.1, 0.5, 1.0] {
        for lh in [0.0, 0.01, 0.1, 0.5, 2.0] {
            let bp = conditional_breakpoints(lh, nmse, LAMBDA_BAR);
            let mass = try_integrate(|l| conditional_pdf(l, lh, nmse, LAMBDA_BAR), &bp, Tolerance::new(1e-12, 1e-10))
                .unwrap();
            worst = worst.max((mass - 1.0).abs());
        }
    }
    verdict("C8f", "conditional pdf normalization", worst <= 1e-6, &format!("max |mass − 1| = {worst:.2e}"));
}

#[test]
fn c8g_deterministic_replay() {
    let mut cfg = ScenarioConfig { replications: 50, seed: SEED, ..Default::default() };
    cfg.detector.threshold_mode = ThresholdMode::Adaptive;
    let a = run_scenario(&cfg).unwrap().to_csv();
    let b = run_scenario(&cfg).unwrap().to_csv();
    let mut preset = ExperimentPreset::new(PresetId::Fig4).with_run(20, SEED);
    preset.sweep = vec![1.0, 5.0];
    let c = preset.run().unwrap().to_csv();
    let d = preset.run().unwrap().to_csv();
    verdict("C8g", "deterministic replay", a == b && c == d, &format!("{} and {} CSV bytes replayed", a.len(), c.len()));
}
