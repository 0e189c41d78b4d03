//! Per-SU beliefs, rewards and myopic channel selection.

use rand::Rng;

use crate::error::{Error, Result};
use crate::numerics::ThresholdMode;
use crate::traffic::{stationary_idle_prob, MarkovChainParams};

/// Per-channel conditional idle probabilities held by one SU.
#[derive(Debug, Clone, PartialEq)]
pub struct BeliefVector {
    pub theta: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RewardMode {
    /// Reward is the channel bandwidth B.
    Bandwidth,
    /// Reward is the SU link capacity B·log₂(1 + γ).
    Capacity,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrategyConfig {
    pub reward_mode: RewardMode,
    pub threshold_mode: ThresholdMode,
    pub bandwidth: f64,
}

impl StrategyConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.bandwidth > 0.0 && self.bandwidth.is_finite()) {
            return Err(Error::Validation(format!("strategy.bandwidth must be > 0, got {}", self.bandwidth)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SensingOutcome {
    Busy = 0,
    Idle = 1,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensingResult {
    pub outcome: SensingOutcome,
    /// False-alarm probability the detector operated at.
    pub p_fa_used: f64,
    /// Miss-detection probability the detector operated at.
    pub p_md_used: f64,
}

/// Initial beliefs: the stationary idle probability of each channel.
pub fn belief_init(params: &[MarkovChainParams]) -> Result<BeliefVector> {
    let theta = params.iter().map(stationary_idle_prob).collect::<Result<_>>()?;
    Ok(BeliefVector { theta })
}

/// Expected reward of sensing a channel with SU link SNR `gamma`.
///
/// CSI-adaptive threshold modes discount the base reward by the instantaneous
/// false-alarm probability; other modes use the base reward as is.
pub fn compute_reward(cfg: &StrategyConfig, gamma: f64, p_fa_inst: f64) -> f64 {
    let base = match cfg.reward_mode {
        RewardMode::Bandwidth => cfg.bandwidth,
        RewardMode::Capacity => cfg.bandwidth * (1.0 + gamma).log2(),
    };
    if cfg.threshold_mode.is_csi_adaptive() {
        (1.0 - p_fa_inst) * base
    } else {
        base
    }
}

/// Relative tolerance under which two expected rewards count as tied.
const TIE_RTOL: f64 = 1e-12;

/// argmax_n θₙ·Rₙ with ties broken uniformly at random.
pub fn select_channel<R: Rng + ?Sized>(belief: &BeliefVector, rewards: &[f64], rng: &mut R) -> Result<usize> {
    if belief.theta.is_empty() || rewards.is_empty() {
        return Err(Error::Empty("belief or reward vector"));
    }
    if belief.theta.len() != rewards.len() {
        return Err(Error::domain(format!(
            "belief has {} channels but {} rewards were given",
            belief.theta.len(),
            rewards.len()
        )));
    }
    let mut best = belief.theta[0] * rewards[0];
    let mut choice = 0;
    let mut ties = 1u32;
    for (n, (&theta, &r)) in belief.theta.iter().zip(rewards).enumerate().skip(1) {
        let v = theta * r;
        if v > best + TIE_RTOL * best.abs() {
            best = v;
            choice = n;
            ties = 1;
        } else if (v - best).abs() <= TIE_RTOL * best.abs() {
            // Reservoir sampling over the tied maximizers.
            ties += 1;
            if rng.random_range(0..ties) == 0 {
                choice = n;
            }
        }
    }
    Ok(choice)
}

/// Posterior idle probability of the sensed channel given the sensing result.
pub fn belief_correct(theta: f64, result: &SensingResult) -> Result<f64> {
    let (p_fa, p_md) = (result.p_fa_used, result.p_md_used);
    let (num, other) = match result.outcome {
        SensingOutcome::Idle => ((1.0 - p_fa) * theta, p_md * (1.0 - theta)),
        SensingOutcome::Busy => (p_fa * theta, (1.0 - p_md) * (1.0 - theta)),
    };
    let denom = num + other;
    if denom <= 0.0 {
        return Err(Error::DegenerateBelief);
    }
    Ok((num / denom).clamp(0.0, 1.0))
}

/// One-slot Markov prediction; the sensed channel starts from its corrected value.
pub fn belief_propagate(belief: &BeliefVector, corrected: Option<(usize, f64)>, params: &[MarkovChainParams]) -> BeliefVector {
    let theta = belief
        .theta
        .iter()
        .zip(params)
        .enumerate()
        .map(|(n, (&theta, p))| match corrected {
            Some((sensed, theta_r)) if sensed == n => p.propagate(theta_r),
            _ => p.propagate(theta),
        })
        .collect();
    BeliefVector { theta }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn chain(p01: f64, p11: f64) -> MarkovChainParams {
        MarkovChainParams::new(p01, p11).unwrap()
    }

    fn result(outcome: SensingOutcome, p_fa: f64, p_md: f64) -> SensingResult {
        SensingResult { outcome, p_fa_used: p_fa, p_md_used: p_md }
    }

    #[test]
    fn init_from_stationary() {
        for t in belief_init(&[chain(0.2, 0.8); 3]).unwrap().theta {
            assert!((t - 0.5).abs() < 1e-15);
        }
        assert_eq!(belief_init(&[chain(1.0, 1.0); 2]).unwrap().theta, vec![1.0; 2]);
        let b = belief_init(&[chain(0.2, 0.8), chain(0.1, 0.6)]).unwrap();
        assert!((b.theta[1] - 0.2).abs() < 1e-15);
        assert!(belief_init(&[chain(0.0, 1.0)]).is_err());
    }

    #[test]
    fn rewards() {
        let cap = StrategyConfig { reward_mode: RewardMode::Capacity, threshold_mode: ThresholdMode::Fixed, bandwidth: 1.0 };
        assert!((compute_reward(&cap, 1.0, 0.7) - 1.0).abs() < 1e-15);
        let adaptive = StrategyConfig { threshold_mode: ThresholdMode::Adaptive, ..cap };
        assert_eq!(compute_reward(&adaptive, 3.0, 0.0), 2.0);
        assert_eq!(compute_reward(&adaptive, 3.0, 1.0), 0.0);
        let bw = StrategyConfig { reward_mode: RewardMode::Bandwidth, threshold_mode: ThresholdMode::Mismatched, bandwidth: 2.0 };
        assert_eq!(compute_reward(&bw, 50.0, 0.25), 1.5);
    }

    #[test]
    fn selection_by_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let b = BeliefVector { theta: vec![0.5, 0.9] };
            assert_eq!(select_channel(&b, &[1.0, 1.0], &mut rng).unwrap(), 1);
            let b = BeliefVector { theta: vec![0.9, 0.5] };
            assert_eq!(select_channel(&b, &[1.0, 2.0], &mut rng).unwrap(), 1);
            let b = BeliefVector { theta: vec![0.8, 0.5, 0.5] };
            assert_eq!(select_channel(&b, &[1.0, 1.0, 1.5], &mut rng).unwrap(), 0);
        }
        let b = BeliefVector { theta: vec![0.9, 0.5] };
        assert!(select_channel(&BeliefVector { theta: vec![] }, &[], &mut rng).is_err());
        assert!(select_channel(&b, &[1.0], &mut rng).is_err());
    }

    #[test]
    fn ties_are_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let b = BeliefVector { theta: vec![0.5; 4] };
        let trials = 100_000;
        let mut counts = [0usize; 4];
        for _ in 0..trials {
            counts[select_channel(&b, &[1.0; 4], &mut rng).unwrap()] += 1;
        }
        let sd = (0.25 * 0.75 / trials as f64).sqrt();
        for c in counts {
            assert!((c as f64 / trials as f64 - 0.25).abs() < 3.0 * sd, "{counts:?}");
        }
    }

    #[test]
    fn correction_cases() {
        assert_eq!(belief_correct(0.3, &result(SensingOutcome::Idle, 0.0, 0.0)).unwrap(), 1.0);
        for outcome in [SensingOutcome::Idle, SensingOutcome::Busy] {
            let v = belief_correct(0.37, &result(outcome, 0.3, 0.7)).unwrap();
            assert!((v - 0.37).abs() < 1e-15);
        }
        let v = belief_correct(0.5, &result(SensingOutcome::Idle, 0.2, 0.1)).unwrap();
        assert!((v - 8.0 / 9.0).abs() < 1e-15);
        assert!(matches!(belief_correct(1.0, &result(SensingOutcome::Busy, 0.0, 0.0)), Err(Error::DegenerateBelief)));
    }

    #[test]
    fn propagation_cases() {
        let p = [chain(0.2, 0.8); 3];
        let b = BeliefVector { theta: vec![0.5, 1.0, 0.0] };
        let next = belief_propagate(&b, None, &p);
        assert!((next.theta[0] - 0.5).abs() < 1e-15);
        assert!((next.theta[1] - 0.8).abs() < 1e-15);
        assert!((next.theta[2] - 0.2).abs() < 1e-15);
        let ident = [chain(0.0, 1.0); 3];
        assert_eq!(belief_propagate(&b, None, &ident), b);
        let sensed = belief_propagate(&b, Some((0, 1.0)), &p);
        assert!((sensed.theta[0] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn constant_instantaneous_reliability_matches_fixed_update() {
        // The adaptive update with p_FA(t) held constant is the fixed update.
        let fixed = result(SensingOutcome::Idle, 0.42, 0.1);
        let inst = SensingResult { p_fa_used: 0.42, ..fixed };
        for theta in [0.1, 0.5, 0.77] {
            assert_eq!(
                belief_correct(theta, &fixed).unwrap().to_bits(),
                belief_correct(theta, &inst).unwrap().to_bits()
            );
        }
    }

    #[test]
    fn bayes_calibration_on_synthetic_chain() {
        let params = [chain(0.2, 0.8)];
        let (p_fa, p_md) = (0.3, 0.1);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut state_idle = rng.random::<f64>() < 0.5;
        let mut belief = belief_init(&params).unwrap();
        let (mut in_bin, mut idle_in_bin) = (0usize, 0usize);
        for _ in 0..1_000_000 {
            if (0.7..=0.8).contains(&belief.theta[0]) {
                in_bin += 1;
                idle_in_bin += state_idle as usize;
            }
            let sensed_idle = if state_idle { rng.random::<f64>() >= p_fa } else { rng.random::<f64>() < p_md };
            let outcome = if sensed_idle { SensingOutcome::Idle } else { SensingOutcome::Busy };
            let r = belief_correct(belief.theta[0], &result(outcome, p_fa, p_md)).unwrap();
            belief = belief_propagate(&belief, Some((0, r)), &params);
            let stay = if state_idle { 0.8 } else { 0.2 };
            state_idle = rng.random::<f64>() < stay;
        }
        let freq = idle_in_bin as f64 / in_bin as f64;
        let sd = (0.25 / in_bin as f64).sqrt();
        assert!(in_bin > 10_000);
        assert!(freq > 0.7 - 3.0 * sd && freq < 0.8 + 3.0 * sd, "{freq} over {in_bin}");
    }

    proptest! {
        #[test]
        fn beliefs_stay_in_unit_interval(
            steps in prop::collection::vec((any::<bool>(), 0.0f64..1.0, 0.0f64..1.0), 1..60),
            p01 in 0.0f64..1.0,
            p11 in 0.0f64..1.0,
        ) {
            let params = [MarkovChainParams { p01, p11 }];
            let mut b = BeliefVector { theta: vec![0.5] };
            for (idle, p_fa, p_md) in steps {
                let outcome = if idle { SensingOutcome::Idle } else { SensingOutcome::Busy };
                if let Ok(r) = belief_correct(b.theta[0], &result(outcome, p_fa, p_md)) {
                    prop_assert!((0.0..=1.0).contains(&r));
                    b = belief_propagate(&b, Some((0, r)), &params);
                } else {
                    b = belief_propagate(&b, None, &params);
                }
                prop_assert!((0.0..=1.0).contains(&b.theta[0]));
                if p01 <= p11 {
                    prop_assert!(b.theta[0] >= p01 - 1e-15 && b.theta[0] <= p11 + 1e-15);
                }
            }
        }

        #[test]
        fn selection_invariant_to_reward_scaling(
            theta in prop::collection::vec(0.0f64..1.0, 1..20),
            scale in 1e-3f64..1e3,
            seed in any::<u64>(),
        ) {
            let rewards: Vec<f64> = (0..theta.len()).map(|i| 1.0 + (i % 3) as f64).collect();
            let scaled: Vec<f64> = rewards.iter().map(|r| r * scale).collect();
            let b = BeliefVector { theta };
            let a = select_channel(&b, &rewards, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            let s = select_channel(&b, &scaled, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            prop_assert_eq!(a, s);
        }
    }
}
