//! Slotted multi-SU, multichannel MAC simulation.
//!
//! Each slot: PU occupancy steps, fresh SNR fields are drawn, every SU picks a
//! channel myopically, senses it, transmits if it sensed idle, contention and
//! collisions are resolved, beliefs are updated and the PUs collect their rate.
//!
//! Randomness is split into independent ChaCha streams per replication so the
//! environment (occupancy and fading) is identical across sensing policies that
//! share a seed.

mod metrics;
mod plan;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

use crate::channel::{observe_mismatched, FadingKind, FadingSpec, LinkKind, MismatchSpec, SnrGrid};
use crate::error::{Error, Result};
use crate::numerics::{
    pfa_from_threshold, pmd_instantaneous, simulate_decision_statistic, ApproxMode, DetectorConfig, Threshold,
    ThresholdMode,
};
use crate::strategy::{
    belief_correct, belief_init, belief_propagate, compute_reward, select_channel, BeliefVector, RewardMode,
    SensingOutcome, SensingResult, StrategyConfig,
};
use crate::traffic::{initial_occupancy, stationary_idle_prob, step_occupancy, MarkovChainParams, OccupancyState};

pub use metrics::{EpisodeMetrics, Estimate, Metrics};
use plan::SensingPlan;

/// How sensing decisions are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SensingBackend {
    /// Bernoulli draws from the computed miss-detection / false-alarm probabilities.
    Bernoulli,
    /// Draw the chi-square decision statistic and compare it with τ.
    Statistic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    /// M, the number of SU pairs.
    pub num_sus: usize,
    /// N, the number of channels.
    pub num_channels: usize,
    /// T, slots per episode.
    pub num_slots: usize,
    /// One PU occupancy chain per channel.
    pub chains: Vec<MarkovChainParams>,
    /// Average PU-to-PU SNR in dB, used for the PU rate.
    pub pu_snr_db: f64,
    pub pu_su: FadingSpec,
    pub su_su: FadingSpec,
    pub detector: DetectorConfig,
    pub reward_mode: RewardMode,
    /// Bandwidth B of every channel.
    pub bandwidth: f64,
    /// Sense the true state (reference curves).
    pub perfect_sensing: bool,
    pub mismatch: Option<MismatchSpec>,
    pub replications: usize,
    pub seed: u64,
    pub backend: SensingBackend,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let num_channels = 40;
        Self {
            num_sus: 20,
            num_channels,
            num_slots: 20,
            chains: vec![MarkovChainParams { p01: 0.2, p11: 0.8 }; num_channels],
            pu_snr_db: 10.0,
            pu_su: FadingSpec::rayleigh(-10.0, LinkKind::PuToSu),
            su_su: FadingSpec::rayleigh(10.0, LinkKind::SuToSu),
            detector: DetectorConfig {
                nu: 100,
                pmd_target: 0.1,
                threshold_mode: ThresholdMode::Fixed,
                approx_mode: ApproxMode::Gaussian,
            },
            reward_mode: RewardMode::Bandwidth,
            bandwidth: 1.0,
            perfect_sensing: false,
            mismatch: None,
            replications: 500,
            seed: 1,
            backend: SensingBackend::Bernoulli,
        }
    }
}

impl ScenarioConfig {
    pub fn strategy_config(&self) -> StrategyConfig {
        StrategyConfig {
            reward_mode: self.reward_mode,
            threshold_mode: if self.perfect_sensing { ThresholdMode::Fixed } else { self.detector.threshold_mode },
            bandwidth: self.bandwidth,
        }
    }

    /// Replaces every channel's chain with `chain`.
    pub fn with_uniform_chain(mut self, chain: MarkovChainParams) -> Self {
        self.chains = vec![chain; self.num_channels];
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("M", self.num_sus),
            ("N", self.num_channels),
            ("T", self.num_slots),
            ("replications", self.replications),
        ] {
            if v < 1 {
                return Err(Error::Validation(format!("{name} must be >= 1, got {v}")));
            }
        }
        if self.chains.len() != self.num_channels {
            return Err(Error::Validation(format!(
                "expected one Markov chain per channel ({}), got {}",
                self.num_channels,
                self.chains.len()
            )));
        }
        for chain in &self.chains {
            chain.validate()?;
            stationary_idle_prob(chain)
                .map_err(|_| Error::Validation("chain.p01/chain.p11 give no stationary distribution".into()))?;
        }
        if !self.pu_snr_db.is_finite() {
            return Err(Error::Validation("pu_snr_db must be finite".into()));
        }
        if self.pu_su.applies_to != LinkKind::PuToSu || self.su_su.applies_to != LinkKind::SuToSu {
            return Err(Error::Validation("fading specs are attached to the wrong links".into()));
        }
        self.pu_su.validate()?;
        self.su_su.validate()?;
        self.detector.validate()?;
        self.strategy_config().validate()?;
        let mismatched = self.detector.threshold_mode == ThresholdMode::Mismatched && !self.perfect_sensing;
        match (&self.mismatch, mismatched) {
            (None, true) => return Err(Error::Validation("mismatched threshold mode needs mismatch.nmse".into())),
            (Some(_), false) => {
                return Err(Error::Validation("mismatch.nmse is only used by the mismatched threshold mode".into()))
            }
            _ => {}
        }
        if let Some(m) = &self.mismatch {
            MismatchSpec::new(m.nmse)?;
            if !matches!(self.pu_su.kind, FadingKind::RayleighIid { .. }) {
                return Err(Error::Validation("mismatched CSI requires Rayleigh PU-to-SU fading".into()));
            }
        }
        if self.perfect_sensing && self.backend == SensingBackend::Statistic {
            return Err(Error::Validation("perfect sensing has no decision statistic to simulate".into()));
        }
        Ok(())
    }
}

/// Per-SU outcome of one slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuSlot {
    pub channel: usize,
    pub sensed: SensingOutcome,
    pub truly_idle: bool,
    pub transmitted: bool,
    pub success: bool,
    /// Bits earned in this slot.
    pub rate: f64,
}

/// Per-channel outcome of one slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelSlot {
    pub pu_active: bool,
    /// Some SU transmitted while the PU was active.
    pub collided: bool,
    pub pu_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlotRecord {
    pub sus: Vec<SuSlot>,
    pub channels: Vec<ChannelSlot>,
}

/// Random streams of one replication.
#[derive(Debug, Clone)]
struct Streams {
    /// Occupancy and every fading draw; identical across policies.
    env: ChaCha8Rng,
    /// Tie-breaking, sensing outcomes and contention.
    decision: ChaCha8Rng,
    /// CSI observation noise and extra cooperative branches.
    observation: ChaCha8Rng,
}

const STREAMS_PER_REPLICATION: u64 = 4;

impl Streams {
    fn new(seed: u64, replication: u64) -> Self {
        let stream = |k: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(replication * STREAMS_PER_REPLICATION + k);
            rng
        };
        Self { env: stream(0), decision: stream(1), observation: stream(2) }
    }
}

/// Mutable state carried from slot to slot.
#[derive(Debug, Clone)]
pub struct EpisodeState {
    occupancy: OccupancyState,
    beliefs: Vec<BeliefVector>,
    slot: usize,
    streams: Streams,
}

impl EpisodeState {
    pub fn occupancy(&self) -> &OccupancyState {
        &self.occupancy
    }

    pub fn beliefs(&self) -> &[BeliefVector] {
        &self.beliefs
    }

    /// Slots already simulated.
    pub fn slot(&self) -> usize {
        self.slot
    }
}

/// A validated scenario together with its precomputed detector plan.
#[derive(Debug, Clone)]
pub struct Simulator {
    config: ScenarioConfig,
    strategy: StrategyConfig,
    plan: SensingPlan,
}

impl Simulator {
    pub fn new(config: ScenarioConfig) -> Result<Self> {
        config.validate()?;
        let plan = SensingPlan::build(
            &config.detector,
            &config.pu_su,
            config.perfect_sensing,
            config.mismatch.map(|m| m.nmse),
        )?;
        let strategy = config.strategy_config();
        Ok(Self { config, strategy, plan })
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    /// Fresh state for replication `replication` of `seed`: stationary
    /// occupancy and beliefs.
    pub fn init_state(&self, seed: u64, replication: u64) -> Result<EpisodeState> {
        let mut streams = Streams::new(seed, replication);
        let occupancy = initial_occupancy(&self.config.chains, &mut streams.env)?;
        let belief = belief_init(&self.config.chains)?;
        Ok(EpisodeState { occupancy, beliefs: vec![belief; self.config.num_sus], slot: 0, streams })
    }

    /// Advances `state` by one slot.
    pub fn run_slot(&self, state: &mut EpisodeState) -> Result<SlotRecord> {
        let cfg = &self.config;
        let det = &cfg.detector;
        let (m_count, n_count) = (cfg.num_sus, cfg.num_channels);

        // (1) PU occupancy.
        state.occupancy = step_occupancy(&state.occupancy, &cfg.chains, &mut state.streams.env);

        // (2) Fading fields, always drawn in full so every policy sees the same environment.
        let lambda = cfg.pu_su.draw(m_count, n_count, &mut state.streams.env);
        let gamma = cfg.su_su.draw(m_count, n_count, &mut state.streams.env);
        let pu_mean = crate::db_to_linear(cfg.pu_snr_db);
        let gamma_pu: Vec<f64> = (0..n_count)
            .map(|_| {
                let e: f64 = Exp1.sample(&mut state.streams.env);
                e * pu_mean
            })
            .collect();
        let lambda_hat = match (&self.plan, &cfg.mismatch) {
            (SensingPlan::Mismatched { mean, .. }, Some(m)) => Some(SnrGrid::from_fn(m_count, n_count, |i, j| {
                observe_mismatched(lambda.get(i, j), *mean, m.nmse, &mut state.streams.observation)
            })),
            _ => None,
        };

        // (3) Rewards and channel selection.
        let mut choices = Vec::with_capacity(m_count);
        for m in 0..m_count {
            let mut rewards = Vec::with_capacity(n_count);
            let mut taus = Vec::with_capacity(n_count);
            for n in 0..n_count {
                let (tau, p_fa) = match &self.plan {
                    SensingPlan::Adaptive { .. } => {
                        let tau = self.plan.threshold(det, lambda.get(m, n))?;
                        (Some(tau), pfa_from_threshold(det, tau)?)
                    }
                    SensingPlan::Mismatched { .. } => {
                        let lh = lambda_hat.as_ref().expect("mismatched plan draws observations").get(m, n);
                        let tau = self.plan.threshold(det, lh)?;
                        (Some(tau), pfa_from_threshold(det, tau)?)
                    }
                    _ => (None, 0.0),
                };
                rewards.push(compute_reward(&self.strategy, gamma.get(m, n), p_fa));
                taus.push(tau);
            }
            let n = select_channel(&state.beliefs[m], &rewards, &mut state.streams.decision)?;
            choices.push((n, taus[n]));
        }

        // (4) Sensing.
        let mut sus = Vec::with_capacity(m_count);
        let mut results = Vec::with_capacity(m_count);
        for (m, &(n, tau)) in choices.iter().enumerate() {
            let truly_idle = state.occupancy.states[n].is_idle();
            let result = self.sense(state, m, n, tau, truly_idle, &lambda)?;
            sus.push(SuSlot {
                channel: n,
                sensed: result.outcome,
                truly_idle,
                transmitted: result.outcome == SensingOutcome::Idle,
                success: false,
                rate: 0.0,
            });
            results.push(result);
        }

        // (5) Transmission, contention and collisions.
        let mut channels: Vec<ChannelSlot> = state
            .occupancy
            .states
            .iter()
            .map(|s| ChannelSlot { pu_active: !s.is_idle(), collided: false, pu_rate: 0.0 })
            .collect();
        let mut transmitters: Vec<Vec<usize>> = vec![Vec::new(); n_count];
        for (m, su) in sus.iter().enumerate() {
            if su.transmitted {
                transmitters[su.channel].push(m);
            }
        }
        for (n, senders) in transmitters.iter().enumerate() {
            if senders.is_empty() {
                continue;
            }
            if channels[n].pu_active {
                channels[n].collided = true;
                continue;
            }
            let winner = senders[state.streams.decision.random_range(0..senders.len())];
            let su = &mut sus[winner];
            su.success = true;
            su.rate = cfg.bandwidth * (1.0 + gamma.get(winner, n)).log2();
        }

        // (6) Belief correction and propagation.
        for (m, result) in results.iter().enumerate() {
            let n = sus[m].channel;
            let corrected = belief_correct(state.beliefs[m].theta[n], result)?;
            state.beliefs[m] = belief_propagate(&state.beliefs[m], Some((n, corrected)), &cfg.chains);
        }

        // (7) PU rate.
        for (ch, g) in channels.iter_mut().zip(&gamma_pu) {
            if ch.pu_active && !ch.collided {
                ch.pu_rate = cfg.bandwidth * (1.0 + g).log2();
            }
        }

        state.slot += 1;
        Ok(SlotRecord { sus, channels })
    }

    /// Senses channel `n` for SU `m`; returns the outcome and the reliability
    /// numbers the belief update should use.
    fn sense(
        &self,
        state: &mut EpisodeState,
        m: usize,
        n: usize,
        tau: Option<Threshold>,
        truly_idle: bool,
        lambda: &SnrGrid,
    ) -> Result<SensingResult> {
        let det = &self.config.detector;
        let l = lambda.get(m, n);
        let outcome_of = |idle: bool| if idle { SensingOutcome::Idle } else { SensingOutcome::Busy };
        let (tau, branch_lambdas, p_md_used, p_fa_used) = match &self.plan {
            SensingPlan::Perfect => {
                return Ok(SensingResult { outcome: outcome_of(truly_idle), p_fa_used: 0.0, p_md_used: 0.0 });
            }
            SensingPlan::Fixed { tau, average } => (*tau, vec![l], average.p_md, average.p_fa),
            SensingPlan::Adaptive { .. } => {
                let tau = tau.expect("adaptive thresholds are computed at selection");
                (tau, vec![l], pmd_instantaneous(det, l, tau)?, pfa_from_threshold(det, tau)?)
            }
            SensingPlan::Mismatched { .. } => {
                let tau = tau.expect("mismatched thresholds are computed at selection");
                (tau, vec![l], det.pmd_target, pfa_from_threshold(det, tau)?)
            }
            SensingPlan::Cooperative { branches, tau, fused } => {
                let mut ls = Vec::with_capacity(*branches as usize);
                ls.push(l);
                for _ in 1..*branches {
                    ls.push(self.config.pu_su.draw_one(&mut state.streams.observation));
                }
                (*tau, ls, fused.p_md, fused.p_fa)
            }
        };
        let sensed_idle = match self.config.backend {
            SensingBackend::Bernoulli => {
                let p_idle = if truly_idle {
                    let p_fa = pfa_from_threshold(det, tau)?;
                    (1.0 - p_fa).powi(branch_lambdas.len() as i32)
                } else {
                    let mut p = 1.0;
                    for &bl in &branch_lambdas {
                        p *= pmd_instantaneous(det, bl, tau)?;
                    }
                    p
                };
                state.streams.decision.random::<f64>() < p_idle
            }
            SensingBackend::Statistic => {
                // OR rule: busy as soon as any branch statistic exceeds τ.
                let mut idle = true;
                for &bl in &branch_lambdas {
                    let snr = if truly_idle { 0.0 } else { bl };
                    if simulate_decision_statistic(det, snr, &mut state.streams.decision)? > tau.value() {
                        idle = false;
                    }
                }
                idle
            }
        };
        Ok(SensingResult { outcome: outcome_of(sensed_idle), p_fa_used, p_md_used })
    }

    /// Runs one full episode of replication `replication` and returns its records.
    pub fn run_episode_records(&self, seed: u64, replication: u64) -> Result<(Vec<SlotRecord>, EpisodeMetrics)> {
        let mut state = self.init_state(seed, replication)?;
        let mut records = Vec::with_capacity(self.config.num_slots);
        for _ in 0..self.config.num_slots {
            records.push(self.run_slot(&mut state)?);
        }
        let metrics = EpisodeMetrics::from_records(&records, self.config.num_sus, self.config.num_channels);
        Ok((records, metrics))
    }

    /// Episode metrics of replication `replication` without keeping records.
    pub fn run_replication(&self, seed: u64, replication: u64) -> Result<EpisodeMetrics> {
        let mut state = self.init_state(seed, replication)?;
        let mut acc = metrics::Accumulator::new(self.config.num_sus, self.config.num_channels);
        for _ in 0..self.config.num_slots {
            acc.add(&self.run_slot(&mut state)?);
        }
        Ok(acc.finish())
    }

    /// Mean metrics and 95% confidence half-widths over `config.replications`
    /// independent replications, run in parallel.
    pub fn run_monte_carlo(&self) -> Result<Metrics> {
        use rayon::prelude::*;
        let seed = self.config.seed;
        let episodes = (0..self.config.replications as u64)
            .into_par_iter()
            .map(|r| self.run_replication(seed, r))
            .collect::<Result<Vec<_>>>()?;
        Ok(Metrics::from_episodes(&episodes))
    }
}

/// Deterministic single episode (replication 0 of `seed`).
pub fn run_episode(config: &ScenarioConfig, seed: u64) -> Result<(Vec<SlotRecord>, EpisodeMetrics)> {
    Simulator::new(config.clone())?.run_episode_records(seed, 0)
}

/// Monte Carlo over `config.replications` replications seeded from `config.seed`.
pub fn run_monte_carlo(config: &ScenarioConfig) -> Result<Metrics> {
    Simulator::new(config.clone())?.run_monte_carlo()
}
