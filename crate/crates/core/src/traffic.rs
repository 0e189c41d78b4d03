//! Two-state Markov PU occupancy, one global chain per channel.

use rand::Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkovChainParams {
    /// Pr[busy → idle].
    pub p01: f64,
    /// Pr[idle → idle].
    pub p11: f64,
}

impl MarkovChainParams {
    pub fn new(p01: f64, p11: f64) -> Result<Self> {
        let params = Self { p01, p11 };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p01) || !(0.0..=1.0).contains(&self.p11) {
            return Err(Error::Validation(format!(
                "chain.p01 and chain.p11 must lie in [0, 1], got {} and {}",
                self.p01, self.p11
            )));
        }
        Ok(())
    }

    /// Next-slot idle probability given the current one: p11·x + p01·(1 − x).
    #[inline]
    pub fn propagate(&self, idle_prob: f64) -> f64 {
        self.p11 * idle_prob + self.p01 * (1.0 - idle_prob)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChannelState {
    Busy = 0,
    Idle = 1,
}

impl ChannelState {
    pub fn is_idle(self) -> bool {
        self == ChannelState::Idle
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OccupancyState {
    pub states: Vec<ChannelState>,
}

/// Stationary idle probability p01 / (p01 + 1 − p11).
pub fn stationary_idle_prob(params: &MarkovChainParams) -> Result<f64> {
    params.validate()?;
    let denom = params.p01 + 1.0 - params.p11;
    if denom <= 0.0 {
        return Err(Error::DegenerateChain { p01: params.p01, p11: params.p11 });
    }
    Ok(params.p01 / denom)
}

/// Draws each channel from its stationary distribution.
pub fn initial_occupancy<R: Rng + ?Sized>(params: &[MarkovChainParams], rng: &mut R) -> Result<OccupancyState> {
    let states = params
        .iter()
        .map(|p| {
            let idle = stationary_idle_prob(p)?;
            Ok(if rng.random::<f64>() < idle { ChannelState::Idle } else { ChannelState::Busy })
        })
        .collect::<Result<_>>()?;
    Ok(OccupancyState { states })
}

/// Advances every channel one slot; one uniform draw per channel.
pub fn step_occupancy<R: Rng + ?Sized>(state: &OccupancyState, params: &[MarkovChainParams], rng: &mut R) -> OccupancyState {
    debug_assert_eq!(state.states.len(), params.len());
    let states = state
        .states
        .iter()
        .zip(params)
        .map(|(&s, p)| {
            let idle_prob = match s {
                ChannelState::Idle => p.p11,
                ChannelState::Busy => p.p01,
            };
            if rng.random::<f64>() < idle_prob { ChannelState::Idle } else { ChannelState::Busy }
        })
        .collect();
    OccupancyState { states }
}
