//! Episode metrics and their Monte Carlo aggregation.

use super::SlotRecord;

/// z-value of a two-sided 95% normal interval.
const Z95: f64 = 1.959_963_984_540_054;

/// Metrics of one episode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeMetrics {
    /// Bits per slot per SU.
    pub su_throughput: f64,
    /// Bits per slot per channel.
    pub pu_throughput: f64,
    /// Sensing slots whose channel was PU-busy.
    pub busy_sensed: u64,
    /// Of those, slots sensed idle (missed detections).
    pub missed: u64,
}

impl EpisodeMetrics {
    pub fn from_records(records: &[SlotRecord], num_sus: usize, num_channels: usize) -> Self {
        let mut acc = Accumulator::new(num_sus, num_channels);
        for r in records {
            acc.add(r);
        }
        acc.finish()
    }

    /// Fraction of PU-busy sensed slots that were missed; zero when none were busy.
    pub fn collision_rate(&self) -> f64 {
        if self.busy_sensed == 0 {
            0.0
        } else {
            self.missed as f64 / self.busy_sensed as f64
        }
    }
}

pub(crate) struct Accumulator {
    num_sus: usize,
    num_channels: usize,
    slots: usize,
    su_total: f64,
    pu_total: f64,
    busy_sensed: u64,
    missed: u64,
}

impl Accumulator {
    pub(crate) fn new(num_sus: usize, num_channels: usize) -> Self {
        Self { num_sus, num_channels, slots: 0, su_total: 0.0, pu_total: 0.0, busy_sensed: 0, missed: 0 }
    }

    pub(crate) fn add(&mut self, record: &SlotRecord) {
        self.slots += 1;
        for su in &record.sus {
            self.su_total += su.rate;
            if !su.truly_idle {
                self.busy_sensed += 1;
                if su.transmitted {
                    self.missed += 1;
                }
            }
        }
        self.pu_total += record.channels.iter().map(|c| c.pu_rate).sum::<f64>();
    }

    pub(crate) fn finish(self) -> EpisodeMetrics {
        let slots = self.slots.max(1) as f64;
        EpisodeMetrics {
            su_throughput: self.su_total / (self.num_sus as f64 * slots),
            pu_throughput: self.pu_total / (self.num_channels as f64 * slots),
            busy_sensed: self.busy_sensed,
            missed: self.missed,
        }
    }
}

/// Sample mean with the half-width of its 95% normal-approximation interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    /// Zero when fewer than two samples are available.
    pub ci95: f64,
}

impl Estimate {
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len();
        if n == 0 {
            return Self { mean: 0.0, ci95: 0.0 };
        }
        let mean = samples.iter().sum::<f64>() / n as f64;
        if n < 2 {
            return Self { mean, ci95: 0.0 };
        }
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        Self { mean, ci95: Z95 * (var / n as f64).sqrt() }
    }

    pub fn lower(&self) -> f64 {
        self.mean - self.ci95
    }

    pub fn upper(&self) -> f64 {
        self.mean + self.ci95
    }

    /// Whether the two 95% intervals intersect.
    pub fn overlaps(&self, other: &Estimate) -> bool {
        self.lower() <= other.upper() && other.lower() <= self.upper()
    }
}

/// Monte Carlo summary across replications.
#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub replications: usize,
    pub su_throughput: Estimate,
    pub pu_throughput: Estimate,
    /// Pooled miss rate over all PU-busy sensed slots, with a binomial interval.
    pub collision_rate: Estimate,
    pub busy_sensed: u64,
    pub missed: u64,
}

impl Metrics {
    /// Aggregates episodes in the order given.
    pub fn from_episodes(episodes: &[EpisodeMetrics]) -> Self {
        let su: Vec<f64> = episodes.iter().map(|e| e.su_throughput).collect();
        let pu: Vec<f64> = episodes.iter().map(|e| e.pu_throughput).collect();
        let busy_sensed: u64 = episodes.iter().map(|e| e.busy_sensed).sum();
        let missed: u64 = episodes.iter().map(|e| e.missed).sum();
        let collision_rate = if busy_sensed == 0 {
            Estimate { mean: 0.0, ci95: 0.0 }
        } else {
            let p = missed as f64 / busy_sensed as f64;
            Estimate { mean: p, ci95: Z95 * (p * (1.0 - p) / busy_sensed as f64).sqrt() }
        };
        Self {
            replications: episodes.len(),
            su_throughput: Estimate::from_samples(&su),
            pu_throughput: Estimate::from_samples(&pu),
            collision_rate,
            busy_sensed,
            missed,
        }
    }

    /// Binomial standard deviation of the pooled miss rate if the true rate were `p`.
    pub fn miss_rate_sd(&self, p: f64) -> f64 {
        if self.busy_sensed == 0 {
            return 0.0;
        }
        (p * (1.0 - p) / self.busy_sensed as f64).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn estimate_of_known_samples() {
        let e = Estimate::from_samples(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(e.mean, 2.5);
        let sd = (5.0f64 / 3.0).sqrt();
        assert!((e.ci95 - Z95 * sd / 2.0).abs() < 1e-15);
        assert_eq!(Estimate::from_samples(&[7.0]).ci95, 0.0);
    }

    #[test]
    fn overlap_is_symmetric() {
        let a = Estimate { mean: 1.0, ci95: 0.1 };
        let b = Estimate { mean: 1.25, ci95: 0.1 };
        let c = Estimate { mean: 1.15, ci95: 0.1 };
        assert!(!a.overlaps(&b) && !b.overlaps(&a));
        assert!(a.overlaps(&c) && c.overlaps(&a));
    }
}
