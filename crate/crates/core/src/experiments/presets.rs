//! Canned sweeps reproducing the evaluation figures.

use std::fmt;
use std::str::FromStr;

use crate::channel::{FadingSpec, LinkKind, MismatchSpec};
use crate::error::{Error, Result};
use crate::numerics::{roc_curve_for, ApproxMode, RocMode, ThresholdMode};
use crate::simulator::{run_monte_carlo, Metrics, ScenarioConfig};
use crate::strategy::RewardMode;

use super::table::ResultTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PresetId {
    /// ROC of fixed and adaptive thresholds, analytic.
    Fig2,
    /// Throughput, PU throughput and miss rate against the miss-detection target.
    Fig3,
    /// Cooperative sensing against the number of branches.
    Fig4,
    /// Throughput under correlated lognormal shadowing against ρ.
    Fig5,
    /// Throughput under imperfect CSI against NMSE.
    Fig6,
}

impl PresetId {
    pub const ALL: [PresetId; 5] = [PresetId::Fig2, PresetId::Fig3, PresetId::Fig4, PresetId::Fig5, PresetId::Fig6];

    pub fn name(self) -> &'static str {
        match self {
            PresetId::Fig2 => "fig2",
            PresetId::Fig3 => "fig3",
            PresetId::Fig4 => "fig4",
            PresetId::Fig5 => "fig5",
            PresetId::Fig6 => "fig6",
        }
    }
}

impl fmt::Display for PresetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PresetId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let s = s.strip_prefix("fig").unwrap_or(&s);
        match s {
            "2" => Ok(PresetId::Fig2),
            "3" => Ok(PresetId::Fig3),
            "4" => Ok(PresetId::Fig4),
            "5" => Ok(PresetId::Fig5),
            "6" => Ok(PresetId::Fig6),
            _ => Err(Error::Validation(format!("unknown figure `{s}`; expected one of fig2..fig6"))),
        }
    }
}

/// Policies compared against the miss-detection target.
pub const FIG3_POLICIES: [&str; 6] =
    ["myopic_fixed", "su_csi_fixed", "pu_csi_adaptive", "combined_adaptive", "myopic_perfect", "su_csi_perfect"];

/// A sweep variable and the scenario every point starts from.
#[derive(Debug, Clone)]
pub struct ExperimentPreset {
    pub id: PresetId,
    pub sweep: Vec<f64>,
    pub base: ScenarioConfig,
}

impl ExperimentPreset {
    pub fn new(id: PresetId) -> Self {
        let mut base = ScenarioConfig::default();
        let sweep = match id {
            PresetId::Fig2 => vec![0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 0.9],
            PresetId::Fig3 => vec![0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 0.9],
            PresetId::Fig4 => vec![1.0, 2.0, 3.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0, 50.0],
            PresetId::Fig5 => {
                base.su_su = FadingSpec::lognormal(10.0, 5.0, 0.0, LinkKind::SuToSu);
                (0..10).map(|i| i as f64 / 10.0).collect()
            }
            PresetId::Fig6 => vec![1e-3, 3e-3, 1e-2, 3e-2, 0.1, 0.3, 1.0],
        };
        Self { id, sweep, base }
    }

    /// Overrides replications and seed of the base scenario.
    pub fn with_run(mut self, replications: usize, seed: u64) -> Self {
        self.base.replications = replications;
        self.base.seed = seed;
        self
    }

    /// The scenario of `policy` at sweep value `x`; `None` for unknown names.
    pub fn scenario(&self, x: f64, policy: &str) -> Option<ScenarioConfig> {
        let mut c = self.base.clone();
        let (mode, reward, perfect) = match (self.id, policy) {
            (PresetId::Fig3, p) => {
                c.detector.pmd_target = x;
                match p {
                    "myopic_fixed" => (ThresholdMode::Fixed, RewardMode::Bandwidth, false),
                    "su_csi_fixed" => (ThresholdMode::Fixed, RewardMode::Capacity, false),
                    "pu_csi_adaptive" => (ThresholdMode::Adaptive, RewardMode::Bandwidth, false),
                    "combined_adaptive" => (ThresholdMode::Adaptive, RewardMode::Capacity, false),
                    "myopic_perfect" => (ThresholdMode::Fixed, RewardMode::Bandwidth, true),
                    "su_csi_perfect" => (ThresholdMode::Fixed, RewardMode::Capacity, true),
                    _ => return None,
                }
            }
            (PresetId::Fig4, "cooperative") => {
                (ThresholdMode::Cooperative { branches: x as u32 }, RewardMode::Bandwidth, false)
            }
            (PresetId::Fig4, "adaptive") => (ThresholdMode::Adaptive, RewardMode::Bandwidth, false),
            (PresetId::Fig5, p @ ("adaptive" | "fixed")) => {
                c.pu_su = FadingSpec::lognormal(-10.0, 5.0, x, LinkKind::PuToSu);
                let mode = if p == "adaptive" { ThresholdMode::Adaptive } else { ThresholdMode::Fixed };
                (mode, RewardMode::Bandwidth, false)
            }
            (PresetId::Fig6, "mismatched") => {
                c.mismatch = Some(MismatchSpec { nmse: x });
                (ThresholdMode::Mismatched, RewardMode::Bandwidth, false)
            }
            (PresetId::Fig6, "perfect_csi") => (ThresholdMode::Adaptive, RewardMode::Bandwidth, false),
            (PresetId::Fig6, "fixed") => (ThresholdMode::Fixed, RewardMode::Bandwidth, false),
            _ => return None,
        };
        c.detector.threshold_mode = mode;
        c.reward_mode = reward;
        c.perfect_sensing = perfect;
        Some(c)
    }

    /// Series computed by this preset.
    pub fn series(&self) -> Vec<String> {
        let names: &[&str] = match self.id {
            PresetId::Fig2 => &["fixed_exact", "adaptive_exact", "fixed_gaussian", "adaptive_gaussian"],
            PresetId::Fig3 => {
                return ["su", "pu", "miss"]
                    .iter()
                    .flat_map(|m| FIG3_POLICIES.iter().map(move |p| format!("{m}.{p}")))
                    .collect()
            }
            PresetId::Fig4 => &["cooperative", "adaptive"],
            PresetId::Fig5 => &["adaptive", "fixed"],
            PresetId::Fig6 => &["mismatched", "perfect_csi", "fixed"],
        };
        names.iter().map(|s| s.to_string()).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.sweep.is_empty() {
            return Err(Error::Validation(format!("{} sweep is empty", self.id)));
        }
        if self.sweep.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Validation(format!("{} sweep must be strictly increasing", self.id)));
        }
        self.base.validate()
    }

    pub fn run(&self) -> Result<ResultTable> {
        self.validate()?;
        let mut table = ResultTable::new();
        match self.id {
            PresetId::Fig2 => self.run_roc(&mut table)?,
            PresetId::Fig3 => {
                for &x in &self.sweep {
                    for p in FIG3_POLICIES {
                        let m = self.simulate(x, p)?;
                        table.push_estimate(x, format!("su.{p}"), m.su_throughput);
                        table.push_estimate(x, format!("pu.{p}"), m.pu_throughput);
                        table.push_estimate(x, format!("miss.{p}"), m.collision_rate);
                    }
                }
            }
            PresetId::Fig4 => {
                // The reference does not depend on L.
                let reference = self.simulate(self.sweep[0], "adaptive")?.su_throughput;
                for &x in &self.sweep {
                    table.push_estimate(x, "cooperative", self.simulate(x, "cooperative")?.su_throughput);
                    table.push_estimate(x, "adaptive", reference);
                }
            }
            PresetId::Fig5 => {
                for &x in &self.sweep {
                    for p in ["adaptive", "fixed"] {
                        table.push_estimate(x, p, self.simulate(x, p)?.su_throughput);
                    }
                }
            }
            PresetId::Fig6 => {
                let perfect = self.simulate(self.sweep[0], "perfect_csi")?.su_throughput;
                let fixed = self.simulate(self.sweep[0], "fixed")?.su_throughput;
                for &x in &self.sweep {
                    table.push_estimate(x, "mismatched", self.simulate(x, "mismatched")?.su_throughput);
                    table.push_estimate(x, "perfect_csi", perfect);
                    table.push_estimate(x, "fixed", fixed);
                }
            }
        }
        table.sort();
        table.check_complete()?;
        Ok(table)
    }

    fn simulate(&self, x: f64, policy: &str) -> Result<Metrics> {
        let cfg = self
            .scenario(x, policy)
            .ok_or_else(|| Error::Validation(format!("{} has no policy `{policy}`", self.id)))?;
        run_monte_carlo(&cfg)
    }

    fn run_roc(&self, table: &mut ResultTable) -> Result<()> {
        let density = self.base.pu_su.density();
        for (approx, suffix) in [(ApproxMode::Exact, "exact"), (ApproxMode::Gaussian, "gaussian")] {
            let det = self.base.detector.with_approx(approx);
            for (mode, prefix) in [(RocMode::FixedThreshold, "fixed"), (RocMode::AdaptiveThreshold, "adaptive")] {
                for p in roc_curve_for(mode, &det, &density, &self.sweep)? {
                    table.push(p.p_md, format!("{prefix}_{suffix}"), p.p_fa, 0.0);
                }
            }
        }
        Ok(())
    }
}

/// Runs a preset with the given replications and seed.
pub fn run_preset(id: PresetId, replications: usize, seed: u64) -> Result<ResultTable> {
    ExperimentPreset::new(id).with_run(replications, seed).run()
}
