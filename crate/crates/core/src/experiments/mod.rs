//! Scenario files, result tables and the figure presets.

pub mod config;
pub mod presets;
pub mod table;

pub use config::{describe, load_config, parse_config};
pub use presets::{run_preset, ExperimentPreset, PresetId, FIG3_POLICIES};
pub use table::{format_g9, ResultTable, Row, CSV_HEADER};

use crate::error::Result;
use crate::simulator::{run_monte_carlo, ScenarioConfig};

/// Runs one scenario and tabulates SU throughput, PU throughput and miss
/// rate at x = the miss-detection target.
pub fn run_scenario(config: &ScenarioConfig) -> Result<ResultTable> {
    let m = run_monte_carlo(config)?;
    let x = config.detector.pmd_target;
    let mut t = ResultTable::new();
    t.push_estimate(x, "su", m.su_throughput);
    t.push_estimate(x, "pu", m.pu_throughput);
    t.push_estimate(x, "miss", m.collision_rate);
    t.sort();
    Ok(t)
}
