//! `key = value` scenario files.
//!
//! Blank lines and `#` comments are ignored. Keys are flat and dotted; unknown
//! keys are rejected. Absent keys keep the defaults of [`ScenarioConfig`].
//!
//! ```text
//! M = 20
//! N = 40
//! detector.threshold_mode = adaptive
//! strategy.reward = capacity
//! ```

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::channel::{FadingKind, FadingSpec, LinkKind, MismatchSpec};
use crate::error::{Error, Result};
use crate::numerics::{ApproxMode, ThresholdMode};
use crate::simulator::{ScenarioConfig, SensingBackend};
use crate::strategy::RewardMode;
use crate::traffic::MarkovChainParams;

const KEYS: &[&str] = &[
    "M",
    "N",
    "T",
    "replications",
    "seed",
    "chain.p01",
    "chain.p11",
    "pu_snr_db",
    "fading.pu_su.kind",
    "fading.pu_su.mean_snr_db",
    "fading.pu_su.mu_db",
    "fading.pu_su.sigma_db",
    "fading.pu_su.rho",
    "fading.su_su.kind",
    "fading.su_su.mean_snr_db",
    "fading.su_su.mu_db",
    "fading.su_su.sigma_db",
    "fading.su_su.rho",
    "detector.nu",
    "detector.pmd_target",
    "detector.threshold_mode",
    "detector.cooperative_l",
    "detector.approx",
    "detector.perfect",
    "strategy.reward",
    "strategy.bandwidth",
    "mismatch.nmse",
    "sensing.backend",
];

/// Lognormal spread used when a lognormal kind is selected without `sigma_db`.
const DEFAULT_SIGMA_DB: f64 = 5.0;

struct Entry {
    value: String,
    line: usize,
}

struct Entries<'a> {
    path: &'a Path,
    map: BTreeMap<String, Entry>,
}

impl Entries<'_> {
    fn parse_err(&self, line: usize, message: impl Into<String>) -> Error {
        Error::Parse { path: self.path.to_path_buf(), line, message: message.into() }
    }

    fn get<T: FromStr>(&mut self, key: &str) -> Result<Option<T>> {
        match self.map.remove(key) {
            None => Ok(None),
            Some(e) => e
                .value
                .parse::<T>()
                .map(Some)
                .map_err(|_| self.parse_err(e.line, format!("cannot parse value `{}` for `{key}`", e.value))),
        }
    }

    fn get_choice<T: Copy>(&mut self, key: &str, choices: &[(&str, T)]) -> Result<Option<T>> {
        match self.map.remove(key) {
            None => Ok(None),
            Some(e) => {
                let v = e.value.to_ascii_lowercase();
                choices.iter().find(|(name, _)| *name == v).map(|(_, t)| Some(*t)).ok_or_else(|| {
                    let names: Vec<&str> = choices.iter().map(|(n, _)| *n).collect();
                    self.parse_err(e.line, format!("`{key}` must be one of {}, got `{}`", names.join(", "), e.value))
                })
            }
        }
    }

    fn line_of(&self, key: &str) -> Option<usize> {
        self.map.get(key).map(|e| e.line)
    }
}

/// Reads and parses a scenario file.
pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    parse_config(&text, path)
}

/// Parses scenario text; `path` is only used in error messages.
pub fn parse_config(text: &str, path: &Path) -> Result<ScenarioConfig> {
    let mut entries = Entries { path, map: BTreeMap::new() };
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| entries.parse_err(line, format!("expected `key = value`, got `{content}`")))?;
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) && per_channel_key(key).is_none() {
            return Err(entries.parse_err(line, format!("unknown key `{key}`")));
        }
        if value.is_empty() {
            return Err(entries.parse_err(line, format!("missing value for `{key}`")));
        }
        if let Some(prev) = entries.map.get(key) {
            return Err(entries.parse_err(line, format!("duplicate key `{key}` (first set on line {})", prev.line)));
        }
        entries.map.insert(key.to_string(), Entry { value: value.to_string(), line });
    }
    let cfg = build(&mut entries)?;
    cfg.validate()?;
    Ok(cfg)
}

fn build(e: &mut Entries) -> Result<ScenarioConfig> {
    let mut cfg = ScenarioConfig::default();
    if let Some(v) = e.get("M")? {
        cfg.num_sus = v;
    }
    if let Some(v) = e.get("N")? {
        cfg.num_channels = v;
    }
    if let Some(v) = e.get("T")? {
        cfg.num_slots = v;
    }
    if let Some(v) = e.get("replications")? {
        cfg.replications = v;
    }
    if let Some(v) = e.get("seed")? {
        cfg.seed = v;
    }
    let p01 = e.get("chain.p01")?.unwrap_or(0.2);
    let p11 = e.get("chain.p11")?.unwrap_or(0.8);
    cfg.chains = vec![MarkovChainParams { p01, p11 }; cfg.num_channels];
    let overrides: Vec<String> = e.map.keys().filter(|k| per_channel_key(k).is_some()).cloned().collect();
    for key in overrides {
        let (n, field) = per_channel_key(&key).expect("filtered above");
        let line = e.line_of(&key).unwrap_or(0);
        let v: f64 = e.get(&key)?.expect("present");
        let chain = cfg.chains.get_mut(n).ok_or_else(|| {
            e.parse_err(line, format!("`{key}` names channel {n}, but N = {}", cfg.num_channels))
        })?;
        if field == "p01" {
            chain.p01 = v;
        } else {
            chain.p11 = v;
        }
    }
    if let Some(v) = e.get("pu_snr_db")? {
        cfg.pu_snr_db = v;
    }
    cfg.pu_su = fading(e, "pu_su", LinkKind::PuToSu, -10.0)?;
    cfg.su_su = fading(e, "su_su", LinkKind::SuToSu, 10.0)?;

    if let Some(v) = e.get("detector.nu")? {
        cfg.detector.nu = v;
    }
    if let Some(v) = e.get("detector.pmd_target")? {
        cfg.detector.pmd_target = v;
    }
    #[derive(Clone, Copy)]
    enum Mode {
        Fixed,
        Adaptive,
        Mismatched,
        Cooperative,
    }
    let mode = e.get_choice(
        "detector.threshold_mode",
        &[
            ("fixed", Mode::Fixed),
            ("adaptive", Mode::Adaptive),
            ("mismatched", Mode::Mismatched),
            ("cooperative", Mode::Cooperative),
        ],
    )?;
    let coop_line = e.line_of("detector.cooperative_l");
    let branches: Option<u32> = e.get("detector.cooperative_l")?;
    cfg.detector.threshold_mode = match (mode.unwrap_or(Mode::Fixed), branches) {
        (Mode::Cooperative, Some(branches)) => ThresholdMode::Cooperative { branches },
        (Mode::Cooperative, None) => {
            return Err(Error::Validation("cooperative threshold mode needs detector.cooperative_l".into()))
        }
        (_, Some(_)) => {
            return Err(e.parse_err(
                coop_line.unwrap_or(0),
                "`detector.cooperative_l` is only valid with detector.threshold_mode = cooperative",
            ))
        }
        (Mode::Fixed, None) => ThresholdMode::Fixed,
        (Mode::Adaptive, None) => ThresholdMode::Adaptive,
        (Mode::Mismatched, None) => ThresholdMode::Mismatched,
    };
    if let Some(v) =
        e.get_choice("detector.approx", &[("exact", ApproxMode::Exact), ("gaussian", ApproxMode::Gaussian)])?
    {
        cfg.detector.approx_mode = v;
    }
    if let Some(v) = e.get_choice("detector.perfect", &[("true", true), ("false", false)])? {
        cfg.perfect_sensing = v;
    }
    if let Some(v) =
        e.get_choice("strategy.reward", &[("bandwidth", RewardMode::Bandwidth), ("capacity", RewardMode::Capacity)])?
    {
        cfg.reward_mode = v;
    }
    if let Some(v) = e.get("strategy.bandwidth")? {
        cfg.bandwidth = v;
    }
    if let Some(nmse) = e.get::<f64>("mismatch.nmse")? {
        cfg.mismatch = Some(MismatchSpec::new(nmse)?);
    }
    if let Some(v) = e.get_choice(
        "sensing.backend",
        &[("bernoulli", SensingBackend::Bernoulli), ("statistic", SensingBackend::Statistic)],
    )? {
        cfg.backend = v;
    }
    debug_assert!(e.map.is_empty(), "every accepted key is consumed");
    Ok(cfg)
}

fn fading(e: &mut Entries, link: &str, applies_to: LinkKind, default_db: f64) -> Result<FadingSpec> {
    let key = |field: &str| format!("fading.{link}.{field}");
    let lognormal = e
        .get_choice(&key("kind"), &[("rayleigh", false), ("lognormal", true)])?
        .unwrap_or(false);
    if lognormal {
        if let Some(line) = e.line_of(&key("mean_snr_db")) {
            return Err(e.parse_err(line, format!("`{}` applies to rayleigh fading; use `{}`", key("mean_snr_db"), key("mu_db"))));
        }
        let mu_db = e.get(&key("mu_db"))?.unwrap_or(default_db);
        let sigma_db = e.get(&key("sigma_db"))?.unwrap_or(DEFAULT_SIGMA_DB);
        let rho = e.get(&key("rho"))?.unwrap_or(0.0);
        Ok(FadingSpec { kind: FadingKind::LognormalCorrelated { mu_db, sigma_db, rho }, applies_to })
    } else {
        for field in ["mu_db", "sigma_db", "rho"] {
            if let Some(line) = e.line_of(&key(field)) {
                return Err(e.parse_err(line, format!("`{}` applies to lognormal fading only", key(field))));
            }
        }
        let mean_snr_db = e.get(&key("mean_snr_db"))?.unwrap_or(default_db);
        Ok(FadingSpec::rayleigh(mean_snr_db, applies_to))
    }
}

/// Human-readable summary printed by `validate`.
pub fn describe(cfg: &ScenarioConfig) -> String {
    let mode = match cfg.detector.threshold_mode {
        ThresholdMode::Fixed => "fixed".to_string(),
        ThresholdMode::Adaptive => "adaptive".to_string(),
        ThresholdMode::Mismatched => "mismatched".to_string(),
        ThresholdMode::Cooperative { branches } => format!("cooperative (L = {branches})"),
    };
    format!(
        "M = {}, N = {}, T = {}, replications = {}, seed = {}\nthreshold {mode}, {:?} probabilities, target {}, nu = {}{}\nreward {:?}, bandwidth {}",
        cfg.num_sus,
        cfg.num_channels,
        cfg.num_slots,
        cfg.replications,
        cfg.seed,
        cfg.detector.approx_mode,
        cfg.detector.pmd_target,
        cfg.detector.nu,
        if cfg.perfect_sensing { ", perfect sensing" } else { "" },
        cfg.reward_mode,
        cfg.bandwidth,
    )
}

/// `chain.<n>.p01` or `chain.<n>.p11`, with `n` a zero-based channel index.
fn per_channel_key(key: &str) -> Option<(usize, &str)> {
    let rest = key.strip_prefix("chain.")?;
    let (n, field) = rest.split_once('.')?;
    if field != "p01" && field != "p11" {
        return None;
    }
    Some((n.parse().ok()?, field))
}
