//! Scenario configuration: a dotted `key = value` text format.
//!
//! One assignment per line, `#` starts a comment, sections are spelled as
//! key prefixes (`pulse.beta = 0.25`). Unknown or duplicate keys are
//! rejected so typos cannot silently fall back to defaults.
//!
//! ```text
//! pulse.beta   = 0.25
//! pulse.delta  = 0.9
//! channel.tau2 = 0.45       # delay difference; tau1 defaults to 0
//! channel.snr_db = 20       # or explicit channel.power + channel.sigma0_sq
//! run.mode     = frequency  # time | frequency | convergence | tau-sweep
//! output.csv_path = region.csv
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{CapError, CapResult};
use crate::pulse::PulseSpec;
use crate::region::{RegionMode, RegionRequest, DEFAULT_GRID_NODES, DEFAULT_WEIGHT_COUNT};
use crate::toeplitz::ChannelSpec;

/// What a `run` invocation computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunMode {
    /// One finite-block region at `channel.N`.
    Time,
    /// One infinite-block spectral region.
    Frequency,
    /// Finite-block regions over `run.n_list` against the spectral
    /// reference, reporting ray deviations.
    Convergence,
    /// Sum-capacity sweep over `run.tau_list` at `channel.N`.
    TauSweep,
}

impl RunMode {
    fn parse(s: &str) -> Option<RunMode> {
        match s {
            "time" => Some(RunMode::Time),
            "frequency" | "freq" => Some(RunMode::Frequency),
            "convergence" => Some(RunMode::Convergence),
            "tau-sweep" | "tau_sweep" => Some(RunMode::TauSweep),
            _ => None,
        }
    }
}

/// Fully validated scenario description.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub pulse: PulseSpec,
    pub chan: ChannelSpec,
    pub mode: RunMode,
    pub weight_count: usize,
    pub grid_nodes: usize,
    /// Block lengths for convergence runs (ascending).
    pub n_list: Vec<usize>,
    /// Delay differences for sweep runs (defaults to the tenths-of-a-period
    /// grid plus the midpoint).
    pub tau_list: Vec<f64>,
    pub seed: u64,
    pub allow_unstable: bool,
    pub csv_path: Option<String>,
    pub svg_path: Option<String>,
    /// Digits after the decimal point in scientific-notation CSV fields.
    pub precision: usize,
}

impl ScenarioConfig {
    /// Region request for the single-region modes (`time` / `frequency`),
    /// and the per-N template used by convergence runs.
    pub fn to_request(&self) -> RegionRequest {
        let mode = match self.mode {
            RunMode::Time => RegionMode::Time,
            _ => RegionMode::Frequency {
                grid_nodes: self.grid_nodes,
            },
        };
        let mut req = RegionRequest::new(self.pulse, self.chan, mode);
        req.weight_count = self.weight_count;
        req.seed = self.seed;
        req.allow_unstable = self.allow_unstable;
        req
    }
}

/// Sweep grid from the tau-sweep study: tenths of the accelerated period
/// plus the midpoint, ascending.
pub fn default_tau_grid(accelerated_period: f64) -> Vec<f64> {
    let mut taus: Vec<f64> = (0..10)
        .map(|k| k as f64 / 10.0 * accelerated_period)
        .collect();
    taus.push(accelerated_period / 2.0);
    taus.sort_by(|a, b| a.partial_cmp(b).unwrap());
    taus.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    taus
}

fn cfg_err(field: &str, reason: impl Into<String>) -> CapError {
    CapError::ConfigError {
        field: field.to_string(),
        reason: reason.into(),
    }
}

struct KeyMap {
    entries: BTreeMap<String, String>,
}

impl KeyMap {
    fn parse(text: &str) -> CapResult<KeyMap> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(cfg_err(
                    &format!("line {}", idx + 1),
                    format!("expected `key = value`, got `{line}`"),
                ));
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if key.is_empty() || value.is_empty() {
                return Err(cfg_err(
                    &format!("line {}", idx + 1),
                    "empty key or value",
                ));
            }
            if entries.insert(key.clone(), value).is_some() {
                return Err(cfg_err(&key, "duplicate key"));
            }
        }
        Ok(KeyMap { entries })
    }

    fn take(&mut self, key: &str) -> Option<String> {
        self.entries.remove(key)
    }

    fn take_f64(&mut self, key: &str) -> CapResult<Option<f64>> {
        self.take(key)
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|_| cfg_err(key, format!("not a number: `{v}`")))
            })
            .transpose()
    }

    fn take_usize(&mut self, key: &str) -> CapResult<Option<usize>> {
        self.take(key)
            .map(|v| {
                v.parse::<usize>()
                    .map_err(|_| cfg_err(key, format!("not a nonnegative integer: `{v}`")))
            })
            .transpose()
    }

    fn take_u64(&mut self, key: &str) -> CapResult<Option<u64>> {
        self.take(key)
            .map(|v| {
                v.parse::<u64>()
                    .map_err(|_| cfg_err(key, format!("not a nonnegative integer: `{v}`")))
            })
            .transpose()
    }

    fn take_bool(&mut self, key: &str) -> CapResult<Option<bool>> {
        self.take(key)
            .map(|v| match v.as_str() {
                "true" => Ok(true),
                "false" => Ok(false),
                _ => Err(cfg_err(key, format!("expected true or false, got `{v}`"))),
            })
            .transpose()
    }

    fn take_list_f64(&mut self, key: &str) -> CapResult<Option<Vec<f64>>> {
        self.take(key)
            .map(|v| {
                v.split(',')
                    .map(|item| {
                        let item = item.trim();
                        item.parse::<f64>()
                            .map_err(|_| cfg_err(key, format!("not a number: `{item}`")))
                    })
                    .collect::<CapResult<Vec<f64>>>()
            })
            .transpose()
    }

    fn take_list_usize(&mut self, key: &str) -> CapResult<Option<Vec<usize>>> {
        self.take(key)
            .map(|v| {
                v.split(',')
                    .map(|item| {
                        let item = item.trim();
                        item.parse::<usize>()
                            .map_err(|_| cfg_err(key, format!("not an integer: `{item}`")))
                    })
                    .collect::<CapResult<Vec<usize>>>()
            })
            .transpose()
    }

    fn finish(self) -> CapResult<()> {
        if let Some((key, _)) = self.entries.into_iter().next() {
            return Err(cfg_err(&key, "unknown key"));
        }
        Ok(())
    }
}

/// Parses and validates a scenario from configuration text.
pub fn parse_scenario(text: &str) -> CapResult<ScenarioConfig> {
    let mut keys = KeyMap::parse(text)?;

    let beta = keys
        .take_f64("pulse.beta")?
        .ok_or_else(|| cfg_err("pulse.beta", "required"))?;
    let delta = keys
        .take_f64("pulse.delta")?
        .ok_or_else(|| cfg_err("pulse.delta", "required"))?;
    let period = keys.take_f64("pulse.T")?.unwrap_or(1.0);
    let pulse = PulseSpec::new(beta, period, delta).map_err(|e| match e {
        CapError::InvalidSpec { field, reason } => cfg_err(&field, reason),
        other => other,
    })?;

    let tau1 = keys.take_f64("channel.tau1")?.unwrap_or(0.0);
    let tau2 = keys.take_f64("channel.tau2")?.unwrap_or(0.0);
    let n_symbols = keys.take_usize("channel.N")?.unwrap_or(20);

    let snr_db = keys.take_f64("channel.snr_db")?;
    let power_common = keys.take_f64("channel.power")?;
    let power_1 = keys.take_f64("channel.power_1")?;
    let power_2 = keys.take_f64("channel.power_2")?;
    let sigma0_sq = keys.take_f64("channel.sigma0_sq")?;
    let explicit = power_common.is_some()
        || power_1.is_some()
        || power_2.is_some()
        || sigma0_sq.is_some();
    let (sigma0_sq, power) = match (snr_db, explicit) {
        (Some(_), true) => {
            return Err(cfg_err(
                "channel.snr_db",
                "give either snr_db or explicit power/sigma0_sq, not both",
            ));
        }
        (Some(db), false) => (1.0, {
            let p = 10f64.powf(db / 10.0);
            (p, p)
        }),
        (None, false) => (1.0, (100.0, 100.0)), // 20 dB default
        (None, true) => {
            let sigma =
                sigma0_sq.ok_or_else(|| cfg_err("channel.sigma0_sq", "required with power"))?;
            let p = match (power_common, power_1, power_2) {
                (Some(p), None, None) => (p, p),
                (None, Some(p1), Some(p2)) => (p1, p2),
                (None, None, None) => {
                    return Err(cfg_err("channel.power", "required with sigma0_sq"));
                }
                _ => {
                    return Err(cfg_err(
                        "channel.power",
                        "give channel.power or both channel.power_1 and channel.power_2",
                    ));
                }
            };
            (sigma, p)
        }
    };
    let chan =
        ChannelSpec::new(tau1, tau2, sigma0_sq, power, n_symbols).map_err(|e| match e {
            CapError::InvalidSpec { field, reason } => cfg_err(&field, reason),
            other => other,
        })?;

    let mode = match keys.take("run.mode") {
        None => RunMode::Frequency,
        Some(v) => RunMode::parse(&v)
            .ok_or_else(|| cfg_err("run.mode", format!("unknown mode `{v}`")))?,
    };
    let weight_count = keys
        .take_usize("run.weight_count")?
        .unwrap_or(DEFAULT_WEIGHT_COUNT);
    if weight_count < 3 {
        return Err(cfg_err("run.weight_count", "must be at least 3"));
    }
    let grid_nodes = keys.take_usize("run.grid_M")?.unwrap_or(DEFAULT_GRID_NODES);
    if grid_nodes < 16 {
        return Err(cfg_err("run.grid_M", "must be at least 16"));
    }
    let n_list = keys
        .take_list_usize("run.n_list")?
        .unwrap_or_else(|| vec![16, 32, 64]);
    if n_list.is_empty() || n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(cfg_err("run.n_list", "must be a nonempty ascending list"));
    }
    let tau_list = keys
        .take_list_f64("run.tau_list")?
        .unwrap_or_else(|| default_tau_grid(pulse.accelerated_period()));
    if tau_list.is_empty() {
        return Err(cfg_err("run.tau_list", "must be nonempty"));
    }
    if tau_list
        .iter()
        .any(|&t| !t.is_finite() || t < 0.0 || t > pulse.symbol_period + 1e-12)
    {
        return Err(cfg_err(
            "run.tau_list",
            "delays must lie in [0, T]",
        ));
    }
    let seed = keys.take_u64("run.seed")?.unwrap_or(2026);
    let allow_unstable = keys.take_bool("run.allow_unstable")?.unwrap_or(false);

    let csv_path = keys.take("output.csv_path");
    let svg_path = keys.take("output.svg_path");
    let precision = keys.take_usize("output.precision")?.unwrap_or(11);
    if !(1..=17).contains(&precision) {
        return Err(cfg_err("output.precision", "must lie in 1..=17"));
    }

    keys.finish()?;

    Ok(ScenarioConfig {
        pulse,
        chan,
        mode,
        weight_count,
        grid_nodes,
        n_list,
        tau_list,
        seed,
        allow_unstable,
        csv_path,
        svg_path,
        precision,
    })
}

/// Reads and parses a scenario file.
pub fn load_scenario(path: &Path) -> CapResult<ScenarioConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        cfg_err(
            &path.display().to_string(),
            format!("cannot read config: {e}"),
        )
    })?;
    parse_scenario(&text)
}

// ---------------------------------------------------------------------------
