//! TOML experiment configuration.
//!
//! ```toml
//! name = "fig5"
//! kind = "outage_vs_snr"
//! schemes = ["gqf", "csit", "direct"]
//! beta = 0.5
//! seed = 1
//! samples = 100000
//!
//! [target]
//! r1 = 1.0
//! r2 = 1.0
//! ru = 3.0
//!
//! [fading]
//! var1d = 1.0
//! var2d = 1.0
//! var1r = 1.0
//! var2r = 1.0
//! varrd = 1.0
//!
//! [sweep]
//! start = 0.0
//! stop = 30.0
//! step = 5.0
//! ```

use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::Path;

use crate::channel::{ChannelState, FadingProfile, PowerConfig, SlotSplit};
use crate::error::{Error, Result};
use crate::outage::Scheme;
use crate::rates::RateTarget;

/// What an experiment sweeps and reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    /// Static channel; sum rates against the quantization noise variance.
    SigmaQ2Sweep,
    /// Static channel; sum rates at the optimal quantizer against `beta`.
    BetaSweep,
    /// Fading; common outage against SNR in dB.
    OutageVsSnr,
    /// Fading; expected sum rate against the relay-destination variance.
    ExprateVsSigmaRd,
    /// Fading; individual and common outage against the relay-destination
    /// variance.
    Individual,
}

impl ExperimentKind {
    /// Name of the swept variable, used as the first output column.
    pub fn variable(self) -> &'static str {
        match self {
            ExperimentKind::SigmaQ2Sweep => "sigma_q2",
            ExperimentKind::BetaSweep => "beta",
            ExperimentKind::OutageVsSnr => "snr_db",
            ExperimentKind::ExprateVsSigmaRd | ExperimentKind::Individual => "var_rd",
        }
    }

    pub fn is_static(self) -> bool {
        matches!(
            self,
            ExperimentKind::SigmaQ2Sweep | ExperimentKind::BetaSweep
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::SigmaQ2Sweep => "sigma_q2_sweep",
            ExperimentKind::BetaSweep => "beta_sweep",
            ExperimentKind::OutageVsSnr => "outage_vs_snr",
            ExperimentKind::ExprateVsSigmaRd => "exprate_vs_sigma_rd",
            ExperimentKind::Individual => "individual",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Scheme names accepted in a config.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeSpec {
    Gqf,
    /// GQF with the index rate picked from `ru_grid` per sweep point.
    GqfOpt,
    Csit,
    /// Classic CF with Wyner-Ziv binning (static kinds only).
    Cf,
    NonwzCf,
    NonwzCfOpt,
    Df,
    Af,
    Direct,
    DirectBoost,
}

impl SchemeSpec {
    pub fn name(self) -> &'static str {
        match self {
            SchemeSpec::Gqf => "gqf",
            SchemeSpec::GqfOpt => "gqf_opt",
            SchemeSpec::Csit => "csit",
            SchemeSpec::Cf => "cf",
            SchemeSpec::NonwzCf => "nonwz_cf",
            SchemeSpec::NonwzCfOpt => "nonwz_cf_opt",
            SchemeSpec::Df => "df",
            SchemeSpec::Af => "af",
            SchemeSpec::Direct => "direct",
            SchemeSpec::DirectBoost => "direct_boost",
        }
    }

    /// The per-state scheme and whether its index rate is optimized.
    pub fn fading_scheme(self) -> Option<(Scheme, bool)> {
        Some(match self {
            SchemeSpec::Gqf => (Scheme::Gqf, false),
            SchemeSpec::GqfOpt => (Scheme::Gqf, true),
            SchemeSpec::Csit => (Scheme::Csit, false),
            SchemeSpec::Cf => return None,
            SchemeSpec::NonwzCf => (Scheme::NonWzCf, false),
            SchemeSpec::NonwzCfOpt => (Scheme::NonWzCf, true),
            SchemeSpec::Df => (Scheme::Df, false),
            SchemeSpec::Af => (Scheme::Af, false),
            SchemeSpec::Direct => (Scheme::Direct, false),
            SchemeSpec::DirectBoost => (Scheme::DirectBoosted, false),
        })
    }

    fn allowed_in(self, kind: ExperimentKind) -> bool {
        if kind.is_static() {
            matches!(
                self,
                SchemeSpec::Gqf | SchemeSpec::Cf | SchemeSpec::Direct | SchemeSpec::DirectBoost
            )
        } else {
            self != SchemeSpec::Cf
        }
    }
}

/// Rate targets. `ru` is the fixed relay index rate used by `gqf` and
/// `nonwz_cf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSpec {
    pub r1: f64,
    pub r2: f64,
    #[serde(default)]
    pub ru: f64,
}

/// Real static gains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StaticGains {
    pub h1d: f64,
    pub h2d: f64,
    pub h1r: f64,
    pub h2r: f64,
    pub hrd: f64,
}

/// Power rule: an SNR in dB (sources at SNR, relay at `SNR / (1 - beta)`),
/// one common linear power, or all five powers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PowerSpec {
    Snr(SnrPower),
    Uniform(UniformPower),
    Explicit(PowerConfig),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnrPower {
    pub snr_db: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniformPower {
    pub p: f64,
}

impl PowerSpec {
    pub fn resolve(&self, beta: SlotSplit) -> Result<PowerConfig> {
        match self {
            PowerSpec::Snr(s) => PowerConfig::from_snr_db(s.snr_db, beta),
            PowerSpec::Uniform(u) => PowerConfig::uniform(u.p),
            PowerSpec::Explicit(p) => {
                p.validate()?;
                Ok(*p)
            }
        }
    }
}

/// Sweep grid: an explicit list, or `start..=stop` in steps of `step`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
}

/// Largest number of points a range sweep may expand to.
const MAX_GRID: usize = 1_000_000;

impl SweepSpec {
    pub fn grid(&self) -> Result<Vec<f64>> {
        let grid = match (&self.values, self.start, self.stop, self.step) {
            (Some(v), None, None, None) => v.clone(),
            (None, Some(start), Some(stop), Some(step)) => {
                if !(step > 0.0 && step.is_finite() && start.is_finite() && stop.is_finite()) {
                    return Err(Error::Config(
                        "sweep step must be positive and finite".into(),
                    ));
                }
                let count = ((stop - start) / step + 1e-9).floor();
                if !(count >= 0.0) || count >= MAX_GRID as f64 {
                    return Err(Error::Config(format!(
                        "sweep range {start}..{stop} step {step} is empty or too long"
                    )));
                }
                (0..=count as usize)
                    .map(|i| round_grid(start + i as f64 * step))
                    .collect()
            }
            _ => {
                return Err(Error::Config(
                    "sweep needs either `values` or all of `start`, `stop`, `step`".into(),
                ))
            }
        };
        if grid.is_empty() {
            return Err(Error::Config("sweep grid is empty".into()));
        }
        if grid.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("sweep values must be finite".into()));
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config(
                "sweep grid must be strictly increasing".into(),
            ));
        }
        Ok(grid)
    }
}

/// Rounds away accumulated binary noise (`0.1 * 3 = 0.30000000000000004`).
fn round_grid(v: f64) -> f64 {
    if v == 0.0 {
        return 0.0;
    }
    let scale = 10f64.powi(12 - v.abs().log10().ceil() as i32);
    (v * scale).round() / scale
}

/// Output paths; the CLI's `--out` and `--json` take precedence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub json: Option<String>,
}

fn default_samples() -> u64 {
    100_000
}

/// A complete experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub kind: ExperimentKind,
    pub schemes: Vec<SchemeSpec>,
    /// Slot split; not used by `beta_sweep`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_samples")]
    pub samples: u64,
    /// Candidate index rates for the `*_opt` schemes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ru_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<TargetSpec>,
    /// Static real channel (static kinds).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gains: Option<StaticGains>,
    /// Rayleigh variances (fading kinds). For the `var_rd` sweeps `varrd` is
    /// replaced by the sweep value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fading: Option<FadingProfile>,
    /// Power rule; `outage_vs_snr` derives powers from the sweep instead.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power: Option<PowerSpec>,
    pub sweep: SweepSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSpec>,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        Self::from_value(parse_table(text)?)
    }

    /// Parses `text` and applies `key=value` overrides (dotted keys reach
    /// into tables, values use TOML syntax and fall back to plain strings).
    pub fn from_toml_with_overrides(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table = parse_table(text)?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        Self::from_value(table)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml_with_overrides(&text, overrides)
    }

    fn from_value(table: toml::Table) -> Result<Self> {
        let cfg: Self = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn slot_split(&self) -> Result<SlotSplit> {
        let beta = self
            .beta
            .ok_or_else(|| Error::Config(format!("`beta` is required for {}", self.kind)))?;
        SlotSplit::new(beta).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn rate_target(&self) -> Result<RateTarget> {
        let t = self
            .target
            .ok_or_else(|| Error::Config(format!("`target` is required for {}", self.kind)))?;
        RateTarget::new(t.r1, t.r2, t.ru).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn static_state(&self) -> Result<ChannelState> {
        let g = self
            .gains
            .ok_or_else(|| Error::Config(format!("`gains` is required for {}", self.kind)))?;
        ChannelState::real(g.h1d, g.h2d, g.h1r, g.h2r, g.hrd)
            .map_err(|e| Error::Config(e.to_string()))
    }

    pub fn fading_profile(&self) -> Result<FadingProfile> {
        let f = self
            .fading
            .ok_or_else(|| Error::Config(format!("`fading` is required for {}", self.kind)))?;
        f.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(f)
    }

    /// Powers for kinds with a fixed power rule.
    pub fn power_config(&self, beta: SlotSplit) -> Result<PowerConfig> {
        self.power
            .ok_or_else(|| Error::Config(format!("`power` is required for {}", self.kind)))?
            .resolve(beta)
            .map_err(|e| Error::Config(e.to_string()))
    }

    pub fn grid(&self) -> Result<Vec<f64>> {
        self.sweep.grid()
    }

    /// Checks everything that can be checked without running the experiment.
    pub fn validate(&self) -> Result<()> {
        let cfg_err = |m: String| Err(Error::Config(m));
        if self.name.trim().is_empty() {
            return cfg_err("`name` must not be empty".into());
        }
        if self.schemes.is_empty() {
            return cfg_err("at least one scheme is required".into());
        }
        for (i, s) in self.schemes.iter().enumerate() {
            if self.schemes[..i].contains(s) {
                return cfg_err(format!("scheme `{}` listed twice", s.name()));
            }
            if !s.allowed_in(self.kind) {
                return cfg_err(format!(
                    "scheme `{}` is not available for {}",
                    s.name(),
                    self.kind
                ));
            }
        }
        let grid = self.grid()?;
        match self.kind {
            ExperimentKind::SigmaQ2Sweep => {
                if grid[0] <= 0.0 {
                    return cfg_err("quantization noise variances must be > 0".into());
                }
            }
            ExperimentKind::BetaSweep => {
                if self.beta.is_some() {
                    return cfg_err("`beta` is the sweep variable of beta_sweep".into());
                }
                if grid[0] <= 0.0 || grid[grid.len() - 1] >= 1.0 {
                    return cfg_err("beta values must lie in (0, 1)".into());
                }
            }
            ExperimentKind::ExprateVsSigmaRd | ExperimentKind::Individual => {
                if grid[0] <= 0.0 {
                    return cfg_err("relay-destination variances must be > 0".into());
                }
            }
            ExperimentKind::OutageVsSnr => {}
        }
        if self.kind.is_static() {
            self.static_state()?;
            if self.kind == ExperimentKind::SigmaQ2Sweep {
                let beta = self.slot_split()?;
                self.power_config(beta)?;
            } else if let Some(p) = self.power {
                p.resolve(SlotSplit::new(0.5)?)
                    .map_err(|e| Error::Config(e.to_string()))?;
                if matches!(p, PowerSpec::Snr(_)) {
                    return cfg_err("beta_sweep needs a beta-independent power rule".into());
                }
            } else {
                return cfg_err("`power` is required for beta_sweep".into());
            }
            if self.fading.is_some() || self.target.is_some() || self.ru_grid.is_some() {
                return cfg_err(format!(
                    "{} takes no `fading`, `target` or `ru_grid`",
                    self.kind
                ));
            }
        } else {
            let beta = self.slot_split()?;
            self.fading_profile()?;
            let target = self.rate_target()?;
            if self.samples == 0 {
                return cfg_err("`samples` must be >= 1".into());
            }
            if self.gains.is_some() {
                return cfg_err(format!("{} takes `fading`, not `gains`", self.kind));
            }
            if self.kind == ExperimentKind::OutageVsSnr {
                if self.power.is_some() {
                    return cfg_err("outage_vs_snr derives powers from the SNR sweep".into());
                }
            } else {
                self.power_config(beta)?;
            }
            let fixed_ru = self
                .schemes
                .iter()
                .any(|s| matches!(s, SchemeSpec::Gqf | SchemeSpec::NonwzCf));
            if fixed_ru && !(target.ru > 0.0) {
                return cfg_err("`target.ru` must be > 0 for gqf and nonwz_cf".into());
            }
            let optimized = self
                .schemes
                .iter()
                .any(|s| matches!(s, SchemeSpec::GqfOpt | SchemeSpec::NonwzCfOpt));
            match (&self.ru_grid, optimized) {
                (None, true) => return cfg_err("`ru_grid` is required for *_opt schemes".into()),
                (Some(g), _) if g.is_empty() || g.iter().any(|r| !(*r > 0.0 && r.is_finite())) => {
                    return cfg_err("`ru_grid` must be non-empty with positive entries".into())
                }
                (Some(g), _) if g.windows(2).any(|w| w[1] <= w[0]) => {
                    return cfg_err("`ru_grid` must be strictly increasing".into())
                }
                _ => {}
            }
        }
        Ok(())
    }
}

fn parse_table(text: &str) -> Result<toml::Table> {
    text.parse::<toml::Table>()
        .map_err(|e| Error::Config(e.message().to_string()))
}

fn parse_override_value(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

/// Sets `key=value` in `table`, creating intermediate tables.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{assignment}` is not key=value")))?;
    let path: Vec<&str> = key.trim().split('.').map(str::trim).collect();
    if path.iter().any(|p| p.is_empty()) {
        return Err(Error::Config(format!("override key `{key}` is malformed")));
    }
    let (last, parents) = path.split_last().expect("split yields at least one part");
    let mut node = table;
    for p in parents {
        let entry = node
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        node = entry
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("override key `{key}`: `{p}` is not a table")))?;
    }
    node.insert(last.to_string(), parse_override_value(raw.trim()));
    Ok(())
}
