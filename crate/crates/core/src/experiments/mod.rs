//! Configurable sweeps behind the `sim` binary.
//!
//! An [`ExperimentConfig`] names a sweep kind, the schemes to evaluate and
//! the scenario. [`run`] turns it into a [`SweepResult`] with one row per
//! sweep point. The presets in `presets/` are ordinary configs compiled into
//! the binary.
//!
//! Fading sweeps use shared draws: every scheme at every sweep point sees the
//! same sample substreams. Along an SNR sweep the states are identical; along
//! a relay-destination variance sweep they are the same normals rescaled.

mod config;
mod output;

pub use config::{
    apply_override, ExperimentConfig, ExperimentKind, OutputSpec, PowerSpec, SchemeSpec, SnrPower,
    StaticGains, SweepSpec, TargetSpec, UniformPower,
};
pub use output::{Column, SweepResult};

use crate::channel::{ChannelState, PowerConfig, Quantizer, SlotSplit};
use crate::error::{Error, Result};
use crate::outage::{
    common_outage_on, draw_states, individual_outage_on, optimize_ru_on, Scenario, DIRECT_BOOST,
};
use crate::rates::closed_form::sum_terms;
use crate::rates::{cf_region_gaussian, direct_mac_region, gqf_evaluate, sigma_q2_opt_sum};

/// Names of the built-in presets.
pub const PRESET_NAMES: [&str; 6] = ["fig3", "fig4", "fig5", "fig6", "fig7", "fig8"];

const PRESETS: [(&str, &str); 6] = [
    ("fig3", include_str!("../../presets/fig3.toml")),
    ("fig4", include_str!("../../presets/fig4.toml")),
    ("fig5", include_str!("../../presets/fig5.toml")),
    ("fig6", include_str!("../../presets/fig6.toml")),
    ("fig7", include_str!("../../presets/fig7.toml")),
    ("fig8", include_str!("../../presets/fig8.toml")),
];

/// TOML source of a built-in preset.
pub fn preset_source(name: &str) -> Result<&'static str> {
    PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| *text)
        .ok_or_else(|| {
            Error::Config(format!(
                "unknown preset `{name}` (available: {})",
                PRESET_NAMES.join(", ")
            ))
        })
}

/// A built-in preset with `key=value` overrides applied.
pub fn load_preset(name: &str, overrides: &[String]) -> Result<ExperimentConfig> {
    ExperimentConfig::from_toml_with_overrides(preset_source(name)?, overrides)
}

/// Collects output columns in first-use order.
struct Columns(Vec<(String, Vec<f64>)>);

impl Columns {
    fn push(&mut self, name: String, value: f64) {
        match self.0.iter_mut().find(|(n, _)| *n == name) {
            Some((_, v)) => v.push(value),
            None => self.0.push((name, vec![value])),
        }
    }
}

/// Runs an experiment.
pub fn run(cfg: &ExperimentConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let mut cols = Columns(Vec::new());
    match cfg.kind {
        ExperimentKind::SigmaQ2Sweep => sigma_q2_sweep(cfg, &grid, &mut cols)?,
        ExperimentKind::BetaSweep => beta_sweep(cfg, &grid, &mut cols)?,
        _ => fading_sweep(cfg, &grid, &mut cols)?,
    }
    let mut result = SweepResult::new(cfg.kind.variable(), grid);
    result.metadata = metadata(cfg, &result.grid)?;
    for (name, values) in cols.0 {
        result.push_column(name, values)?;
    }
    Ok(result)
}

fn metadata(cfg: &ExperimentConfig, grid: &[f64]) -> Result<Vec<(String, String)>> {
    let version = env!("CARGO_PKG_VERSION");
    let join = |v: &[f64]| v.iter().map(f64::to_string).collect::<Vec<_>>().join(",");
    let mut meta = vec![
        ("name".to_string(), cfg.name.clone()),
        ("kind".to_string(), cfg.kind.to_string()),
        ("generator".to_string(), format!("marc-core {version}")),
        (
            "schemes".to_string(),
            cfg.schemes
                .iter()
                .map(|s| format!("{}@{version}", s.name()))
                .collect::<Vec<_>>()
                .join(","),
        ),
        ("seed".to_string(), cfg.seed.to_string()),
        ("samples".to_string(), cfg.samples.to_string()),
        ("variable".to_string(), cfg.kind.variable().to_string()),
        ("grid".to_string(), grid_summary(&cfg.sweep, grid)),
    ];
    if let Some(ru) = &cfg.ru_grid {
        meta.push(("ru_grid".to_string(), join(ru)));
    }
    meta.push((
        "config".to_string(),
        cfg.to_toml_string()?.trim_end().to_string(),
    ));
    Ok(meta)
}

/// Explicit grids are listed in full; ranges as `start..stop step s (n points)`.
fn grid_summary(sweep: &SweepSpec, grid: &[f64]) -> String {
    match (sweep.start, sweep.stop, sweep.step) {
        (Some(a), Some(b), Some(s)) if sweep.values.is_none() => {
            format!("{a}..{b} step {s} ({} points)", grid.len())
        }
        _ => grid
            .iter()
            .map(f64::to_string)
            .collect::<Vec<_>>()
            .join(","),
    }
}

fn direct_sum_rate(
    spec: SchemeSpec,
    state: &ChannelState,
    power: &PowerConfig,
    beta: SlotSplit,
) -> Result<Option<f64>> {
    let boost = match spec {
        SchemeSpec::Direct => 1.0,
        SchemeSpec::DirectBoost => DIRECT_BOOST,
        _ => return Ok(None),
    };
    Ok(Some(direct_mac_region(state, power, beta, boost)?.isum))
}

/// Sum rates on a static channel against the quantization noise variance.
fn sigma_q2_sweep(cfg: &ExperimentConfig, grid: &[f64], cols: &mut Columns) -> Result<()> {
    let state = cfg.static_state()?;
    let beta = cfg.slot_split()?;
    let power = cfg.power_config(beta)?;
    for &q in grid {
        let quantizer = Quantizer::noise(q)?;
        for &spec in &cfg.schemes {
            let n = spec.name();
            match spec {
                SchemeSpec::Gqf => {
                    let ev = gqf_evaluate(&state, &power, beta, quantizer)?;
                    let first = ev.bounds.b_r12;
                    let second = ev.bounds.b_r12u - ev.relay_floor;
                    cols.push(format!("{n}_sum_first"), first);
                    cols.push(format!("{n}_sum_second"), second);
                    cols.push(format!("{n}_sum_rate"), first.min(second).max(0.0));
                }
                SchemeSpec::Cf => {
                    let cf = cf_region_gaussian(&state, &power, beta, q)?;
                    cols.push(
                        format!("{n}_sum_rate"),
                        cf.region().map_or(f64::NAN, |r| r.isum),
                    );
                    cols.push(
                        format!("{n}_feasible"),
                        f64::from(u8::from(cf.is_feasible())),
                    );
                }
                _ => {
                    let rate = direct_sum_rate(spec, &state, &power, beta)?
                        .ok_or_else(|| Error::Invariant(format!("scheme `{n}` in static sweep")))?;
                    cols.push(format!("{n}_sum_rate"), rate);
                }
            }
        }
    }
    Ok(())
}

/// Sum rates at the sum-rate-optimal quantizer against the slot split.
///
/// CF is reported at the same quantizer. There the CF feasibility condition
/// holds with equality, so the value is the supremum of CF sum rates over
/// feasible quantizers rather than an attained rate.
///
/// The two sum-rate terms come from their single-letter expressions: for
/// small `beta` the optimal quantization noise drops below `1e-20`, where
/// `YR` and `ŶR` are numerically identical and covariance determinants lose
/// all precision. With a dead relay link (no finite optimizer) the relay
/// observation is discarded and the covariance engine is used.
fn beta_sweep(cfg: &ExperimentConfig, grid: &[f64], cols: &mut Columns) -> Result<()> {
    let state = cfg.static_state()?;
    for &b in grid {
        let beta = SlotSplit::new(b)?;
        let power = cfg.power_config(beta)?;
        let q = sigma_q2_opt_sum(&state, &power, beta);
        let (first, second) = match q {
            Quantizer::Noise(s) => {
                let t = sum_terms(&state, &power, beta, s);
                (t.first, t.second)
            }
            Quantizer::Discarded => {
                let ev = gqf_evaluate(&state, &power, beta, q)?;
                (ev.bounds.b_r12, ev.bounds.b_r12u - ev.relay_floor)
            }
        };
        for &spec in &cfg.schemes {
            let n = spec.name();
            match spec {
                SchemeSpec::Gqf => {
                    cols.push(format!("{n}_sigma_q2"), q.variance());
                    cols.push(format!("{n}_sum_rate"), first.min(second).max(0.0));
                }
                SchemeSpec::Cf => {
                    cols.push(format!("{n}_sum_rate"), first.max(0.0));
                }
                _ => {
                    let rate = direct_sum_rate(spec, &state, &power, beta)?
                        .ok_or_else(|| Error::Invariant(format!("scheme `{n}` in static sweep")))?;
                    cols.push(format!("{n}_sum_rate"), rate);
                }
            }
        }
    }
    Ok(())
}

fn fading_sweep(cfg: &ExperimentConfig, grid: &[f64], cols: &mut Columns) -> Result<()> {
    let beta = cfg.slot_split()?;
    let target = cfg.rate_target()?;
    let profile = cfg.fading_profile()?;
    let ru_grid = cfg.ru_grid.clone().unwrap_or_default();
    let (n, seed) = (cfg.samples, cfg.seed);
    let shared = match cfg.kind {
        ExperimentKind::OutageVsSnr => Some(draw_states(&profile, n, seed)?),
        _ => None,
    };
    for &x in grid {
        let (power, fresh) = match cfg.kind {
            ExperimentKind::OutageVsSnr => (PowerConfig::from_snr_db(x, beta)?, None),
            _ => {
                let mut p = profile;
                p.varrd = x;
                (cfg.power_config(beta)?, Some(draw_states(&p, n, seed)?))
            }
        };
        let states = fresh.as_deref().or(shared.as_deref()).expect("draws exist");
        let base = Scenario::new(power, beta, target)?;
        for &spec in &cfg.schemes {
            let name = spec.name();
            let (scheme, optimize) = spec
                .fading_scheme()
                .ok_or_else(|| Error::Invariant(format!("scheme `{name}` in fading sweep")))?;
            let (sc, common) = if optimize {
                let (ru, est) = optimize_ru_on(scheme, states, &base, &ru_grid, seed)?;
                cols.push(format!("{name}_ru"), ru);
                (base.with_ru(ru)?, est)
            } else {
                (base, common_outage_on(scheme, states, &base, seed)?)
            };
            match cfg.kind {
                ExperimentKind::OutageVsSnr => {
                    cols.push(format!("{name}_outage"), common.p_hat);
                    cols.push(format!("{name}_outage_ci"), common.ci95_halfwidth);
                }
                ExperimentKind::ExprateVsSigmaRd => {
                    let rate = crate::outage::expected_sum_rate_common(&target, &common);
                    cols.push(format!("{name}_exp_rate"), rate);
                    cols.push(
                        format!("{name}_exp_rate_ci"),
                        target.sum() * common.ci95_halfwidth,
                    );
                    cols.push(format!("{name}_outage"), common.p_hat);
                    cols.push(format!("{name}_outage_ci"), common.ci95_halfwidth);
                }
                ExperimentKind::Individual => {
                    let ind = individual_outage_on(scheme, states, &sc, seed)?;
                    if ind.common().count != common.count {
                        return Err(Error::Invariant(format!(
                            "{name}: individual and common outage counts disagree"
                        )));
                    }
                    for (metric, est) in [
                        ("p_indiv1", ind.indiv1()),
                        ("p_indiv2", ind.indiv2()),
                        ("p_common", ind.common()),
                    ] {
                        cols.push(format!("{name}_{metric}"), est.p_hat);
                        cols.push(format!("{name}_{metric}_ci"), est.ci95_halfwidth);
                    }
                    cols.push(format!("{name}_f3"), ind.frequency(3));
                    cols.push(
                        format!("{name}_exp_rate_common"),
                        ind.expected_sum_rate_common(&target),
                    );
                    cols.push(
                        format!("{name}_exp_rate_indiv"),
                        ind.expected_sum_rate_indiv(&target),
                    );
                }
                _ => unreachable!("static kinds are handled separately"),
            }
        }
    }
    Ok(())
}
