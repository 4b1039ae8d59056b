//! Monte Carlo outage and throughput over block-Rayleigh fading.
//!
//! Sample `i` of a run with master seed `s` is drawn from the substream
//! `(s, i)` (see [`sample_stream`]), so every estimate is a pure function of
//! its inputs regardless of how the work is scheduled. Outage events are
//! counted as integers and summed, which keeps the sum independent of the
//! number of worker threads.
//!
//! Outage comparisons are strict: a rate pair exactly on the boundary of the
//! region is not in outage.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::channel::{
    sample_fading, sample_stream, sigma_q2_for_fixed_ru, ChannelState, FadingProfile, PowerConfig,
    Quantizer, SlotSplit,
};
use crate::error::{Error, Result};
use crate::rates::{
    af_region, csit_region, df_region, direct_mac_region, gqf_evaluate, nonwz_cf_region_fading,
    GqfEvaluation, RateRegion,
};

pub use crate::rates::RateTarget;

/// Source power factor of the boosted direct-transmission reference.
pub const DIRECT_BOOST: f64 = 1.5;

/// Half-width multiplier of the normal-approximation 95% interval.
pub const Z95: f64 = 1.96;

/// Schemes evaluated per fading state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Scheme {
    /// Generalized quantize-forward with a fixed relay index rate.
    #[serde(rename = "gqf")]
    Gqf,
    /// GQF/CF with full CSI at the relay.
    #[serde(rename = "csit")]
    Csit,
    /// CF without binning, successive decoding, fixed index rate.
    #[serde(rename = "nonwz_cf")]
    NonWzCf,
    #[serde(rename = "df")]
    Df,
    #[serde(rename = "af")]
    Af,
    /// Relay silent, sources at their nominal power.
    #[serde(rename = "direct")]
    Direct,
    /// Relay silent, sources at [`DIRECT_BOOST`] times their nominal power.
    #[serde(rename = "direct_boost")]
    DirectBoosted,
}

impl Scheme {
    pub const ALL: [Scheme; 7] = [
        Scheme::Gqf,
        Scheme::Csit,
        Scheme::NonWzCf,
        Scheme::Df,
        Scheme::Af,
        Scheme::Direct,
        Scheme::DirectBoosted,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Gqf => "gqf",
            Scheme::Csit => "csit",
            Scheme::NonWzCf => "nonwz_cf",
            Scheme::Df => "df",
            Scheme::Af => "af",
            Scheme::Direct => "direct",
            Scheme::DirectBoosted => "direct_boost",
        }
    }

    /// Whether the scheme uses the fixed relay index rate `RU`.
    pub fn uses_ru(self) -> bool {
        matches!(self, Scheme::Gqf | Scheme::NonWzCf)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Argument(format!("unknown scheme `{s}`")))
    }
}

/// Everything fixed across the draws of one outage estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub power: PowerConfig,
    pub beta: SlotSplit,
    pub target: RateTarget,
}

impl Scenario {
    pub fn new(power: PowerConfig, beta: SlotSplit, target: RateTarget) -> Result<Self> {
        power.validate()?;
        Ok(Self {
            power,
            beta,
            target,
        })
    }

    pub fn with_ru(mut self, ru: f64) -> Result<Self> {
        self.target = RateTarget::new(self.target.r1, self.target.r2, ru)?;
        Ok(self)
    }
}

/// Monte Carlo probability estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutageEstimate {
    pub p_hat: f64,
    pub count: u64,
    pub n_samples: u64,
    pub seed: u64,
    pub ci95_halfwidth: f64,
}

impl OutageEstimate {
    pub fn from_count(count: u64, n_samples: u64, seed: u64) -> Result<Self> {
        if n_samples == 0 {
            return Err(Error::Argument("at least one sample is required".into()));
        }
        if count > n_samples {
            return Err(Error::Invariant(format!(
                "{count} outages in {n_samples} samples"
            )));
        }
        let p_hat = count as f64 / n_samples as f64;
        Ok(Self {
            p_hat,
            count,
            n_samples,
            seed,
            ci95_halfwidth: Z95 * (p_hat * (1.0 - p_hat) / n_samples as f64).sqrt(),
        })
    }

    /// Standard error of `p_hat`.
    pub fn std_error(&self) -> f64 {
        self.ci95_halfwidth / Z95
    }
}

/// Draws `n` states from substreams `0..n` of `seed`.
pub fn draw_states(profile: &FadingProfile, n: u64, seed: u64) -> Result<Vec<ChannelState>> {
    if n == 0 {
        return Err(Error::Argument("at least one sample is required".into()));
    }
    profile.validate()?;
    Ok((0..n)
        .into_par_iter()
        .map(|i| sample_fading(profile, &mut sample_stream(seed, i)))
        .collect())
}

/// GQF with a fixed index rate: the relay picks its quantizer from its own
/// CSI so that `beta I(YR; ŶR) = RU`, then the destination decodes jointly.
/// Returns the outage indicator and the evaluated bounds.
pub fn gqf_outage_indicator(
    state: &ChannelState,
    power: &PowerConfig,
    beta: SlotSplit,
    target: &RateTarget,
) -> Result<(bool, GqfEvaluation)> {
    let ev = gqf_fixed_ru(state, power, beta, target.ru)?;
    let sets = ev.bounds.outage_sets(target.r1, target.r2, target.ru);
    Ok((sets.iter().any(|&s| s), ev))
}

fn gqf_fixed_ru(
    state: &ChannelState,
    power: &PowerConfig,
    beta: SlotSplit,
    ru: f64,
) -> Result<GqfEvaluation> {
    let q = sigma_q2_for_fixed_ru(&state.relay_csi(), power, beta, ru)?;
    gqf_evaluate(state, power, beta, Quantizer::noise(q)?)
}

/// Instantaneous region of `scheme` at `state`.
pub fn scheme_region(scheme: Scheme, state: &ChannelState, sc: &Scenario) -> Result<RateRegion> {
    let (p, b, t) = (&sc.power, sc.beta, &sc.target);
    match scheme {
        Scheme::Gqf => Ok(gqf_fixed_ru(state, p, b, t.ru)?.bounds.region(t.ru)),
        Scheme::Csit => csit_region(state, p, b),
        Scheme::NonWzCf => nonwz_cf_region_fading(state, p, b, t.ru),
        Scheme::Df => df_region(state, p, b, t),
        Scheme::Af => af_region(state, p, b),
        Scheme::Direct => direct_mac_region(state, p, b, 1.0),
        Scheme::DirectBoosted => direct_mac_region(state, p, b, DIRECT_BOOST),
    }
}

/// Common-outage indicator of `scheme` at `state`.
pub fn in_common_outage(scheme: Scheme, state: &ChannelState, sc: &Scenario) -> Result<bool> {
    match scheme {
        Scheme::Gqf => Ok(gqf_outage_indicator(state, &sc.power, sc.beta, &sc.target)?.0),
        _ => Ok(scheme_region(scheme, state, sc)?.in_outage(&sc.target)),
    }
}

fn count_where<F>(states: &[ChannelState], pred: F) -> Result<u64>
where
    F: Fn(&ChannelState) -> Result<bool> + Sync,
{
    states
        .par_iter()
        .map(|s| pred(s).map(u64::from))
        .try_reduce(|| 0, |a, b| Ok(a + b))
}

/// Common outage of `scheme` on a given set of draws. `seed` is recorded
/// in the estimate only.
pub fn common_outage_on(
    scheme: Scheme,
    states: &[ChannelState],
    sc: &Scenario,
    seed: u64,
) -> Result<OutageEstimate> {
    let count = count_where(states, |s| in_common_outage(scheme, s, sc))?;
    OutageEstimate::from_count(count, states.len() as u64, seed)
}

/// Common outage probability of `scheme` from `n` fresh draws.
pub fn common_outage_mc(
    scheme: Scheme,
    profile: &FadingProfile,
    sc: &Scenario,
    n: u64,
    seed: u64,
) -> Result<OutageEstimate> {
    common_outage_on(scheme, &draw_states(profile, n, seed)?, sc, seed)
}

/// Outage when the relay knows the full state.
pub fn csit_outage_mc(
    profile: &FadingProfile,
    sc: &Scenario,
    n: u64,
    seed: u64,
) -> Result<OutageEstimate> {
    common_outage_mc(Scheme::Csit, profile, sc, n, seed)
}

/// `(R1 + R2)(1 - p_common)`.
pub fn expected_sum_rate_common(target: &RateTarget, outage: &OutageEstimate) -> f64 {
    target.sum() * (1.0 - outage.p_hat)
}

/// `R1 (1 - p_indiv1) + R2 (1 - p_indiv2)`.
pub fn expected_sum_rate_indiv(target: &RateTarget, p_indiv1: f64, p_indiv2: f64) -> f64 {
    target.r1 * (1.0 - p_indiv1) + target.r2 * (1.0 - p_indiv2)
}

/// Picks the index rate with the smallest common outage on shared draws.
/// Ties go to the smaller `RU` (the earlier grid entry after sorting).
pub fn optimize_ru_on(
    scheme: Scheme,
    states: &[ChannelState],
    sc: &Scenario,
    grid: &[f64],
    seed: u64,
) -> Result<(f64, OutageEstimate)> {
    if !scheme.uses_ru() {
        return Err(Error::Argument(format!(
            "scheme `{scheme}` has no relay index rate"
        )));
    }
    let mut sorted = grid.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut best: Option<(f64, OutageEstimate)> = None;
    for ru in sorted {
        let est = common_outage_on(scheme, states, &sc.with_ru(ru)?, seed)?;
        if best.is_none_or(|(_, b)| est.count < b.count) {
            best = Some((ru, est));
        }
    }
    best.ok_or_else(|| Error::Argument("relay index rate grid is empty".into()))
}

/// [`optimize_ru_on`] with GQF over `n` fresh draws.
pub fn optimize_ru_grid(
    profile: &FadingProfile,
    sc: &Scenario,
    grid: &[f64],
    n: u64,
    seed: u64,
) -> Result<(f64, OutageEstimate)> {
    if grid.is_empty() {
        return Err(Error::Argument("relay index rate grid is empty".into()));
    }
    optimize_ru_on(Scheme::Gqf, &draw_states(profile, n, seed)?, sc, grid, seed)
}

/// Which messages survive a draw: the four-way split of the rate plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RegionOutcome {
    /// Only `W2` is decoded.
    R1 = 1,
    /// Only `W1` is decoded.
    R2 = 2,
    /// Neither message is decoded.
    R3 = 3,
    /// Both messages are decoded (no common outage).
    R4 = 4,
}

impl RegionOutcome {
    pub fn index(self) -> usize {
        self as usize
    }

    fn from_flags(common: bool, only_w1: bool, only_w2: bool) -> Result<Self> {
        match (common, only_w1, only_w2) {
            (false, false, false) => Ok(RegionOutcome::R4),
            (true, true, false) => Ok(RegionOutcome::R2),
            (true, false, true) => Ok(RegionOutcome::R1),
            (true, false, false) => Ok(RegionOutcome::R3),
            _ => Err(Error::Invariant(format!(
                "inconsistent region flags: common={common}, only_w1={only_w1}, only_w2={only_w2}"
            ))),
        }
    }
}

/// GQF individual-outage classification at a fixed index rate.
///
/// `W1` alone survives (region 2) when it is decodable with `W2` treated as
/// interference, i.e. `R1 <= b1` and `R1 + RU <= b1u`, while `W2` is in
/// outage (`O_R2` or `O_R2u`). Region 1 mirrors this for user 2.
pub fn classify_region(
    state: &ChannelState,
    power: &PowerConfig,
    beta: SlotSplit,
    target: &RateTarget,
) -> Result<RegionOutcome> {
    let (common, ev) = gqf_outage_indicator(state, power, beta, target)?;
    if !common {
        return Ok(RegionOutcome::R4);
    }
    let [o_r1, o_r1u, o_r2, o_r2u, _, _] = ev.bounds.outage_sets(target.r1, target.r2, target.ru);
    let ib = ev.interference;
    let ok = |rate: f64, bound: f64| rate <= bound.max(0.0);
    let w1_alone = ok(target.r1, ib.b1) && ok(target.r1, ib.b1u - target.ru);
    let w2_alone = ok(target.r2, ib.b2) && ok(target.r2, ib.b2u - target.ru);
    RegionOutcome::from_flags(
        true,
        w1_alone && (o_r2 || o_r2u),
        w2_alone && (o_r1 || o_r1u),
    )
}

/// Classification for schemes with a plain pentagon region: `W1` alone
/// survives when `R1 <= min(I1, Isum - I2)`, i.e. it is decodable with `W2`
/// treated as noise.
pub fn classify_pentagon(region: &RateRegion, target: &RateTarget) -> Result<RegionOutcome> {
    if !region.in_outage(target) {
        return Ok(RegionOutcome::R4);
    }
    let alone = |r: f64, own: f64, other: f64| r <= own.min(region.isum - other).max(0.0);
    let w1 = alone(target.r1, region.i1, region.i2);
    let w2 = alone(target.r2, region.i2, region.i1);
    RegionOutcome::from_flags(true, w1, w2)
}

/// Region outcome of `scheme` at `state`.
pub fn classify_scheme(
    scheme: Scheme,
    state: &ChannelState,
    sc: &Scenario,
) -> Result<RegionOutcome> {
    match scheme {
        Scheme::Gqf => classify_region(state, &sc.power, sc.beta, &sc.target),
        _ => classify_pentagon(&scheme_region(scheme, state, sc)?, &sc.target),
    }
}

/// Region counts of one individual-outage run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndividualOutage {
    /// Draws in regions 1, 2, 3 and 4.
    pub counts: [u64; 4],
    pub n_samples: u64,
    pub seed: u64,
}

impl IndividualOutage {
    fn estimate(&self, count: u64) -> OutageEstimate {
        OutageEstimate::from_count(count, self.n_samples, self.seed)
            .expect("region counts never exceed the sample count")
    }

    /// Frequency of region `i` in `1..=4`.
    pub fn frequency(&self, i: usize) -> f64 {
        self.counts[i - 1] as f64 / self.n_samples as f64
    }

    pub fn indiv1(&self) -> OutageEstimate {
        self.estimate(self.counts[0] + self.counts[2])
    }

    pub fn indiv2(&self) -> OutageEstimate {
        self.estimate(self.counts[1] + self.counts[2])
    }

    pub fn common(&self) -> OutageEstimate {
        self.estimate(self.counts[0] + self.counts[1] + self.counts[2])
    }

    pub fn expected_sum_rate_common(&self, target: &RateTarget) -> f64 {
        expected_sum_rate_common(target, &self.common())
    }

    pub fn expected_sum_rate_indiv(&self, target: &RateTarget) -> f64 {
        expected_sum_rate_indiv(target, self.indiv1().p_hat, self.indiv2().p_hat)
    }
}

/// Region counts of `scheme` on a given set of draws.
pub fn individual_outage_on(
    scheme: Scheme,
    states: &[ChannelState],
    sc: &Scenario,
    seed: u64,
) -> Result<IndividualOutage> {
    if states.is_empty() {
        return Err(Error::Argument("at least one sample is required".into()));
    }
    let counts = states
        .par_iter()
        .map(|s| {
            let mut c = [0u64; 4];
            c[classify_scheme(scheme, s, sc)?.index() - 1] = 1;
            Ok::<_, Error>(c)
        })
        .try_reduce(
            || [0u64; 4],
            |a, b| Ok([a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]]),
        )?;
    let n = states.len() as u64;
    if counts.iter().sum::<u64>() != n {
        return Err(Error::Invariant(
            "region counts do not partition the draws".into(),
        ));
    }
    Ok(IndividualOutage {
        counts,
        n_samples: n,
        seed,
    })
}

/// GQF individual and common outage from `n` fresh draws.
pub fn individual_outage_mc(
    profile: &FadingProfile,
    sc: &Scenario,
    n: u64,
    seed: u64,
) -> Result<IndividualOutage> {
    individual_outage_on(Scheme::Gqf, &draw_states(profile, n, seed)?, sc, seed)
}
