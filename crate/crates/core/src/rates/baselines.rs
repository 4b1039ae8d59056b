//! Comparison schemes: direct transmission, non-Wyner-Ziv CF, and standard
//! half-duplex decode-and-forward and amplify-and-forward constructions.
//!
//! DF and AF are textbook variants, not tuned reproductions of any particular
//! published design:
//!
//! - DF: the relay decodes both messages from slot 1 when the target pair is
//!   inside its own MAC region, then sends an independent codeword for
//!   `(w1, w2)` in slot 2. Otherwise it stays silent.
//! - AF: the relay scales its slot-1 observation to power `PR` and repeats it
//!   in slot 2, symbol by symbol. A fraction `min(beta, 1 - beta)` of the
//!   block is paired this way; leftover symbols see the direct links only.

use num_complex::Complex64;

use crate::channel::{
    self, relay_received_power, sigma_q2_for_fixed_ru, slot1_system, slot2_system, ChannelState,
    PowerConfig, Quantizer, SlotSplit,
};
use crate::error::{Error, Result};
use crate::info::{GaussianSystem, VarSet};

use super::gqf::gqf_evaluate;
use super::{RateRegion, RateTarget};

const NONE: VarSet = VarSet::EMPTY;

/// Two-slot MAC with the relay observation ignored and, in slot 2, whatever
/// `XR` carries treated as noise.
fn two_slot_mac(state: &ChannelState, power: &PowerConfig, beta: SlotSplit) -> Result<RateRegion> {
    let s1 = slot1_system(state, power, Quantizer::Discarded)?;
    let s2 = slot2_system(state, power)?;
    let (mut e1, mut e2) = (s1.evaluator(), s2.evaluator());
    let (x11, x21, yd1) = (
        s1.set(&[channel::X11])?,
        s1.set(&[channel::X21])?,
        s1.set(&[channel::YD1])?,
    );
    let (x12, x22, yd2) = (
        s2.set(&[channel::X12])?,
        s2.set(&[channel::X22])?,
        s2.set(&[channel::YD2])?,
    );
    let (w1, w2) = (beta.value(), beta.second());
    Ok(RateRegion::clamped(
        w1 * e1.mi(x11, yd1, x21)? + w2 * e2.mi(x12, yd2, x22)?,
        w1 * e1.mi(x21, yd1, x11)? + w2 * e2.mi(x22, yd2, x12)?,
        w1 * e1.mi(x11 | x21, yd1, NONE)? + w2 * e2.mi(x12 | x22, yd2, NONE)?,
    ))
}

/// Relay silent for the whole block; source powers scaled by `boost`.
pub fn direct_mac_region(
    state: &ChannelState,
    power: &PowerConfig,
    beta: SlotSplit,
    boost: f64,
) -> Result<RateRegion> {
    if !(boost >= 1.0 && boost.is_finite()) {
        return Err(Error::Argument(format!("power boost {boost} must be >= 1")));
    }
    two_slot_mac(state, &power.direct_only(boost)?, beta)
}

/// CF without binning, decoded successively, with a fixed index rate `ru`.
///
/// The destination first tries to decode the quantization index from slot 2
/// treating both sources as noise. On success the region is the CF region at
/// the quantizer the relay picked for `ru`; on failure the relay signal is
/// treated as interference in a plain two-slot MAC. At exact equality the
/// index counts as recovered.
pub fn nonwz_cf_region_fading(
    state: &ChannelState,
    power: &PowerConfig,
    beta: SlotSplit,
    ru: f64,
) -> Result<RateRegion> {
    if !(ru > 0.0) {
        return Err(Error::Argument(format!(
            "relay index rate {ru} must be > 0"
        )));
    }
    if index_recovered(state, power, beta, ru)? {
        let q = sigma_q2_for_fixed_ru(&state.relay_csi(), power, beta, ru)?;
        Ok(gqf_evaluate(state, power, beta, Quantizer::noise(q)?)?
            .bounds
            .direct_terms())
    } else {
        two_slot_mac(state, power, beta)
    }
}

/// `(1 - beta) I(XR; YD2) >= ru`, sources treated as noise.
pub fn index_recovered(
    state: &ChannelState,
    power: &PowerConfig,
    beta: SlotSplit,
    ru: f64,
) -> Result<bool> {
    let s2 = slot2_system(state, power)?;
    let carried =
        beta.second() * s2.mutual_info(s2.set(&[channel::XR])?, s2.set(&[channel::YD2])?, NONE)?;
    Ok(carried >= ru)
}

/// Whether the relay decodes both messages at the target rates in slot 1.
pub fn relay_decodes(
    state: &ChannelState,
    power: &PowerConfig,
    beta: SlotSplit,
    target: &RateTarget,
) -> Result<bool> {
    let s1 = slot1_system(state, power, Quantizer::Discarded)?;
    let mut e = s1.evaluator();
    let (x11, x21, yr) = (
        s1.set(&[channel::X11])?,
        s1.set(&[channel::X21])?,
        s1.set(&[channel::YR])?,
    );
    let b = beta.value();
    let relay = RateRegion::clamped(
        b * e.mi(x11, yr, x21)?,
        b * e.mi(x21, yr, x11)?,
        b * e.mi(x11 | x21, yr, NONE)?,
    );
    Ok(!relay.in_outage(target))
}

/// Decode-and-forward region for the given target pair.
pub fn df_region(
    state: &ChannelState,
    power: &PowerConfig,
    beta: SlotSplit,
    target: &RateTarget,
) -> Result<RateRegion> {
    if !relay_decodes(state, power, beta, target)? {
        return direct_mac_region(state, power, beta, 1.0);
    }
    let s1 = slot1_system(state, power, Quantizer::Discarded)?;
    let s2 = slot2_system(state, power)?;
    let (mut e1, mut e2) = (s1.evaluator(), s2.evaluator());
    let (x11, x21, yd1) = (
        s1.set(&[channel::X11])?,
        s1.set(&[channel::X21])?,
        s1.set(&[channel::YD1])?,
    );
    let (x12, x22, xr, yd2) = (
        s2.set(&[channel::X12])?,
        s2.set(&[channel::X22])?,
        s2.set(&[channel::XR])?,
        s2.set(&[channel::YD2])?,
    );
    let (w1, w2) = (beta.value(), beta.second());
    Ok(RateRegion::clamped(
        w1 * e1.mi(x11, yd1, x21)? + w2 * e2.mi(x12 | xr, yd2, x22)?,
        w1 * e1.mi(x21, yd1, x11)? + w2 * e2.mi(x22 | xr, yd2, x12)?,
        w1 * e1.mi(x11 | x21, yd1, NONE)? + w2 * e2.mi(x12 | x22 | xr, yd2, NONE)?,
    ))
}

pub const AF_PAIR_LABELS: [&str; 6] = ["X11", "X21", "X12", "X22", "YD1", "YD2"];

/// Joint system of one slot-1 symbol and the slot-2 symbol that repeats it.
pub fn af_pair_system(state: &ChannelState, power: &PowerConfig) -> Result<GaussianSystem> {
    let z = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let gain = (power.pr / relay_received_power(&state.relay_csi(), power)).sqrt();
    let fwd = state.hrd * gain;
    // sources: X11, X21, X12, X22, ZD1, ZR, ZD2
    GaussianSystem::from_linear_model(
        AF_PAIR_LABELS,
        &[
            vec![one, z, z, z, z, z, z],
            vec![z, one, z, z, z, z, z],
            vec![z, z, one, z, z, z, z],
            vec![z, z, z, one, z, z, z],
            vec![state.h1d, state.h2d, z, z, one, z, z],
            vec![
                fwd * state.h1r,
                fwd * state.h2r,
                state.h1d,
                state.h2d,
                z,
                fwd,
                one,
            ],
        ],
        &[power.p11, power.p21, power.p12, power.p22, 1.0, 1.0, 1.0],
        state.field(),
    )
}

/// Amplify-and-forward region.
pub fn af_region(state: &ChannelState, power: &PowerConfig, beta: SlotSplit) -> Result<RateRegion> {
    let sys = af_pair_system(state, power)?;
    let mut e = sys.evaluator();
    let s = |l: &str| sys.set(&[l]);
    let (x11, x21, x12, x22) = (s("X11")?, s("X21")?, s("X12")?, s("X22")?);
    let y = s("YD1")? | s("YD2")?;
    let pair = RateRegion {
        i1: e.mi(x11 | x12, y, x21 | x22)?,
        i2: e.mi(x21 | x22, y, x11 | x12)?,
        isum: e.mi(x11 | x21 | x12 | x22, y, NONE)?,
    };

    let paired = beta.value().min(beta.second());
    let lone1 = beta.value() - paired;
    let lone2 = beta.second() - paired;
    // Per-symbol direct rates: one full slot of each kind with weight 1.
    let silent = power.direct_only(1.0)?;
    let d1 = single_slot_rates(&slot1_system(state, &silent, Quantizer::Discarded)?, 1)?;
    let d2 = single_slot_rates(&slot2_system(state, &silent)?, 2)?;
    let combine = |p: f64, a: f64, b: f64| paired * p + lone1 * a + lone2 * b;
    Ok(RateRegion::clamped(
        combine(pair.i1, d1.i1, d2.i1),
        combine(pair.i2, d1.i2, d2.i2),
        combine(pair.isum, d1.isum, d2.isum),
    ))
}

fn single_slot_rates(sys: &GaussianSystem, slot: u8) -> Result<RateRegion> {
    let (a, b, y) = if slot == 1 {
        (channel::X11, channel::X21, channel::YD1)
    } else {
        (channel::X12, channel::X22, channel::YD2)
    };
    let mut e = sys.evaluator();
    let (a, b, y) = (sys.set(&[a])?, sys.set(&[b])?, sys.set(&[y])?);
    Ok(RateRegion {
        i1: e.mi(a, y, b)?,
        i2: e.mi(b, y, a)?,
        isum: e.mi(a | b, y, NONE)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rates::csit_region;
    use approx::assert_abs_diff_eq;

    fn beta() -> SlotSplit {
        SlotSplit::new(0.5).unwrap()
    }

    #[test]
    fn direct_mac_no_relay_line() {
        let s = ChannelState::real(1.0, 1.0, 3.0, 0.5, 3.0).unwrap();
        let p = PowerConfig::uniform(1.0).unwrap();
        let r = direct_mac_region(&s, &p, beta(), 1.5).unwrap();
        assert_abs_diff_eq!(r.isum, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn direct_mac_zero_power_and_cut_user() {
        let s = ChannelState::real(1.0, 1.0, 3.0, 0.5, 3.0).unwrap();
        let r = direct_mac_region(&s, &PowerConfig::uniform(0.0).unwrap(), beta(), 1.0).unwrap();
        assert_eq!(r, RateRegion::EMPTY);
        let cut = ChannelState::complex(
            Complex64::new(0.5, 0.5),
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 0.0),
        )
        .unwrap();
        let r = direct_mac_region(&cut, &PowerConfig::uniform(10.0).unwrap(), beta(), 1.0).unwrap();
        assert!(r.i2 < 1e-12, "{}", r.i2);
        assert!(direct_mac_region(&cut, &PowerConfig::uniform(1.0).unwrap(), beta(), 0.5).is_err());
    }

    #[test]
    fn af_without_relay_link_is_direct() {
        let s = ChannelState::real(0.9, 1.4, 2.0, 0.3, 0.0).unwrap();
        let p = PowerConfig::uniform(4.0).unwrap();
        for b in [0.3, 0.5, 0.7] {
            let b = SlotSplit::new(b).unwrap();
            let af = af_region(&s, &p, b).unwrap();
            let d = direct_mac_region(&s, &p, b, 1.0).unwrap();
            assert!(af.max_abs_diff(&d) < 1e-12, "{af:?} vs {d:?}");
        }
    }

    #[test]
    fn df_blind_relay_is_direct() {
        let s = ChannelState::real(0.9, 1.4, 0.0, 0.0, 3.0).unwrap();
        let p = PowerConfig::uniform(4.0).unwrap();
        let t = RateTarget::new(0.5, 0.5, 0.0).unwrap();
        assert!(!relay_decodes(&s, &p, beta(), &t).unwrap());
        let df = df_region(&s, &p, beta(), &t).unwrap();
        let d = direct_mac_region(&s, &p, beta(), 1.0).unwrap();
        assert_eq!(df, d);
    }

    #[test]
    fn df_cooperation_helps() {
        let s = ChannelState::real(0.5, 0.5, 4.0, 4.0, 3.0).unwrap();
        let p = PowerConfig::uniform(2.0).unwrap();
        let t = RateTarget::new(0.5, 0.5, 0.0).unwrap();
        assert!(relay_decodes(&s, &p, beta(), &t).unwrap());
        let df = df_region(&s, &p, beta(), &t).unwrap();
        let d = direct_mac_region(&s, &p, beta(), 1.0).unwrap();
        assert!(df.dominates(&d, 0.0) && df.isum > d.isum + 0.1);
    }

    #[test]
    fn nonwz_branches() {
        let p = PowerConfig::uniform(10.0).unwrap();
        let ru = 1.0;
        // hRD = 0: never recovered, XR contributes nothing
        let dead = ChannelState::real(0.9, 1.4, 2.0, 0.3, 0.0).unwrap();
        let r = nonwz_cf_region_fading(&dead, &p, beta(), ru).unwrap();
        assert_eq!(r, direct_mac_region(&dead, &p, beta(), 1.0).unwrap());
        // strong relay link: CF region at the fixed-RU quantizer
        let strong = ChannelState::real(0.9, 1.4, 2.0, 0.3, 30.0).unwrap();
        let r = nonwz_cf_region_fading(&strong, &p, beta(), ru).unwrap();
        let q = sigma_q2_for_fixed_ru(&strong.relay_csi(), &p, beta(), ru).unwrap();
        let cf = gqf_evaluate(&strong, &p, beta(), Quantizer::Noise(q))
            .unwrap()
            .bounds;
        assert_eq!(r, cf.direct_terms());
        assert!(nonwz_cf_region_fading(&strong, &p, beta(), 0.0).is_err());
    }

    #[test]
    fn nonwz_boundary_counts_as_recovered() {
        let s = ChannelState::real(1.0, 1.0, 2.0, 0.3, 2.0).unwrap();
        let p = PowerConfig::uniform(1.0).unwrap();
        let b = beta();
        let s2 = slot2_system(&s, &p).unwrap();
        let carried = b.second()
            * s2.mutual_info(s2.set(&["XR"]).unwrap(), s2.set(&["YD2"]).unwrap(), NONE)
                .unwrap();
        assert!(index_recovered(&s, &p, b, carried).unwrap());
        assert!(!index_recovered(&s, &p, b, carried * (1.0 + 1e-12)).unwrap());
    }

    #[test]
    fn af_below_csit_symmetric() {
        let s = ChannelState::real(1.0, 1.0, 2.0, 2.0, 2.0).unwrap();
        let p = PowerConfig::uniform(3.0).unwrap();
        let af = af_region(&s, &p, beta()).unwrap();
        let csit = csit_region(&s, &p, beta()).unwrap();
        assert!(csit.dominates(&af, 1e-12), "{csit:?} vs {af:?}");
    }
}
