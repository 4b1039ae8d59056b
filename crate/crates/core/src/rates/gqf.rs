//! Generalized quantize-and-forward (GQF) bounds on the Gaussian model,
//! evaluated through the covariance engine.
//!
//! For a quantizer `ŶR = YR + ZQ` and slot split `beta`, the six right-hand
//! sides are (slot-1 terms weighted by `beta`, slot-2 terms by `1 - beta`):
//!
//! ```text
//! R1         : I(X11; YD1,ŶR | X21)                 | I(X12; YD2 | X22,XR)
//! R1 + RU    : I(X11,ŶR; X21,YD1) + I(X11; ŶR)      | I(X12,XR; YD2 | X22)
//! R2         : I(X21; YD1,ŶR | X11)                 | I(X22; YD2 | X12,XR)
//! R2 + RU    : I(X21,ŶR; X11,YD1) + I(X21; ŶR)      | I(X22,XR; YD2 | X12)
//! R1+R2      : I(X11,X21; YD1,ŶR)                   | I(X12,X22; YD2 | XR)
//! R1+R2 + RU : I(X11,X21,ŶR; YD1) + I(X11,X21; ŶR)  | I(X12,X22,XR; YD2)
//! ```
//!
//! and the quantizer is feasible when `RU >= beta I(YR; ŶR)`.
//!
//! The single-user `+RU` rows use the total correlation between the wrong
//! codeword, the wrong quantization index and everything else the decoder
//! holds (including the correctly decoded other user's codeword). This is the
//! form that reproduces the single-letter Gaussian expressions in
//! [`closed_form`](super::closed_form).

use crate::channel::{
    self, slot1_system, slot2_system, ChannelState, PowerConfig, Quantizer, SlotSplit,
};
use crate::error::{Error, Result};
use crate::info::{MiEvaluator, VarSet};

use super::closed_form::{sigma_q2_opt_indiv, sigma_q2_opt_sum, User};
use super::{Achievability, RateRegion};

/// Right-hand sides of the six GQF constraints, before subtracting `RU`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GqfBounds {
    pub b_r1: f64,
    pub b_r1u: f64,
    pub b_r2: f64,
    pub b_r2u: f64,
    pub b_r12: f64,
    pub b_r12u: f64,
}

impl GqfBounds {
    /// Region for relay index rate `ru`, each bound clamped at zero.
    pub fn region(&self, ru: f64) -> RateRegion {
        RateRegion::clamped(
            self.b_r1.min(self.b_r1u - ru),
            self.b_r2.min(self.b_r2u - ru),
            self.b_r12.min(self.b_r12u - ru),
        )
    }

    /// Region of the bounds that do not involve `RU` (the CF region).
    pub fn direct_terms(&self) -> RateRegion {
        RateRegion::clamped(self.b_r1, self.b_r2, self.b_r12)
    }

    /// Membership in the six outage sets, in the order
    /// `[R1, R1u, R2, R2u, R12, R12u]`.
    ///
    /// Each right-hand side is clamped at zero like [`region`](Self::region):
    /// a user sending at rate zero has no wrong codewords, so the matching
    /// error events are empty.
    pub fn outage_sets(&self, r1: f64, r2: f64, ru: f64) -> [bool; 6] {
        let above = |rate: f64, bound: f64| rate > bound.max(0.0);
        [
            above(r1, self.b_r1),
            above(r1, self.b_r1u - ru),
            above(r2, self.b_r2),
            above(r2, self.b_r2u - ru),
            above(r1 + r2, self.b_r12),
            above(r1 + r2, self.b_r12u - ru),
        ]
    }

    pub fn as_array(&self) -> [f64; 6] {
        [
            self.b_r1,
            self.b_r1u,
            self.b_r2,
            self.b_r2u,
            self.b_r12,
            self.b_r12u,
        ]
    }
}

/// Single-user bounds with the other user's signal treated as interference,
/// used to tell which message survives an outage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterferenceBounds {
    /// `beta I(X11; YD1,ŶR) + (1-beta) I(X12; YD2 | XR)`
    pub b1: f64,
    /// `beta [I(X11,ŶR; YD1) + I(X11; ŶR)] + (1-beta) I(X12,XR; YD2)`, before `- RU`.
    pub b1u: f64,
    pub b2: f64,
    pub b2u: f64,
}

/// Everything the GQF decoder analysis needs for one state and quantizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GqfEvaluation {
    pub bounds: GqfBounds,
    pub interference: InterferenceBounds,
    /// `beta I(YR; ŶR)`: the smallest relay index rate supporting the quantizer.
    pub relay_floor: f64,
}

struct Slot1Sets {
    x11: VarSet,
    x21: VarSet,
    yd1: VarSet,
    yr: VarSet,
    yq: VarSet,
}

struct Slot2Sets {
    x12: VarSet,
    x22: VarSet,
    xr: VarSet,
    yd2: VarSet,
}

fn slot1_sets(e: &MiEvaluator<'_>) -> Result<Slot1Sets> {
    let s = e.system();
    Ok(Slot1Sets {
        x11: s.set(&[channel::X11])?,
        x21: s.set(&[channel::X21])?,
        yd1: s.set(&[channel::YD1])?,
        yr: s.set(&[channel::YR])?,
        yq: s.set_if_present(channel::YR_HAT),
    })
}

fn slot2_sets(e: &MiEvaluator<'_>) -> Result<Slot2Sets> {
    let s = e.system();
    Ok(Slot2Sets {
        x12: s.set(&[channel::X12])?,
        x22: s.set(&[channel::X22])?,
        xr: s.set(&[channel::XR])?,
        yd2: s.set(&[channel::YD2])?,
    })
}

const NONE: VarSet = VarSet::EMPTY;

/// Evaluates all GQF quantities for one state and quantizer.
pub fn gqf_evaluate(
    state: &ChannelState,
    power: &PowerConfig,
    beta: SlotSplit,
    quantizer: Quantizer,
) -> Result<GqfEvaluation> {
    let s1 = slot1_system(state, power, quantizer)?;
    let s2 = slot2_system(state, power)?;
    let mut e1 = s1.evaluator();
    let mut e2 = s2.evaluator();
    let a = slot1_sets(&e1)?;
    let b = slot2_sets(&e2)?;

    let t_r1 = e1.mi(a.x11, a.yd1 | a.yq, a.x21)?;
    let t_r1u = e1.mi(a.x11 | a.yq, a.x21 | a.yd1, NONE)? + e1.mi(a.x11, a.yq, NONE)?;
    let t_r2 = e1.mi(a.x21, a.yd1 | a.yq, a.x11)?;
    let t_r2u = e1.mi(a.x21 | a.yq, a.x11 | a.yd1, NONE)? + e1.mi(a.x21, a.yq, NONE)?;
    let t_r12 = e1.mi(a.x11 | a.x21, a.yd1 | a.yq, NONE)?;
    let t_r12u = e1.mi(a.x11 | a.x21 | a.yq, a.yd1, NONE)? + e1.mi(a.x11 | a.x21, a.yq, NONE)?;
    let t_1 = e1.mi(a.x11, a.yd1 | a.yq, NONE)?;
    let t_1u = e1.mi(a.x11 | a.yq, a.yd1, NONE)? + e1.mi(a.x11, a.yq, NONE)?;
    let t_2 = e1.mi(a.x21, a.yd1 | a.yq, NONE)?;
    let t_2u = e1.mi(a.x21 | a.yq, a.yd1, NONE)? + e1.mi(a.x21, a.yq, NONE)?;
    let floor = e1.mi(a.yr, a.yq, NONE)?;

    let u_r1 = e2.mi(b.x12, b.yd2, b.x22 | b.xr)?;
    let u_r1u = e2.mi(b.x12 | b.xr, b.yd2, b.x22)?;
    let u_r2 = e2.mi(b.x22, b.yd2, b.x12 | b.xr)?;
    let u_r2u = e2.mi(b.x22 | b.xr, b.yd2, b.x12)?;
    let u_r12 = e2.mi(b.x12 | b.x22, b.yd2, b.xr)?;
    let u_r12u = e2.mi(b.x12 | b.x22 | b.xr, b.yd2, NONE)?;
    let u_1 = e2.mi(b.x12, b.yd2, b.xr)?;
    let u_1u = e2.mi(b.x12 | b.xr, b.yd2, NONE)?;
    let u_2 = e2.mi(b.x22, b.yd2, b.xr)?;
    let u_2u = e2.mi(b.x22 | b.xr, b.yd2, NONE)?;

    let (w1, w2) = (beta.value(), beta.second());
    let mix = |t: f64, u: f64| w1 * t + w2 * u;
    Ok(GqfEvaluation {
        bounds: GqfBounds {
            b_r1: mix(t_r1, u_r1),
            b_r1u: mix(t_r1u, u_r1u),
            b_r2: mix(t_r2, u_r2),
            b_r2u: mix(t_r2u, u_r2u),
            b_r12: mix(t_r12, u_r12),
            b_r12u: mix(t_r12u, u_r12u),
        },
        interference: InterferenceBounds {
            b1: mix(t_1, u_1),
            b1u: mix(t_1u, u_1u),
            b2: mix(t_2, u_2),
            b2u: mix(t_2u, u_2u),
        },
        relay_floor: w1 * floor,
    })
}

/// The six GQF bounds for quantization noise variance `sigma_q2`.
pub fn gqf_bounds_gaussian(
    state: &ChannelState,
    power: &PowerConfig,
    beta: SlotSplit,
    sigma_q2: f64,
) -> Result<GqfBounds> {
    Ok(gqf_evaluate(state, power, beta, Quantizer::noise(sigma_q2)?)?.bounds)
}

/// Relative slack allowed when checking `RU >= beta I(YR; ŶR)`.
const FEASIBILITY_TOL: f64 = 1e-12;

/// GQF region for a quantizer and an index rate `ru` that must carry it.
pub fn gqf_region(
    state: &ChannelState,
    power: &PowerConfig,
    beta: SlotSplit,
    sigma_q2: f64,
    ru: f64,
) -> Result<RateRegion> {
    let ev = gqf_evaluate(state, power, beta, Quantizer::noise(sigma_q2)?)?;
    let floor = ev.relay_floor;
    if ru < floor - FEASIBILITY_TOL * floor.max(1.0) {
        return Err(Error::Infeasible { ru, floor });
    }
    Ok(ev.bounds.region(ru))
}

/// Classic CF (Wyner-Ziv binning, successive decoding) region at a fixed
/// quantizer. Feasible only when the relay link can deliver the binned index:
/// `beta [I(YR;ŶR) - I(YD1;ŶR)] < (1 - beta) I(XR; YD2)`.
pub fn cf_region_gaussian(
    state: &ChannelState,
    power: &PowerConfig,
    beta: SlotSplit,
    sigma_q2: f64,
) -> Result<Achievability> {
    let q = Quantizer::noise(sigma_q2)?;
    let s1 = slot1_system(state, power, q)?;
    let s2 = slot2_system(state, power)?;
    let mut e1 = s1.evaluator();
    let mut e2 = s2.evaluator();
    let a = slot1_sets(&e1)?;
    let b = slot2_sets(&e2)?;
    let needed = beta.value() * (e1.mi(a.yr, a.yq, NONE)? - e1.mi(a.yd1, a.yq, NONE)?);
    let available = beta.second() * e2.mi(b.xr, b.yd2, NONE)?;
    if needed < available {
        let bounds = gqf_evaluate(state, power, beta, q)?.bounds;
        Ok(Achievability::Feasible(bounds.direct_terms()))
    } else {
        Ok(Achievability::Infeasible)
    }
}

/// GQF/CF region when the relay knows the full state: each bound evaluated at
/// its own maximizing quantizer, with `RU` set to the quantizer floor.
pub fn csit_region(
    state: &ChannelState,
    power: &PowerConfig,
    beta: SlotSplit,
) -> Result<RateRegion> {
    let q_sum = sigma_q2_opt_sum(state, power, beta);
    let q1 = sigma_q2_opt_indiv(state, power, beta, User::One);
    let q2 = sigma_q2_opt_indiv(state, power, beta, User::Two);
    let at = |q: Quantizer| -> Result<RateRegion> {
        let ev = gqf_evaluate(state, power, beta, q)?;
        Ok(ev.bounds.region(ev.relay_floor))
    };
    let sum = at(q_sum)?;
    let r1 = if q1 == q_sum { sum } else { at(q1)? };
    let r2 = if q2 == q_sum {
        sum
    } else if q2 == q1 {
        r1
    } else {
        at(q2)?
    };
    Ok(RateRegion {
        i1: r1.i1,
        i2: r2.i2,
        isum: sum.isum,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rates::closed_form::{individual_terms, sum_terms};
    use crate::rates::direct_mac_region;
    use approx::assert_abs_diff_eq;

    fn fig3() -> (ChannelState, PowerConfig, SlotSplit) {
        (
            ChannelState::real(1.0, 1.0, 3.0, 0.5, 3.0).unwrap(),
            PowerConfig::uniform(1.0).unwrap(),
            SlotSplit::new(0.5).unwrap(),
        )
    }

    #[test]
    fn peak_sum_rate_at_optimal_quantizer() {
        let (s, p, b) = fig3();
        let q = sigma_q2_opt_sum(&s, &p, b).variance();
        assert_abs_diff_eq!(q, 2.0 + 1.0 / 18.0, epsilon = 1e-12);
        let ev = gqf_evaluate(&s, &p, b, Quantizer::Noise(q)).unwrap();
        let region = ev.bounds.region(ev.relay_floor);
        assert_abs_diff_eq!(
            ev.bounds.b_r12,
            ev.bounds.b_r12u - ev.relay_floor,
            epsilon = 1e-12
        );
        assert!((region.isum - 1.1495).abs() < 1e-3, "{}", region.isum);
    }

    #[test]
    fn engine_matches_closed_forms_at_fig3() {
        let (s, p, b) = fig3();
        for q in [0.1, 1.0, 2.0556, 7.5] {
            let ev = gqf_evaluate(&s, &p, b, Quantizer::Noise(q)).unwrap();
            let sum = sum_terms(&s, &p, b, q);
            assert_abs_diff_eq!(ev.bounds.b_r12, sum.first, epsilon = 1e-12);
            assert_abs_diff_eq!(
                ev.bounds.b_r12u - ev.relay_floor,
                sum.second,
                epsilon = 1e-12
            );
            let one = individual_terms(&s, &p, b, q, User::One);
            assert_abs_diff_eq!(ev.bounds.b_r1, one.first, epsilon = 1e-12);
            assert_abs_diff_eq!(
                ev.bounds.b_r1u - ev.relay_floor,
                one.second,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn silent_relay_and_discarded_observation_is_direct_mac() {
        let s = ChannelState::real(0.8, 1.3, 2.0, 0.4, 0.0).unwrap();
        let p = PowerConfig::uniform(2.0).unwrap();
        let b = SlotSplit::new(0.4).unwrap();
        let ev = gqf_evaluate(&s, &p, b, Quantizer::Discarded).unwrap();
        let direct = direct_mac_region(&s, &p, b, 1.0).unwrap();
        assert_eq!(ev.relay_floor, 0.0);
        assert!(ev.bounds.region(0.0).max_abs_diff(&direct) < 1e-12);
    }

    #[test]
    fn infeasible_index_rate_is_an_error() {
        let (s, p, b) = fig3();
        let ev = gqf_evaluate(&s, &p, b, Quantizer::Noise(1.0)).unwrap();
        let err = gqf_region(&s, &p, b, 1.0, ev.relay_floor * 0.9).unwrap_err();
        assert!(matches!(err, Error::Infeasible { .. }));
        assert!(gqf_region(&s, &p, b, 1.0, ev.relay_floor).is_ok());
    }

    #[test]
    fn huge_index_rate_collapses_region() {
        let (s, p, b) = fig3();
        let r = gqf_region(&s, &p, b, 1.0, 1e3).unwrap();
        assert_eq!(r, RateRegion::EMPTY);
    }

    #[test]
    fn symmetric_users_get_equal_rates() {
        let s = ChannelState::real(1.2, 1.2, 2.0, 2.0, 1.5).unwrap();
        let p = PowerConfig::uniform(3.0).unwrap();
        let b = SlotSplit::new(0.5).unwrap();
        let r = gqf_region(&s, &p, b, 0.8, 4.0).unwrap();
        assert_abs_diff_eq!(r.i1, r.i2, epsilon = 1e-12);
    }

    #[test]
    fn cf_threshold_behaviour_at_fig3() {
        let (s, p, b) = fig3();
        assert!(!cf_region_gaussian(&s, &p, b, 1.0).unwrap().is_feasible());
        let cf = cf_region_gaussian(&s, &p, b, 3.0)
            .unwrap()
            .region()
            .unwrap();
        let g = gqf_bounds_gaussian(&s, &p, b, 3.0).unwrap();
        assert_abs_diff_eq!(cf.isum, g.b_r12, epsilon = 1e-15);
        assert!(cf_region_gaussian(&s, &p, b, 2.0556 * (1.0 + 1e-6))
            .unwrap()
            .is_feasible());
        assert!(!cf_region_gaussian(&s, &p, b, 2.0555).unwrap().is_feasible());
    }

    #[test]
    fn csit_is_gqf_at_optimizer() {
        let (s, p, b) = fig3();
        let csit = csit_region(&s, &p, b).unwrap();
        assert!((csit.isum - 1.1495).abs() < 1e-3);
        let q = sigma_q2_opt_sum(&s, &p, b).variance();
        let ev = gqf_evaluate(&s, &p, b, Quantizer::Noise(q)).unwrap();
        let g = gqf_region(&s, &p, b, q, ev.relay_floor).unwrap();
        assert_abs_diff_eq!(csit.isum, g.isum, epsilon = 1e-15);
    }
}
