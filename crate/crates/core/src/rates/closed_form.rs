//! Single-letter Gaussian expressions for the GQF min-terms and their
//! optimal quantizers.
//!
//! These are written out by hand, independently of the covariance engine,
//! and serve as its cross-check. With `c` the field prefactor, `s` the
//! quantization noise variance and `|.|^2` the link power gains:
//!
//! ```text
//! user i, first : b c log2(1 + |hiD|^2 Pi1 + |hiR|^2 Pi1 / (1+s)) + (1-b) c log2(1 + |hiD|^2 Pi2)
//! user i, second: b c log2((1 + |hiD|^2 Pi1) s / (1+s))           + (1-b) c log2(1 + |hiD|^2 Pi2 + |hRD|^2 PR)
//! sum, first    : b c log2(1 + A + (B + X) / (1+s))               + (1-b) c log2(1 + A2)
//! sum, second   : b c log2((1 + A) s / (1+s))                     + (1-b) c log2(1 + A2 + |hRD|^2 PR)
//! ```
//!
//! with `A = |h1D|^2 P11 + |h2D|^2 P21`, `B = |h1R|^2 P11 + |h2R|^2 P21`,
//! `X = |h1D h2R - h1R h2D|^2 P11 P21` and `A2 = |h1D|^2 P12 + |h2D|^2 P22`.
//! The first term falls and the second rises with `s`; their crossing is the
//! maximizing quantizer.

use crate::channel::{ChannelState, PowerConfig, Quantizer, SlotSplit};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum User {
    One,
    Two,
}

/// The two arguments of a GQF `min{.,.}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinTerms {
    /// Bound without the relay index (decreasing in `s`).
    pub first: f64,
    /// Bound that pays for the relay index (increasing in `s`).
    pub second: f64,
}

impl MinTerms {
    pub fn min(&self) -> f64 {
        self.first.min(self.second)
    }
}

struct Gains {
    a1: f64,
    a2: f64,
    b1: f64,
    b2: f64,
    cross: f64,
    a1_2: f64,
    a2_2: f64,
    relay: f64,
}

fn gains(state: &ChannelState, p: &PowerConfig) -> Gains {
    Gains {
        a1: state.h1d.norm_sqr() * p.p11,
        a2: state.h2d.norm_sqr() * p.p21,
        b1: state.h1r.norm_sqr() * p.p11,
        b2: state.h2r.norm_sqr() * p.p21,
        cross: (state.h1d * state.h2r - state.h1r * state.h2d).norm_sqr() * p.p11 * p.p21,
        a1_2: state.h1d.norm_sqr() * p.p12,
        a2_2: state.h2d.norm_sqr() * p.p22,
        relay: state.hrd.norm_sqr() * p.pr,
    }
}

fn weighted(state: &ChannelState, beta: SlotSplit, slot1: f64, slot2: f64) -> f64 {
    let c = state.field().prefactor();
    c * (beta.value() * slot1.log2() + beta.second() * slot2.log2())
}

pub fn individual_terms(
    state: &ChannelState,
    power: &PowerConfig,
    beta: SlotSplit,
    sigma_q2: f64,
    user: User,
) -> MinTerms {
    let g = gains(state, power);
    let (a, b, a_2) = match user {
        User::One => (g.a1, g.b1, g.a1_2),
        User::Two => (g.a2, g.b2, g.a2_2),
    };
    let s = sigma_q2;
    MinTerms {
        first: weighted(state, beta, 1.0 + a + b / (1.0 + s), 1.0 + a_2),
        second: weighted(state, beta, (1.0 + a) * s / (1.0 + s), 1.0 + a_2 + g.relay),
    }
}

pub fn sum_terms(
    state: &ChannelState,
    power: &PowerConfig,
    beta: SlotSplit,
    sigma_q2: f64,
) -> MinTerms {
    let g = gains(state, power);
    let a = g.a1 + g.a2;
    let a_2 = g.a1_2 + g.a2_2;
    let s = sigma_q2;
    MinTerms {
        first: weighted(
            state,
            beta,
            1.0 + a + (g.b1 + g.b2 + g.cross) / (1.0 + s),
            1.0 + a_2,
        ),
        second: weighted(state, beta, (1.0 + a) * s / (1.0 + s), 1.0 + a_2 + g.relay),
    }
}

/// `(1 + relay / (1 + interference))^((1-b)/b) - 1`, or `None` when the
/// relay link carries nothing.
fn crossing_denominator(relay: f64, interference: f64, beta: SlotSplit) -> Option<f64> {
    let ratio = relay / (1.0 + interference);
    if !(ratio > 0.0) {
        return None;
    }
    let d = (beta.second() / beta.value() * ratio.ln_1p()).exp_m1();
    (d > 0.0).then_some(d)
}

fn quantizer_from(numerator: f64, denominator: Option<f64>) -> Quantizer {
    match denominator {
        None => Quantizer::Discarded,
        Some(d) => Quantizer::Noise((numerator / d).max(f64::MIN_POSITIVE)),
    }
}

/// Quantizer maximizing the GQF sum rate. [`Quantizer::Discarded`] when
/// `hRD = 0` or `PR = 0` (no finite maximizer: the sum rate only grows as the
/// relay observation is dropped).
pub fn sigma_q2_opt_sum(state: &ChannelState, power: &PowerConfig, beta: SlotSplit) -> Quantizer {
    let g = gains(state, power);
    let numerator = 1.0 + (g.b1 + g.b2 + g.cross) / (1.0 + g.a1 + g.a2);
    quantizer_from(
        numerator,
        crossing_denominator(g.relay, g.a1_2 + g.a2_2, beta),
    )
}

/// Quantizer maximizing the single-user GQF rate of `user`.
pub fn sigma_q2_opt_indiv(
    state: &ChannelState,
    power: &PowerConfig,
    beta: SlotSplit,
    user: User,
) -> Quantizer {
    let g = gains(state, power);
    let (a, b, a_2) = match user {
        User::One => (g.a1, g.b1, g.a1_2),
        User::Two => (g.a2, g.b2, g.a2_2),
    };
    quantizer_from(
        1.0 + b / (1.0 + a),
        crossing_denominator(g.relay, a_2, beta),
    )
}

/// Smallest quantization noise variance for which classic CF works
/// (strict inequality). Equal to the sum-rate maximizer; infinite when the
/// relay link is dead.
pub fn cf_threshold(state: &ChannelState, power: &PowerConfig, beta: SlotSplit) -> f64 {
    sigma_q2_opt_sum(state, power, beta).variance()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn fig3() -> (ChannelState, PowerConfig, SlotSplit) {
        (
            ChannelState::real(1.0, 1.0, 3.0, 0.5, 3.0).unwrap(),
            PowerConfig::uniform(1.0).unwrap(),
            SlotSplit::new(0.5).unwrap(),
        )
    }

    #[test]
    fn fig3_optimizers() {
        let (s, p, b) = fig3();
        // (1 + 15.5/3) / 3
        assert_abs_diff_eq!(
            sigma_q2_opt_sum(&s, &p, b).variance(),
            2.055_555_555_555_6,
            epsilon = 1e-12
        );
        // (1 + 9/2) / ((1 + 9/2) - 1): the single-user denominator sees only
        // user 1's slot-2 signal as interference
        assert_abs_diff_eq!(
            sigma_q2_opt_indiv(&s, &p, b, User::One).variance(),
            11.0 / 9.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            cf_threshold(&s, &p, b),
            2.055_555_555_555_6,
            epsilon = 1e-12
        );
    }

    #[test]
    fn crossing_equalizes_terms() {
        let (s, p, b) = fig3();
        let q = sigma_q2_opt_sum(&s, &p, b).variance();
        let t = sum_terms(&s, &p, b, q);
        assert_abs_diff_eq!(t.first, t.second, epsilon = 1e-12);
        let q1 = sigma_q2_opt_indiv(&s, &p, b, User::One).variance();
        let t1 = individual_terms(&s, &p, b, q1, User::One);
        assert_abs_diff_eq!(t1.first, t1.second, epsilon = 1e-12);
    }

    #[test]
    fn dead_relay_link_has_no_finite_optimizer() {
        let s = ChannelState::real(1.0, 1.0, 3.0, 0.5, 0.0).unwrap();
        let (_, p, b) = fig3();
        assert_eq!(sigma_q2_opt_sum(&s, &p, b), Quantizer::Discarded);
        assert_eq!(cf_threshold(&s, &p, b), f64::INFINITY);
    }

    #[test]
    fn optimizer_limits() {
        let (s, _, b) = fig3();
        let strong = PowerConfig::new(1.0, 1.0, 1.0, 1.0, 1e9).unwrap();
        assert!(sigma_q2_opt_sum(&s, &strong, b).variance() < 1e-3);
        let p = PowerConfig::uniform(1.0).unwrap();
        let late = SlotSplit::new(1.0 - 1e-6).unwrap();
        assert!(sigma_q2_opt_sum(&s, &p, late).variance() > 1e4);
    }

    #[test]
    fn symmetric_and_cut_users() {
        let s = ChannelState::real(0.7, 0.7, 1.1, 1.1, 2.0).unwrap();
        let p = PowerConfig::uniform(2.0).unwrap();
        let b = SlotSplit::new(0.5).unwrap();
        assert_eq!(
            sigma_q2_opt_indiv(&s, &p, b, User::One),
            sigma_q2_opt_indiv(&s, &p, b, User::Two)
        );
        // h2R = 0: numerator is exactly 1
        let cut = ChannelState::real(0.7, 0.7, 1.1, 0.0, 2.0).unwrap();
        let q2 = sigma_q2_opt_indiv(&cut, &p, b, User::Two).variance();
        let d = 8.0 / (1.0 + 0.98);
        assert_abs_diff_eq!(q2, 1.0 / d, epsilon = 1e-12);
    }
}
