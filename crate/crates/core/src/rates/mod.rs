//! Achievable-rate evaluation for one channel state.
//!
//! Every scheme reports a [`RateRegion`]: the pentagon
//! `{R1 <= i1, R2 <= i2, R1 + R2 <= isum}` conditioned on the state.

pub mod baselines;
pub mod closed_form;
pub mod discrete;
pub mod gqf;

pub use baselines::{af_region, df_region, direct_mac_region, nonwz_cf_region_fading};
pub use closed_form::{sigma_q2_opt_indiv, sigma_q2_opt_sum, User};
pub use discrete::{cf_region_discrete, gqf_bounds_discrete, gqf_region_discrete, DiscreteMarc};
pub use gqf::{
    cf_region_gaussian, csit_region, gqf_bounds_gaussian, gqf_evaluate, gqf_region, GqfBounds,
    GqfEvaluation, InterferenceBounds,
};

use serde::{Deserialize, Serialize};

/// Fixed source rates and the relay index rate, in bits per channel use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateTarget {
    pub r1: f64,
    pub r2: f64,
    /// Relay quantization-index rate (GQF and non-WZ CF only).
    #[serde(default)]
    pub ru: f64,
}

impl RateTarget {
    pub fn new(r1: f64, r2: f64, ru: f64) -> crate::Result<Self> {
        if [r1, r2, ru].iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
            return Err(crate::Error::Argument(
                "rates must be finite and >= 0".into(),
            ));
        }
        Ok(Self { r1, r2, ru })
    }

    pub fn sum(&self) -> f64 {
        self.r1 + self.r2
    }
}

/// Instantaneous pentagon region in bits per channel use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateRegion {
    pub i1: f64,
    pub i2: f64,
    pub isum: f64,
}

impl RateRegion {
    /// Clamps negative bounds to zero (empty region in that direction).
    pub fn clamped(i1: f64, i2: f64, isum: f64) -> Self {
        Self {
            i1: i1.max(0.0),
            i2: i2.max(0.0),
            isum: isum.max(0.0),
        }
    }

    pub const EMPTY: RateRegion = RateRegion {
        i1: 0.0,
        i2: 0.0,
        isum: 0.0,
    };

    /// `true` when the rate pair violates a bound. Equality is not an outage.
    pub fn in_outage(&self, target: &RateTarget) -> bool {
        target.r1 > self.i1 || target.r2 > self.i2 || target.sum() > self.isum
    }

    /// Whether the sum bound is active, i.e. the region is a proper pentagon
    /// rather than a rectangle.
    pub fn sum_bound_active(&self) -> bool {
        self.isum <= self.i1 + self.i2
    }

    /// Componentwise `self >= other` within `tol`.
    pub fn dominates(&self, other: &RateRegion, tol: f64) -> bool {
        self.i1 + tol >= other.i1 && self.i2 + tol >= other.i2 && self.isum + tol >= other.isum
    }

    pub fn max_abs_diff(&self, other: &RateRegion) -> f64 {
        (self.i1 - other.i1)
            .abs()
            .max((self.i2 - other.i2).abs())
            .max((self.isum - other.isum).abs())
    }
}

/// Outcome of a scheme that can be infeasible for a given quantizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Achievability {
    Feasible(RateRegion),
    Infeasible,
}

impl Achievability {
    pub fn region(self) -> Option<RateRegion> {
        match self {
            Achievability::Feasible(r) => Some(r),
            Achievability::Infeasible => None,
        }
    }

    pub fn is_feasible(self) -> bool {
        matches!(self, Achievability::Feasible(_))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn outage_is_strict() {
        let r = RateRegion {
            i1: 1.0,
            i2: 1.0,
            isum: 2.0,
        };
        assert!(!r.in_outage(&RateTarget::new(1.0, 1.0, 0.0).unwrap()));
        assert!(r.in_outage(&RateTarget::new(1.0 + 1e-12, 1.0, 0.0).unwrap()));
        assert!(!RateRegion::EMPTY.in_outage(&RateTarget::new(0.0, 0.0, 0.0).unwrap()));
    }

    #[test]
    fn clamping_and_dominance() {
        let r = RateRegion::clamped(-0.5, 1.0, 0.2);
        assert_eq!(r.i1, 0.0);
        assert!(r.sum_bound_active());
        assert!(RateRegion::clamped(1.0, 1.0, 1.0).dominates(&r, 0.0));
        assert!(!r.dominates(&RateRegion::clamped(1.0, 1.0, 1.0), 0.0));
    }
}
