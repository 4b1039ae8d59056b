//! Half-duplex MARC signal model.
//!
//! Slot 1 (fraction `beta` of the block): both sources broadcast, the relay
//! and the destination listen.
//!
//! ```text
//! YD1 = h1D X11 + h2D X21 + ZD1
//! YR  = h1R X11 + h2R X21 + ZR
//! ŶR  = YR + ZQ                    (relay quantizer, Var ZQ = sigma_q2)
//! ```
//!
//! Slot 2: sources keep transmitting and the relay joins in.
//!
//! ```text
//! YD2 = h1D X12 + h2D X22 + hRD XR + ZD2
//! ```
//!
//! All noises have unit variance. Static channels are real, fading channels
//! are circularly-symmetric complex; the distinction lives only in
//! [`FieldKind`].

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::info::{FieldKind, GaussianSystem};

pub const X11: &str = "X11";
pub const X21: &str = "X21";
pub const X12: &str = "X12";
pub const X22: &str = "X22";
pub const XR: &str = "XR";
pub const YR: &str = "YR";
pub const YR_HAT: &str = "YR_hat";
pub const YD1: &str = "YD1";
pub const YD2: &str = "YD2";

/// One realization of the five link gains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelState {
    pub h1d: Complex64,
    pub h2d: Complex64,
    pub h1r: Complex64,
    pub h2r: Complex64,
    pub hrd: Complex64,
    field: FieldKind,
}

impl ChannelState {
    /// Static real channel.
    pub fn real(h1d: f64, h2d: f64, h1r: f64, h2r: f64, hrd: f64) -> Result<Self> {
        let c = |x: f64| Complex64::new(x, 0.0);
        Self::new([c(h1d), c(h2d), c(h1r), c(h2r), c(hrd)], FieldKind::Real)
    }

    /// Complex (fading) channel realization.
    pub fn complex(
        h1d: Complex64,
        h2d: Complex64,
        h1r: Complex64,
        h2r: Complex64,
        hrd: Complex64,
    ) -> Result<Self> {
        Self::new([h1d, h2d, h1r, h2r, hrd], FieldKind::ComplexCircular)
    }

    /// Gains in the order `[h1D, h2D, h1R, h2R, hRD]`.
    pub fn new(gains: [Complex64; 5], field: FieldKind) -> Result<Self> {
        if gains.iter().any(|h| !h.re.is_finite() || !h.im.is_finite()) {
            return Err(Error::Argument("channel gains must be finite".into()));
        }
        if field == FieldKind::Real && gains.iter().any(|h| h.im != 0.0) {
            return Err(Error::Argument(
                "static (real) channel state with complex gain".into(),
            ));
        }
        let [h1d, h2d, h1r, h2r, hrd] = gains;
        Ok(Self {
            h1d,
            h2d,
            h1r,
            h2r,
            hrd,
            field,
        })
    }

    pub fn field(&self) -> FieldKind {
        self.field
    }

    pub fn gains(&self) -> [Complex64; 5] {
        [self.h1d, self.h2d, self.h1r, self.h2r, self.hrd]
    }

    /// The part of the state visible to the relay (source-relay links only).
    pub fn relay_csi(&self) -> RelayCsi {
        RelayCsi {
            h1r: self.h1r,
            h2r: self.h2r,
            field: self.field,
        }
    }

    /// Same state with the relay-destination gain replaced.
    pub fn with_hrd(mut self, hrd: Complex64) -> Result<Self> {
        self.hrd = hrd;
        Self::new(self.gains(), self.field)
    }
}

/// Receiver-side CSI at the relay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelayCsi {
    pub h1r: Complex64,
    pub h2r: Complex64,
    pub field: FieldKind,
}

/// Average transmit powers per slot (linear).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerConfig {
    pub p11: f64,
    pub p21: f64,
    pub p12: f64,
    pub p22: f64,
    pub pr: f64,
}

impl PowerConfig {
    pub fn new(p11: f64, p21: f64, p12: f64, p22: f64, pr: f64) -> Result<Self> {
        let p = Self {
            p11,
            p21,
            p12,
            p22,
            pr,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn uniform(p: f64) -> Result<Self> {
        Self::new(p, p, p, p, p)
    }

    /// Sources at `snr`, relay at `snr / (1 - beta)`: equal average energy per
    /// node over the block.
    pub fn from_snr_db(snr_db: f64, beta: SlotSplit) -> Result<Self> {
        let snr = db_to_linear(snr_db);
        Self::new(snr, snr, snr, snr, snr / (1.0 - beta.value()))
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.p11, self.p21, self.p12, self.p22, self.pr];
        if all.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::Argument(
                "powers must be finite and non-negative".into(),
            ));
        }
        Ok(())
    }

    /// Source powers multiplied by `factor`, relay silenced.
    pub fn direct_only(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.p11 * factor,
            self.p21 * factor,
            self.p12 * factor,
            self.p22 * factor,
            0.0,
        )
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Rayleigh variances of the five links.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FadingProfile {
    pub var1d: f64,
    pub var2d: f64,
    pub var1r: f64,
    pub var2r: f64,
    pub varrd: f64,
}

impl FadingProfile {
    pub fn new(var1d: f64, var2d: f64, var1r: f64, var2r: f64, varrd: f64) -> Result<Self> {
        let p = Self {
            var1d,
            var2d,
            var1r,
            var2r,
            varrd,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn uniform(var: f64) -> Result<Self> {
        Self::new(var, var, var, var, var)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.var1d, self.var2d, self.var1r, self.var2r, self.varrd];
        if all.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::Argument("fading variances must be > 0".into()));
        }
        Ok(())
    }

    pub fn variances(&self) -> [f64; 5] {
        [self.var1d, self.var2d, self.var1r, self.var2r, self.varrd]
    }
}

/// Fraction `beta = n / l` of the block spent in the listening slot.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct SlotSplit(f64);

impl SlotSplit {
    pub fn new(beta: f64) -> Result<Self> {
        if beta > 0.0 && beta < 1.0 {
            Ok(Self(beta))
        } else {
            Err(Error::Argument(format!("slot split {beta} not in (0, 1)")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn second(self) -> f64 {
        1.0 - self.0
    }
}

/// Relay quantizer: Gaussian test channel `ŶR = YR + ZQ`, or no relay
/// observation at all (the infinite-variance limit).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Quantizer {
    Noise(f64),
    Discarded,
}

impl Quantizer {
    pub fn noise(sigma_q2: f64) -> Result<Self> {
        if sigma_q2 > 0.0 && sigma_q2.is_finite() {
            Ok(Quantizer::Noise(sigma_q2))
        } else if sigma_q2 == f64::INFINITY {
            Ok(Quantizer::Discarded)
        } else {
            Err(Error::Argument(format!(
                "quantization noise variance {sigma_q2} must be > 0"
            )))
        }
    }

    pub fn variance(self) -> f64 {
        match self {
            Quantizer::Noise(v) => v,
            Quantizer::Discarded => f64::INFINITY,
        }
    }
}

/// Counter-based sample stream: ChaCha8 keyed by the master seed, with the
/// sample index selecting one of its 2^64 independent streams. Draw `i` is a
/// pure function of `(seed, i)`, independent of scheduling.
pub fn sample_stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Draws one block-Rayleigh state.
///
/// Consumes ten standard normals in the order `(re, im)` for h1D, h2D, h1R,
/// h2R, hRD, each scaled by `sqrt(var / 2)`. Profiles that differ only in
/// variances therefore produce coupled states from the same stream.
pub fn sample_fading<R: Rng + ?Sized>(profile: &FadingProfile, rng: &mut R) -> ChannelState {
    let mut gains = [Complex64::new(0.0, 0.0); 5];
    for (h, var) in gains.iter_mut().zip(profile.variances()) {
        let s = (var / 2.0).sqrt();
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        *h = Complex64::new(s * re, s * im);
    }
    let [h1d, h2d, h1r, h2r, hrd] = gains;
    ChannelState {
        h1d,
        h2d,
        h1r,
        h2r,
        hrd,
        field: FieldKind::ComplexCircular,
    }
}

/// Slot-1 system over `{X11, X21, YR, ŶR, YD1}`. With
/// [`Quantizer::Discarded`] the `ŶR` variable is absent.
pub fn slot1_system(
    state: &ChannelState,
    power: &PowerConfig,
    quantizer: Quantizer,
) -> Result<GaussianSystem> {
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    // sources: X11, X21, ZD1, ZR, ZQ
    let x11 = vec![one, zero, zero, zero, zero];
    let x21 = vec![zero, one, zero, zero, zero];
    let yd1 = vec![state.h1d, state.h2d, one, zero, zero];
    let yr = vec![state.h1r, state.h2r, zero, one, zero];
    match quantizer {
        Quantizer::Noise(q) => {
            if !(q > 0.0 && q.is_finite()) {
                return Err(Error::Argument(format!(
                    "quantization noise variance {q} must be > 0"
                )));
            }
            let yq = vec![state.h1r, state.h2r, zero, one, one];
            GaussianSystem::from_linear_model(
                [X11, X21, YR, YR_HAT, YD1],
                &[x11, x21, yr, yq, yd1],
                &[power.p11, power.p21, 1.0, 1.0, q],
                state.field,
            )
        }
        Quantizer::Discarded => GaussianSystem::from_linear_model(
            [X11, X21, YR, YD1],
            &[x11, x21, yr, yd1],
            &[power.p11, power.p21, 1.0, 1.0, 0.0],
            state.field,
        ),
    }
}

/// Slot-2 system over `{X12, X22, XR, YD2}`.
pub fn slot2_system(state: &ChannelState, power: &PowerConfig) -> Result<GaussianSystem> {
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    GaussianSystem::from_linear_model(
        [X12, X22, XR, YD2],
        &[
            vec![one, zero, zero, zero],
            vec![zero, one, zero, zero],
            vec![zero, zero, one, zero],
            vec![state.h1d, state.h2d, state.hrd, one],
        ],
        &[power.p12, power.p22, power.pr, 1.0],
        state.field,
    )
}

/// Received power at the relay, `1 + |h1R|^2 P11 + |h2R|^2 P21`.
pub fn relay_received_power(csi: &RelayCsi, power: &PowerConfig) -> f64 {
    1.0 + csi.h1r.norm_sqr() * power.p11 + csi.h2r.norm_sqr() * power.p21
}

/// Quantization noise variance that makes `beta I(YR; ŶR)` equal the fixed
/// relay index rate `ru`. Uses only the relay's own CSI.
pub fn sigma_q2_for_fixed_ru(
    csi: &RelayCsi,
    power: &PowerConfig,
    beta: SlotSplit,
    ru: f64,
) -> Result<f64> {
    if !(ru > 0.0) {
        return Err(Error::Argument(format!(
            "relay index rate {ru} must be > 0"
        )));
    }
    let c = csi.field.prefactor();
    let denom = (ru / (c * beta.value()) * std::f64::consts::LN_2).exp_m1();
    Ok(relay_received_power(csi, power) / denom)
}

/// Forward map of [`sigma_q2_for_fixed_ru`]: `beta I(YR; ŶR)` in bits.
pub fn relay_index_rate(csi: &RelayCsi, power: &PowerConfig, beta: SlotSplit, q: Quantizer) -> f64 {
    match q {
        Quantizer::Noise(s) => {
            beta.value() * csi.field.prefactor() * (relay_received_power(csi, power) / s).ln_1p()
                / std::f64::consts::LN_2
        }
        Quantizer::Discarded => 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::info::mutual_info_gaussian;
    use approx::assert_abs_diff_eq;

    fn fig3() -> ChannelState {
        ChannelState::real(1.0, 1.0, 3.0, 0.5, 3.0).unwrap()
    }

    #[test]
    fn fig3_relay_variance() {
        let sys = slot1_system(
            &fig3(),
            &PowerConfig::uniform(1.0).unwrap(),
            Quantizer::Noise(2.0),
        )
        .unwrap();
        assert_abs_diff_eq!(sys.variance(YR).unwrap(), 10.25, epsilon = 1e-14);
        assert_abs_diff_eq!(sys.variance(YR_HAT).unwrap(), 12.25, epsilon = 1e-14);
    }

    #[test]
    fn slot2_variance() {
        let s = ChannelState::real(1.0, 1.0, 0.0, 0.0, 3.0).unwrap();
        let sys = slot2_system(&s, &PowerConfig::uniform(1.0).unwrap()).unwrap();
        assert_abs_diff_eq!(sys.variance(YD2).unwrap(), 12.0, epsilon = 1e-14);
        assert_eq!(
            mutual_info_gaussian(&sys, &[X12], &[X22], &[]).unwrap(),
            0.0
        );
    }

    #[test]
    fn silent_relay_carries_nothing() {
        let p = PowerConfig::new(1.0, 1.0, 1.0, 1.0, 0.0).unwrap();
        let sys = slot2_system(&fig3(), &p).unwrap();
        assert_eq!(mutual_info_gaussian(&sys, &[XR], &[YD2], &[]).unwrap(), 0.0);
    }

    #[test]
    fn zero_source_power_gives_pure_noise() {
        let p = PowerConfig::new(0.0, 0.0, 1.0, 1.0, 1.0).unwrap();
        let sys = slot1_system(&fig3(), &p, Quantizer::Noise(1.0)).unwrap();
        for (a, b) in [
            (&[X11, X21][..], &[YD1, YR_HAT][..]),
            (&[X11][..], &[YR][..]),
            (&[X21][..], &[YD1][..]),
        ] {
            assert_eq!(mutual_info_gaussian(&sys, a, b, &[]).unwrap(), 0.0);
        }
    }

    #[test]
    fn coarse_quantizer_forgets_observation() {
        let p = PowerConfig::uniform(1.0).unwrap();
        let small = slot1_system(&fig3(), &p, Quantizer::Noise(1e6)).unwrap();
        let mi = mutual_info_gaussian(&small, &[YR], &[YR_HAT], &[]).unwrap();
        assert!(mi < 1e-5);
        let gone = slot1_system(&fig3(), &p, Quantizer::Discarded).unwrap();
        assert!(!gone.contains(YR_HAT));
    }

    #[test]
    fn quantizer_markov_chain() {
        let p = PowerConfig::uniform(2.0).unwrap();
        let sys = slot1_system(&fig3(), &p, Quantizer::Noise(0.7)).unwrap();
        assert_eq!(
            mutual_info_gaussian(&sys, &[X11], &[X21], &[]).unwrap(),
            0.0
        );
        let mi = mutual_info_gaussian(&sys, &[X11, X21], &[YR_HAT], &[YR]).unwrap();
        assert!(mi.abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_quantizer() {
        let p = PowerConfig::uniform(1.0).unwrap();
        assert!(slot1_system(&fig3(), &p, Quantizer::Noise(0.0)).is_err());
        assert!(slot1_system(&fig3(), &p, Quantizer::Noise(-1.0)).is_err());
        assert!(Quantizer::noise(0.0).is_err());
        assert_eq!(
            Quantizer::noise(f64::INFINITY).unwrap(),
            Quantizer::Discarded
        );
    }

    #[test]
    fn fixed_ru_quantizer_value() {
        // |h1R|^2 P11 = |h2R|^2 P21 = 1, beta = 0.5, RU = 3 -> 3 / (2^6 - 1)
        let s = ChannelState::complex(
            Complex64::new(0.3, 0.1),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.6, 0.8),
            Complex64::new(0.0, 1.0),
            Complex64::new(5.0, 0.0),
        )
        .unwrap();
        let p = PowerConfig::uniform(1.0).unwrap();
        let beta = SlotSplit::new(0.5).unwrap();
        let q = sigma_q2_for_fixed_ru(&s.relay_csi(), &p, beta, 3.0).unwrap();
        assert_abs_diff_eq!(q, 3.0 / 63.0, epsilon = 1e-15);
        assert_abs_diff_eq!(q, 0.047619, epsilon = 1e-6);
        let back = relay_index_rate(&s.relay_csi(), &p, beta, Quantizer::Noise(q));
        assert_abs_diff_eq!(back, 3.0, epsilon = 1e-12);
    }

    #[test]
    fn fixed_ru_quantizer_limits_and_errors() {
        let s = fig3();
        let p = PowerConfig::uniform(1.0).unwrap();
        let beta = SlotSplit::new(0.5).unwrap();
        let csi = s.relay_csi();
        assert!(sigma_q2_for_fixed_ru(&csi, &p, beta, 0.0).is_err());
        assert!(sigma_q2_for_fixed_ru(&csi, &p, beta, -1.0).is_err());
        assert!(sigma_q2_for_fixed_ru(&csi, &p, beta, 200.0).unwrap() < 1e-50);
    }

    #[test]
    fn sampling_is_deterministic() {
        let prof = FadingProfile::uniform(1.0).unwrap();
        let a = sample_fading(&prof, &mut sample_stream(42, 7));
        let b = sample_fading(&prof, &mut sample_stream(42, 7));
        let c = sample_fading(&prof, &mut sample_stream(42, 8));
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.field(), FieldKind::ComplexCircular);
    }

    #[test]
    fn vanishing_variance_cuts_link() {
        let prof = FadingProfile::new(1.0, 1.0, 1.0, 1.0, 1e-30).unwrap();
        let s = sample_fading(&prof, &mut sample_stream(1, 0));
        assert!(s.hrd.norm() < 1e-13);
    }

    #[test]
    fn validation() {
        assert!(SlotSplit::new(0.0).is_err());
        assert!(SlotSplit::new(1.0).is_err());
        assert!(PowerConfig::new(-1.0, 0.0, 0.0, 0.0, 0.0).is_err());
        assert!(FadingProfile::new(1.0, 1.0, 1.0, 1.0, 0.0).is_err());
        assert!(ChannelState::real(f64::NAN, 0.0, 0.0, 0.0, 0.0).is_err());
        assert!(ChannelState::new([Complex64::new(0.0, 1.0); 5], FieldKind::Real).is_err());
    }

    #[test]
    fn snr_power_rule() {
        let p = PowerConfig::from_snr_db(10.0, SlotSplit::new(0.5).unwrap()).unwrap();
        assert_abs_diff_eq!(p.p11, 10.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.pr, 20.0, epsilon = 1e-12);
    }
}
