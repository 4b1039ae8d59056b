//! Achievable rates and outage of quantize-forward relaying over the
//! half-duplex multiple-access relay channel.
//!
//! Two sources talk to one destination with the help of a half-duplex relay.
//! The relay listens during the first fraction `beta` of the block and
//! transmits during the rest. The crate evaluates:
//!
//! - [`info`]: exact mutual information for discrete pmfs and Gaussian
//!   covariance systems.
//! - [`channel`]: the two-slot signal model, fading draws and the relay's
//!   quantizer.
//! - [`rates`]: per-state rate regions of generalized quantize-forward (GQF),
//!   compress-forward and the baseline schemes.
//! - [`outage`]: Monte Carlo common and individual outage and throughput.
//! - [`experiments`]: configurable sweeps and the CSV/JSON writers behind the
//!   `sim` binary.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod error;
pub mod experiments;
pub mod info;
pub mod outage;
pub mod rates;

pub use error::{Error, Result};
