//! Uplink one-bit massive MIMO: channel/pilot simulation, Bussgang-based LMMSE
//! channel estimation, MRC achievable-rate analysis, and optimization of the
//! training length and training/data power split at low SNR.

pub mod bussgang;
pub mod error;
pub mod experiment;
pub mod linalg;
pub mod optimizer;
pub mod rate;
pub mod rng;
pub mod system;

pub use error::{Error, Result};

/// Quantization-noise variance per complex sample of a one-bit quantizer fed
/// with a unit-variance Gaussian input, `1 - 2/pi`.
pub const QUANT_NOISE_VAR: f64 = 1.0 - 2.0 / std::f64::consts::PI;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
