//! Uplink system model: configuration, DFT pilots, Rayleigh channels and the
//! one-bit quantizer applied to training and data observations.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::{CMatrix, C64};
use crate::rng::{complex_gaussian, complex_gaussian_matrix};
use crate::{Error, Result};

/// Scalar system parameters. Powers are linear SNRs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    /// Base-station antennas.
    pub m: usize,
    /// Single-antenna users.
    pub k: usize,
    /// Coherence interval in symbols.
    pub t: usize,
    /// Training length in symbols.
    pub tau: usize,
    pub rho_p: f64,
    pub rho_d: f64,
    pub seed: u64,
}

impl SystemConfig {
    pub fn new(m: usize, k: usize, t: usize, tau: usize, rho_p: f64, rho_d: f64, seed: u64) -> Result<Self> {
        let cfg = Self { m, k, t, tau, rho_p, rho_d, seed };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.k == 0 {
            return Err(Error::Config(format!("need M >= 1 and K >= 1, got M={} K={}", self.m, self.k)));
        }
        if self.k > self.tau || self.tau > self.t {
            return Err(Error::Config(format!(
                "need K <= tau <= T, got K={} tau={} T={}",
                self.k, self.tau, self.t
            )));
        }
        for (name, v) in [("rho_p", self.rho_p), ("rho_d", self.rho_d)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Config(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }

    pub fn pilots(&self) -> Result<PilotMatrix> {
        make_dft_pilots(self.tau, self.k)
    }
}

/// `tau x K` pilot block built from DFT columns.
#[derive(Debug, Clone, PartialEq)]
pub struct PilotMatrix {
    entries: CMatrix,
}

impl PilotMatrix {
    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn tau(&self) -> usize {
        self.entries.nrows()
    }

    pub fn k(&self) -> usize {
        self.entries.ncols()
    }

    /// Wraps an arbitrary pilot block. Only the dense estimation path accepts
    /// pilots that are not DFT columns.
    pub fn from_entries(entries: CMatrix) -> Result<Self> {
        if entries.ncols() == 0 || entries.ncols() > entries.nrows() {
            return Err(Error::Dimension(format!(
                "pilot block must be tau x K with 1 <= K <= tau, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        Ok(Self { entries })
    }

    /// `Phi Phi^H`, the `tau x tau` pilot Gram matrix.
    pub fn outer_gram(&self) -> CMatrix {
        &self.entries * self.entries.adjoint()
    }
}

/// First `k` columns of the `tau x tau` DFT matrix, `exp(-j 2 pi n k / tau)`.
pub fn make_dft_pilots(tau: usize, k: usize) -> Result<PilotMatrix> {
    if k == 0 || k > tau {
        return Err(Error::Dimension(format!("DFT pilots need 1 <= K <= tau, got K={k} tau={tau}")));
    }
    let entries = CMatrix::from_fn(tau, k, |n, col| {
        // reduce the product mod tau so the phase argument stays small
        let idx = (n * col) % tau;
        C64::from_polar(1.0, -2.0 * PI * idx as f64 / tau as f64)
    });
    Ok(PilotMatrix { entries })
}

/// One `M x K` channel realization with i.i.d. CN(0,1) entries.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSample {
    pub h: CMatrix,
}

impl ChannelSample {
    pub fn draw<R: Rng + ?Sized>(m: usize, k: usize, rng: &mut R) -> Self {
        Self { h: complex_gaussian_matrix(m, k, rng) }
    }

    pub fn m(&self) -> usize {
        self.h.nrows()
    }

    pub fn k(&self) -> usize {
        self.h.ncols()
    }
}

/// Output of the one-bit ADCs; every entry lies in `{(+-1 +- j)/sqrt(2)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedBlock {
    entries: CMatrix,
}

impl QuantizedBlock {
    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_inner(self) -> CMatrix {
        self.entries
    }

    pub fn is_valid(&self) -> bool {
        self.entries
            .iter()
            .all(|z| z.re.abs() == FRAC_1_SQRT_2 && z.im.abs() == FRAC_1_SQRT_2)
    }
}

#[inline]
fn sign(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Per-component sign quantizer with `sign(0) = +1`.
#[inline]
pub fn quantize_sample(y: C64) -> C64 {
    C64::new(sign(y.re) * FRAC_1_SQRT_2, sign(y.im) * FRAC_1_SQRT_2)
}

pub fn quantize_one_bit(y: &CMatrix) -> QuantizedBlock {
    QuantizedBlock { entries: y.map(quantize_sample) }
}

/// Data-symbol alphabet. Both have unit average power.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Constellation {
    #[default]
    Qpsk,
    Gaussian,
}

impl Constellation {
    pub fn draw<R: Rng + ?Sized>(self, k: usize, rng: &mut R) -> DVector<C64> {
        match self {
            Constellation::Qpsk => DVector::from_fn(k, |_, _| {
                let re = if rng.random::<bool>() { FRAC_1_SQRT_2 } else { -FRAC_1_SQRT_2 };
                let im = if rng.random::<bool>() { FRAC_1_SQRT_2 } else { -FRAC_1_SQRT_2 };
                C64::new(re, im)
            }),
            Constellation::Gaussian => DVector::from_fn(k, |_, _| complex_gaussian(rng)),
        }
    }
}

fn check_channel(config: &SystemConfig, channel: &ChannelSample) -> Result<()> {
    if channel.m() != config.m || channel.k() != config.k {
        return Err(Error::Dimension(format!(
            "channel is {}x{}, config expects {}x{}",
            channel.m(),
            channel.k(),
            config.m,
            config.k
        )));
    }
    Ok(())
}

/// Quantized training block `Q(sqrt(rho_p) H Phi^T + N_p)`, `M x tau`.
pub fn simulate_training<R: Rng + ?Sized>(
    config: &SystemConfig,
    channel: &ChannelSample,
    pilots: &PilotMatrix,
    rng: &mut R,
) -> Result<QuantizedBlock> {
    check_channel(config, channel)?;
    if pilots.tau() != config.tau || pilots.k() != config.k {
        return Err(Error::Dimension(format!(
            "pilots are {}x{}, config expects {}x{}",
            pilots.tau(),
            pilots.k(),
            config.tau,
            config.k
        )));
    }
    let noise = complex_gaussian_matrix(config.m, config.tau, rng);
    let y = &channel.h * pilots.entries().transpose() * C64::from(config.rho_p.sqrt()) + noise;
    Ok(quantize_one_bit(&y))
}

/// Quantized data observation `Q(sqrt(rho_d) H s + n_d)`, `M x 1`.
pub fn simulate_data_slot<R: Rng + ?Sized>(
    config: &SystemConfig,
    channel: &ChannelSample,
    symbols: &DVector<C64>,
    rng: &mut R,
) -> Result<QuantizedBlock> {
    check_channel(config, channel)?;
    if symbols.len() != config.k {
        return Err(Error::Dimension(format!(
            "expected {} symbols, got {}",
            config.k,
            symbols.len()
        )));
    }
    let noise = complex_gaussian_matrix(config.m, 1, rng);
    let hs: DMatrix<C64> = DMatrix::from_column_slice(config.m, 1, (&channel.h * symbols).as_slice());
    let y = hs * C64::from(config.rho_d.sqrt()) + noise;
    Ok(quantize_one_bit(&y))
}
