//! Bussgang linearization of the one-bit quantizer and the LMMSE channel
//! estimator built on it.
//!
//! With DFT pilots the unquantized training covariance is
//! `(rho_p Phi Phi^H + I_tau) (x) I_M`. Every diagonal entry equals
//! `K rho_p + 1`, so the normalized correlation is block-scalar and the
//! elementwise arcsine keeps the `(x) I_M` structure. All `M tau`-sized
//! quantities therefore reduce exactly to `tau`-sized ones, which is what this
//! module computes. [`dense`] evaluates the same quantities literally on the
//! full `M tau` vectors and is used to validate the reduction.

pub mod dense;

use std::f64::consts::FRAC_2_PI;

use serde::{Deserialize, Serialize};

use crate::linalg::{hermitian_defect, hermitian_eigenvalues, hermitian_inverse, CMatrix, C64};
use crate::system::{PilotMatrix, QuantizedBlock};
use crate::{Error, Result, QUANT_NOISE_VAR};

/// Tolerance for treating a normalized correlation slightly outside
/// `[-1, 1]` as rounding.
pub const ARCSIN_CLAMP_TOL: f64 = 1e-12;

/// Scalar Bussgang gain `alpha` of `A = alpha I`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct BussgangGain(pub f64);

impl BussgangGain {
    pub fn value(self) -> f64 {
        self.0
    }

    pub fn squared(self) -> f64 {
        self.0 * self.0
    }
}

/// `alpha = sqrt((2/pi) / (K rho + 1))`.
pub fn bussgang_gain(k: usize, rho: f64) -> Result<BussgangGain> {
    if k == 0 {
        return Err(Error::Domain("Bussgang gain needs K >= 1".into()));
    }
    if !(rho >= 0.0) || !rho.is_finite() {
        return Err(Error::Domain(format!("SNR must be finite and >= 0, got {rho}")));
    }
    Ok(BussgangGain((FRAC_2_PI / (k as f64 * rho + 1.0)).sqrt()))
}

/// `alpha^2` without the domain checks, for hot loops where inputs are
/// already validated.
#[inline]
pub(crate) fn gain_sq(k: usize, rho: f64) -> f64 {
    FRAC_2_PI / (k as f64 * rho + 1.0)
}

/// Arcsine law for one pair of normalized complex correlations.
pub fn arcsine_law(normalized: C64) -> C64 {
    let clamp = |x: f64| {
        debug_assert!(x.abs() <= 1.0 + ARCSIN_CLAMP_TOL, "correlation {x} outside [-1, 1]");
        x.clamp(-1.0, 1.0)
    };
    C64::new(clamp(normalized.re).asin(), clamp(normalized.im).asin()) * FRAC_2_PI
}

/// Autocorrelation of the quantized training block, `C_rr = C_tau (x) I_M`.
#[derive(Debug, Clone, PartialEq)]
pub struct PilotAutocorrelation {
    pub c_tau: CMatrix,
}

impl PilotAutocorrelation {
    pub fn tau(&self) -> usize {
        self.c_tau.nrows()
    }

    /// Materializes the full `M tau x M tau` matrix `C_tau (x) I_M`.
    pub fn dense(&self, m: usize) -> CMatrix {
        self.c_tau.kronecker(&CMatrix::identity(m, m))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigenvalues(&self.c_tau).first().copied().unwrap_or(f64::NAN)
    }

    pub fn hermitian_defect(&self) -> f64 {
        hermitian_defect(&self.c_tau)
    }
}

/// Diagonal of `Phi Phi^H` must equal `K` for the structure-exploiting path.
fn check_dft_structure(pilots: &PilotMatrix) -> Result<CMatrix> {
    let gram = pilots.outer_gram();
    let k = pilots.k() as f64;
    for i in 0..gram.nrows() {
        if (gram[(i, i)] - C64::from(k)).norm() > 1e-9 {
            return Err(Error::Domain(
                "pilot rows must all have energy K (DFT pilots); use the dense path for other pilots".into(),
            ));
        }
    }
    Ok(gram)
}

pub fn pilot_autocorrelation(pilots: &PilotMatrix, rho_p: f64) -> Result<PilotAutocorrelation> {
    if !(rho_p >= 0.0) || !rho_p.is_finite() {
        return Err(Error::Domain(format!("rho_p must be finite and >= 0, got {rho_p}")));
    }
    let gram = check_dft_structure(pilots)?;
    let scale = pilots.k() as f64 * rho_p + 1.0;
    let tau = pilots.tau();
    // unit diagonal is exact; asin is ill-conditioned at 1
    let c_tau = CMatrix::from_fn(tau, tau, |i, j| {
        if i == j {
            C64::from(1.0)
        } else {
            arcsine_law(gram[(i, j)] * rho_p / scale)
        }
    });
    Ok(PilotAutocorrelation { c_tau })
}

/// Per-entry estimate variance, normalized MSE and the low-SNR surrogate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorQuality {
    pub eta_sq: f64,
    pub mse: f64,
    pub sigma_sq: f64,
}

/// Low-SNR closed form for the estimate variance,
/// `alpha_p^2 tau rho_p / (alpha_p^2 tau rho_p + alpha_p^2 + 1 - 2/pi)`.
pub fn low_snr_quality(tau: usize, rho_p: f64, k: usize) -> f64 {
    let a2 = gain_sq(k, rho_p);
    let snr = a2 * tau as f64 * rho_p;
    if snr == 0.0 {
        return 0.0;
    }
    snr / (snr + a2 + QUANT_NOISE_VAR)
}

/// Channel estimate and, when the true channel is known, its error.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelEstimate {
    pub h_hat: CMatrix,
    pub error: Option<CMatrix>,
}

impl ChannelEstimate {
    pub fn with_truth(mut self, h: &CMatrix) -> Result<Self> {
        if h.shape() != self.h_hat.shape() {
            return Err(Error::Dimension(format!(
                "true channel is {:?}, estimate is {:?}",
                h.shape(),
                self.h_hat.shape()
            )));
        }
        self.error = Some(h - &self.h_hat);
        Ok(self)
    }
}

/// Bussgang-LMMSE estimator for one pilot block and training SNR.
///
/// Holds the `K x tau` combiner `alpha_p sqrt(rho_p) Phi^H C_tau^{-1}` so the
/// estimate of each antenna row is a single matrix-vector product.
#[derive(Debug, Clone)]
pub struct LmmseEstimator {
    k: usize,
    tau: usize,
    rho_p: f64,
    alpha_p: BussgangGain,
    autocorrelation: PilotAutocorrelation,
    combiner: CMatrix,
    eta_sq: f64,
}

impl LmmseEstimator {
    pub fn new(pilots: &PilotMatrix, rho_p: f64) -> Result<Self> {
        let autocorrelation = pilot_autocorrelation(pilots, rho_p)?;
        let alpha_p = bussgang_gain(pilots.k(), rho_p)?;
        let c_inv = hermitian_inverse(&autocorrelation.c_tau)?;
        let phi = pilots.entries();
        let gain = alpha_p.value() * rho_p.sqrt();
        let combiner = phi.adjoint() * &c_inv * C64::from(gain);
        let trace = (phi.adjoint() * &c_inv * phi).trace().re;
        let eta_sq = alpha_p.squared() * rho_p * trace / pilots.k() as f64;
        Ok(Self {
            k: pilots.k(),
            tau: pilots.tau(),
            rho_p,
            alpha_p,
            autocorrelation,
            combiner,
            eta_sq: eta_sq.clamp(0.0, 1.0),
        })
    }

    pub fn alpha_p(&self) -> BussgangGain {
        self.alpha_p
    }

    pub fn autocorrelation(&self) -> &PilotAutocorrelation {
        &self.autocorrelation
    }

    pub fn combiner(&self) -> &CMatrix {
        &self.combiner
    }

    pub fn eta_sq(&self) -> f64 {
        self.eta_sq
    }

    pub fn quality(&self) -> EstimatorQuality {
        EstimatorQuality {
            eta_sq: self.eta_sq,
            mse: 1.0 - self.eta_sq,
            sigma_sq: low_snr_quality(self.tau, self.rho_p, self.k),
        }
    }

    /// `H_hat = R_p W^T` for an `M x tau` quantized block.
    pub fn estimate(&self, r_p: &QuantizedBlock) -> Result<ChannelEstimate> {
        let r = r_p.entries();
        if r.ncols() != self.tau {
            return Err(Error::Dimension(format!(
                "training block has {} columns, estimator expects tau={}",
                r.ncols(),
                self.tau
            )));
        }
        Ok(ChannelEstimate { h_hat: r * self.combiner.transpose(), error: None })
    }
}

pub fn lmmse_estimate(r_p: &QuantizedBlock, pilots: &PilotMatrix, rho_p: f64) -> Result<ChannelEstimate> {
    LmmseEstimator::new(pilots, rho_p)?.estimate(r_p)
}

/// Quality metrics are independent of `M`; the argument is kept for interface
/// symmetry with the dense evaluation.
pub fn estimate_quality(pilots: &PilotMatrix, rho_p: f64, m: usize) -> Result<EstimatorQuality> {
    if m == 0 {
        return Err(Error::Domain("M must be >= 1".into()));
    }
    Ok(LmmseEstimator::new(pilots, rho_p)?.quality())
}
