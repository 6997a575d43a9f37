//! Literal `M tau`-dimensional Bussgang-LMMSE evaluation.
//!
//! Works on the vectorized training block `r_p = vec(R_p)` with the full
//! `(Phi (x) sqrt(rho_p) I_M)` model and a general (LU) inverse. Accepts any
//! pilot block, not only DFT columns. Cost grows as `(M tau)^3`; intended for
//! small validation instances.

use std::f64::consts::FRAC_2_PI;

use nalgebra::{DMatrix, DVector};

use super::arcsine_law;
use crate::linalg::{CMatrix, C64};
use crate::system::{PilotMatrix, QuantizedBlock};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct DenseBlmmse {
    m: usize,
    k: usize,
    tau: usize,
    /// Diagonal of the Bussgang matrix `A_p`.
    pub a_p: DVector<f64>,
    pub c_yy: CMatrix,
    pub c_rr: CMatrix,
    /// `A_p (Phi (x) sqrt(rho_p) I_M)`.
    pub phi_tilde: CMatrix,
    /// `Phi_tilde^H C_rr^{-1}`, `MK x M tau`.
    pub estimator: CMatrix,
}

impl DenseBlmmse {
    pub fn new(pilots: &PilotMatrix, rho_p: f64, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::Domain("M must be >= 1".into()));
        }
        if !(rho_p >= 0.0) || !rho_p.is_finite() {
            return Err(Error::Domain(format!("rho_p must be finite and >= 0, got {rho_p}")));
        }
        let (tau, k) = (pilots.tau(), pilots.k());
        let n = m * tau;
        let scaled_eye = CMatrix::identity(m, m) * C64::from(rho_p.sqrt());
        let phi_bar = pilots.entries().kronecker(&scaled_eye);
        let c_yy = &phi_bar * phi_bar.adjoint() + CMatrix::identity(n, n);

        let sigma: DVector<f64> = DVector::from_fn(n, |i, _| c_yy[(i, i)].re);
        let inv_sqrt = sigma.map(|s| 1.0 / s.sqrt());
        let a_p = inv_sqrt.map(|v| FRAC_2_PI.sqrt() * v);

        let c_rr = CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                C64::from(1.0)
            } else {
                arcsine_law(c_yy[(i, j)] * (inv_sqrt[i] * inv_sqrt[j]))
            }
        });
        let phi_tilde = CMatrix::from_fn(n, m * k, |i, j| phi_bar[(i, j)] * a_p[i]);

        let c_rr_inv = c_rr
            .clone()
            .try_inverse()
            .ok_or(Error::Singular { min_eigenvalue: f64::NAN })?;
        let estimator = phi_tilde.adjoint() * c_rr_inv;
        Ok(Self { m, k, tau, a_p, c_yy, c_rr, phi_tilde, estimator })
    }

    /// Estimate `vec^{-1}(Phi_tilde^H C_rr^{-1} vec(R_p))`, `M x K`.
    pub fn estimate(&self, r_p: &QuantizedBlock) -> Result<CMatrix> {
        let r = r_p.entries();
        if r.shape() != (self.m, self.tau) {
            return Err(Error::Dimension(format!(
                "training block is {:?}, expected ({}, {})",
                r.shape(),
                self.m,
                self.tau
            )));
        }
        // nalgebra storage is column-major, so the slice is vec(R_p)
        let r_vec = DVector::from_column_slice(r.as_slice());
        let h_vec = &self.estimator * r_vec;
        Ok(DMatrix::from_column_slice(self.m, self.k, h_vec.as_slice()))
    }

    /// `tr(Phi_tilde^H C_rr^{-1} Phi_tilde) / MK`.
    pub fn eta_sq(&self) -> f64 {
        (&self.estimator * &self.phi_tilde).trace().re / (self.m * self.k) as f64
    }

    /// `tr(I - Phi_tilde^H C_rr^{-1} Phi_tilde) / MK`.
    pub fn mse(&self) -> f64 {
        let mk = self.m * self.k;
        let g = &self.estimator * &self.phi_tilde;
        (CMatrix::identity(mk, mk) - g).trace().re / mk as f64
    }
}
