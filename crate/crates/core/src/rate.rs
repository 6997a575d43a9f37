//! MRC detection and uplink achievable-rate analysis.
//!
//! The Monte Carlo rate evaluates the per-realization SINR of the ergodic
//! lower bound, with the data-phase Bussgang gain `alpha_d` and quantization
//! noise covariance `(1 - 2/pi) I`. The closed form replaces the channel
//! averages by their Gaussian-model moments, which [`appendix_moments_mc`]
//! checks directly.

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bussgang::{gain_sq, ChannelEstimate, LmmseEstimator};
use crate::linalg::{CMatrix, C64};
use crate::rng::{mean_and_stderr, pairwise_sum, trial_rng};
use crate::system::{simulate_training, ChannelSample, QuantizedBlock, SystemConfig};
use crate::{Error, Result, QUANT_NOISE_VAR};

/// Power terms of one user's SINR.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateBreakdown {
    pub signal: f64,
    /// User interference.
    pub ui: f64,
    /// Channel-estimation error.
    pub est_err: f64,
    /// AWGN after combining.
    pub awgn: f64,
    /// Quantization noise after combining.
    pub quant: f64,
    pub rate_bits: f64,
}

impl RateBreakdown {
    pub fn new(signal: f64, ui: f64, est_err: f64, awgn: f64, quant: f64) -> Self {
        let mut b = Self { signal, ui, est_err, awgn, quant, rate_bits: 0.0 };
        b.rate_bits = b.sinr().ln_1p() / std::f64::consts::LN_2;
        b
    }

    pub fn interference_plus_noise(&self) -> f64 {
        self.ui + self.est_err + self.awgn + self.quant
    }

    /// Zero when there is no signal power, including the `0/0` case of an
    /// all-zero estimate.
    pub fn sinr(&self) -> f64 {
        if self.signal == 0.0 {
            0.0
        } else {
            self.signal / self.interference_plus_noise()
        }
    }
}

/// `s_hat = H_hat^H r_d`.
pub fn mrc_detect(estimate: &ChannelEstimate, r_d: &QuantizedBlock) -> Result<DVector<C64>> {
    let r = r_d.entries();
    if r.ncols() != 1 || r.nrows() != estimate.h_hat.nrows() {
        return Err(Error::Dimension(format!(
            "data block is {:?}, estimate has {} rows",
            r.shape(),
            estimate.h_hat.nrows()
        )));
    }
    Ok(estimate.h_hat.adjoint() * r.column(0))
}

/// SINR terms of every user for one channel realization.
///
/// `h_hat` is the estimate used by the combiner and `error = H - h_hat`.
pub fn realization_breakdowns(h_hat: &CMatrix, error: &CMatrix, rho_d: f64) -> Vec<RateBreakdown> {
    let k = h_hat.ncols();
    let a2 = gain_sq(k, rho_d);
    let gram = h_hat.adjoint() * h_hat;
    let cross = h_hat.adjoint() * error;
    (0..k)
        .map(|u| {
            let own = gram[(u, u)].re;
            let ui: f64 = (0..k).filter(|&i| i != u).map(|i| gram[(u, i)].norm_sqr()).sum();
            let ee: f64 = (0..k).map(|i| cross[(u, i)].norm_sqr()).sum();
            RateBreakdown::new(
                rho_d * a2 * own * own,
                rho_d * a2 * ui,
                rho_d * a2 * ee,
                a2 * own,
                QUANT_NOISE_VAR * own,
            )
        })
        .collect()
}

/// Which channel the combiner uses in the Monte Carlo rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CsiMode {
    #[default]
    Estimated,
    /// Combiner uses the true channel; estimation error is zero.
    Perfect,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateResult {
    /// Per-user rate in bits/channel-use, averaged over trials.
    pub per_user: Vec<f64>,
    pub mean: f64,
    pub trials: usize,
    /// Standard error of `mean`, from the spread of per-trial user averages.
    pub std_err: f64,
}

impl RateResult {
    pub fn sum_rate(&self) -> f64 {
        self.per_user.iter().sum()
    }
}

pub fn ergodic_rate_mc(config: &SystemConfig, trials: usize) -> Result<RateResult> {
    ergodic_rate_mc_with(config, trials, CsiMode::Estimated)
}

pub fn ergodic_rate_mc_with(config: &SystemConfig, trials: usize, csi: CsiMode) -> Result<RateResult> {
    config.validate()?;
    if trials == 0 {
        return Err(Error::Config("trials must be >= 1".into()));
    }
    let pilots = config.pilots()?;
    let estimator = LmmseEstimator::new(&pilots, config.rho_p)?;

    let per_trial: Vec<Vec<f64>> = (0..trials as u64)
        .into_par_iter()
        .map(|t| -> Result<Vec<f64>> {
            let mut rng = trial_rng(config.seed, t);
            let channel = ChannelSample::draw(config.m, config.k, &mut rng);
            let (h_hat, error) = match csi {
                CsiMode::Estimated => {
                    let r_p = simulate_training(config, &channel, &pilots, &mut rng)?;
                    let h_hat = estimator.estimate(&r_p)?.h_hat;
                    let error = &channel.h - &h_hat;
                    (h_hat, error)
                }
                CsiMode::Perfect => (channel.h.clone(), CMatrix::zeros(config.m, config.k)),
            };
            Ok(realization_breakdowns(&h_hat, &error, config.rho_d)
                .iter()
                .map(|b| b.rate_bits)
                .collect())
        })
        .collect::<Result<_>>()?;

    let per_user: Vec<f64> = (0..config.k)
        .map(|u| {
            let col: Vec<f64> = per_trial.iter().map(|r| r[u]).collect();
            pairwise_sum(&col) / trials as f64
        })
        .collect();
    let user_avg: Vec<f64> = per_trial.iter().map(|r| pairwise_sum(r) / config.k as f64).collect();
    let (mean, std_err) = mean_and_stderr(&user_avg);
    Ok(RateResult { per_user, mean, trials, std_err })
}

fn check_eta_sq(eta_sq: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&eta_sq) {
        return Err(Error::Domain(format!("eta^2 must lie in [0, 1], got {eta_sq}")));
    }
    Ok(())
}

/// Gaussian-model averages of the SINR terms for one user.
pub fn closed_form_breakdown(m: usize, k: usize, rho_d: f64, eta_sq: f64) -> Result<RateBreakdown> {
    check_eta_sq(eta_sq)?;
    if !(rho_d >= 0.0) || !rho_d.is_finite() {
        return Err(Error::Domain(format!("rho_d must be finite and >= 0, got {rho_d}")));
    }
    let a2 = gain_sq(k, rho_d);
    let m = m as f64;
    let power = eta_sq * m;
    Ok(RateBreakdown::new(
        rho_d * a2 * eta_sq * eta_sq * (m * m + m),
        rho_d * a2 * (k as f64 - 1.0) * power,
        rho_d * a2 * eta_sq * (1.0 - eta_sq) * m,
        a2 * power,
        QUANT_NOISE_VAR * power,
    ))
}

/// Low-SNR closed-form per-user rate,
/// `log2(1 + rho_d a^2 eta^2 (M+1) / (rho_d a^2 (K - eta^2) + a^2 + 1 - 2/pi))`.
pub fn closed_form_rate(m: usize, k: usize, rho_d: f64, eta_sq: f64) -> Result<f64> {
    check_eta_sq(eta_sq)?;
    if !(rho_d >= 0.0) || !rho_d.is_finite() {
        return Err(Error::Domain(format!("rho_d must be finite and >= 0, got {rho_d}")));
    }
    Ok(closed_form_rate_unchecked(m, k, rho_d, eta_sq))
}

#[inline]
pub(crate) fn closed_form_rate_unchecked(m: usize, k: usize, rho_d: f64, eta_sq: f64) -> f64 {
    let a2 = gain_sq(k, rho_d);
    let num = rho_d * a2 * eta_sq * (m as f64 + 1.0);
    if num == 0.0 {
        return 0.0;
    }
    let den = rho_d * a2 * (k as f64 - eta_sq) + a2 + QUANT_NOISE_VAR;
    (num / den).ln_1p() / std::f64::consts::LN_2
}

/// Estimate variance of unquantized LMMSE training, `tau rho_p / (1 + tau rho_p)`.
pub fn conventional_eta_sq(tau: f64, rho_p: f64) -> f64 {
    let e = tau * rho_p;
    if e == 0.0 {
        0.0
    } else {
        e / (1.0 + e)
    }
}

/// Infinite-resolution baseline with the same structure as
/// [`closed_form_rate`]: `alpha_d -> 1`, no quantization noise.
pub fn conventional_rate(m: usize, k: usize, rho_d: f64, tau: usize, rho_p: f64) -> f64 {
    conventional_rate_from_eta(m, k, rho_d, conventional_eta_sq(tau as f64, rho_p))
}

#[inline]
pub(crate) fn conventional_rate_from_eta(m: usize, k: usize, rho_d: f64, eta_sq: f64) -> f64 {
    let num = rho_d * eta_sq * (m as f64 + 1.0);
    if num == 0.0 {
        return 0.0;
    }
    let den = rho_d * (k as f64 - eta_sq) + 1.0;
    (num / den).ln_1p() / std::f64::consts::LN_2
}

/// One simulated channel moment against its Gaussian-model prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentCheck {
    pub name: String,
    pub simulated: f64,
    pub std_err: f64,
    pub predicted: f64,
}

impl MomentCheck {
    pub fn rel_err(&self) -> f64 {
        if self.predicted == 0.0 {
            self.simulated.abs()
        } else {
            (self.simulated - self.predicted).abs() / self.predicted.abs()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub eta_sq: f64,
    pub alpha_d_sq: f64,
    pub trials: usize,
    pub moments: Vec<MomentCheck>,
}

impl MomentReport {
    pub fn get(&self, name: &str) -> Option<&MomentCheck> {
        self.moments.iter().find(|m| m.name == name)
    }
}

pub const MOMENT_ESTIMATE_POWER: &str = "estimate_power";
pub const MOMENT_CROSS_CHANNEL: &str = "cross_channel";
pub const MOMENT_ERROR_TERM: &str = "error_term";
pub const MOMENT_SIGNAL_TERM: &str = "signal_term";

/// Simulates `E{||h_k||^2}`, `E{|h_k^H h_i|^2}` (`i != k`),
/// `E{|h_k^H A_d e_k|^2}` and `E{|h_k^H A_d h_k|^2}` (hats on the estimates)
/// and pairs each with its Gaussian-model value.
pub fn appendix_moments_mc(config: &SystemConfig, trials: usize) -> Result<MomentReport> {
    config.validate()?;
    if trials < 1000 {
        return Err(Error::Config(format!("moment check needs at least 1000 trials, got {trials}")));
    }
    let pilots = config.pilots()?;
    let estimator = LmmseEstimator::new(&pilots, config.rho_p)?;
    let k = config.k;
    let a2 = gain_sq(k, config.rho_d);

    let per_trial: Vec<[f64; 4]> = (0..trials as u64)
        .into_par_iter()
        .map(|t| -> Result<[f64; 4]> {
            let mut rng = trial_rng(config.seed, t);
            let channel = ChannelSample::draw(config.m, k, &mut rng);
            let r_p = simulate_training(config, &channel, &pilots, &mut rng)?;
            let h_hat = estimator.estimate(&r_p)?.h_hat;
            let error = &channel.h - &h_hat;
            let gram = h_hat.adjoint() * &h_hat;
            let to_truth = h_hat.adjoint() * &channel.h;
            let to_error = h_hat.adjoint() * &error;
            let mut acc = [0.0; 4];
            let mut cross_pairs = 0usize;
            for u in 0..k {
                let own = gram[(u, u)].re;
                acc[0] += own;
                for i in (0..k).filter(|&i| i != u) {
                    acc[1] += to_truth[(u, i)].norm_sqr();
                    cross_pairs += 1;
                }
                acc[2] += a2 * to_error[(u, u)].norm_sqr();
                acc[3] += a2 * own * own;
            }
            acc[0] /= k as f64;
            acc[1] = if cross_pairs > 0 { acc[1] / cross_pairs as f64 } else { f64::NAN };
            acc[2] /= k as f64;
            acc[3] /= k as f64;
            Ok(acc)
        })
        .collect::<Result<_>>()?;

    let eta = estimator.eta_sq();
    let m = config.m as f64;
    let predictions = [
        (MOMENT_ESTIMATE_POWER, eta * m),
        (MOMENT_CROSS_CHANNEL, eta * m),
        (MOMENT_ERROR_TERM, a2 * eta * (1.0 - eta) * m),
        (MOMENT_SIGNAL_TERM, a2 * eta * eta * (m * m + m)),
    ];
    let moments = predictions
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != 1 || k > 1)
        .map(|(i, &(name, predicted))| {
            let col: Vec<f64> = per_trial.iter().map(|v| v[i]).collect();
            let (simulated, std_err) = mean_and_stderr(&col);
            MomentCheck { name: name.to_string(), simulated, std_err, predicted }
        })
        .collect();
    Ok(MomentReport { eta_sq: eta, alpha_d_sq: a2, trials, moments })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bussgang::estimate_quality;
    use crate::system::simulate_data_slot;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn breakdown_rate_definition() {
        let b = RateBreakdown::new(3.0, 0.5, 0.25, 0.125, 0.125);
        assert_relative_eq!(b.rate_bits, 2.0, epsilon = 1e-15);
        let z = RateBreakdown::new(0.0, 0.0, 0.0, 0.0, 0.0);
        assert_eq!(z.rate_bits, 0.0);
    }

    #[test]
    fn mrc_trivial_cases() {
        let r = crate::system::quantize_one_bit(&CMatrix::from_element(1, 1, C64::new(1.0, 1.0)));
        let est = ChannelEstimate { h_hat: CMatrix::from_element(1, 1, C64::new(1.0, 0.0)), error: None };
        let s = mrc_detect(&est, &r).unwrap();
        assert!((s[0] - C64::new(1.0, 1.0) / 2f64.sqrt()).norm() < 1e-15);

        let r4 = crate::system::quantize_one_bit(&CMatrix::from_element(4, 1, C64::new(-1.0, 1.0)));
        let zero = ChannelEstimate { h_hat: CMatrix::zeros(4, 3), error: None };
        assert!(mrc_detect(&zero, &r4).unwrap().iter().all(|z| *z == C64::from(0.0)));
        assert!(mrc_detect(&est, &r4).is_err());
    }

    #[test]
    fn mrc_recovers_bpsk() {
        // K=1, M=64, rho_d=1, estimate from tau=16 pilots at rho_p=1
        let cfg = SystemConfig::new(64, 1, 200, 16, 1.0, 1.0, 4).unwrap();
        let pilots = cfg.pilots().unwrap();
        let est = LmmseEstimator::new(&pilots, cfg.rho_p).unwrap();
        let slots = 10_000u64;
        let mut errors = 0;
        for t in 0..slots {
            let mut rng = trial_rng(cfg.seed, t);
            let ch = ChannelSample::draw(cfg.m, cfg.k, &mut rng);
            let r_p = simulate_training(&cfg, &ch, &pilots, &mut rng).unwrap();
            let e = est.estimate(&r_p).unwrap();
            let bit = rand::Rng::random::<bool>(&mut rng);
            let sym = DVector::from_element(1, C64::from(if bit { 1.0 } else { -1.0 }));
            let r_d = simulate_data_slot(&cfg, &ch, &sym, &mut rng).unwrap();
            let s_hat = mrc_detect(&e, &r_d).unwrap();
            if (s_hat[0].re >= 0.0) != bit {
                errors += 1;
            }
        }
        assert!((errors as f64) / (slots as f64) < 1e-3, "errors={errors}");
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(closed_form_rate(128, 8, 0.1, 0.0).unwrap(), 0.0);
        assert_eq!(closed_form_rate(128, 8, 0.0, 0.5).unwrap(), 0.0);
        // independent scalar evaluation
        let (m, k, rho, eta) = (128.0, 8.0, 0.1, 0.28294);
        let a2 = (2.0 / PI) / (k * rho + 1.0);
        let num = rho * a2 * eta * (m + 1.0);
        let den = rho * a2 * (k - eta) + a2 + 1.0 - 2.0 / PI;
        assert!((num - 1.2909).abs() < 1e-4 && (den - 0.9900).abs() < 1e-4);
        let oracle = (1.0 + num / den).log2();
        assert_relative_eq!(closed_form_rate(128, 8, 0.1, eta).unwrap(), oracle, epsilon = 1e-13);
        assert!((oracle - 1.204).abs() < 5e-4);
        assert!(closed_form_rate(128, 8, 0.1, 1.2).is_err());
        assert!(closed_form_rate(128, 8, -0.1, 0.2).is_err());
    }

    #[test]
    fn closed_form_is_breakdown_of_gaussian_moments() {
        for &(m, k, rho, eta) in &[(128, 8, 0.1, 0.28), (32, 4, 1.0, 0.7), (64, 1, 0.01, 0.05)] {
            let b = closed_form_breakdown(m, k, rho, eta).unwrap();
            assert_relative_eq!(b.rate_bits, closed_form_rate(m, k, rho, eta).unwrap(), max_relative = 1e-12);
        }
    }

    #[test]
    fn closed_form_monotonicity() {
        for &rho in &[0.01, 0.1, 1.0] {
            for eta_i in 1..10 {
                let eta = eta_i as f64 / 10.0;
                let mut prev = 0.0;
                for m in (8..256).step_by(8) {
                    let r = closed_form_rate(m, 8, rho, eta).unwrap();
                    assert!(r > prev);
                    prev = r;
                }
                let mut prev = f64::INFINITY;
                for k in 1..32 {
                    let r = closed_form_rate(64, k, rho, eta).unwrap();
                    assert!(r < prev);
                    prev = r;
                }
            }
            let mut prev = 0.0;
            for eta_i in 1..=100 {
                let r = closed_form_rate(64, 8, rho, eta_i as f64 / 100.0).unwrap();
                assert!(r > prev);
                prev = r;
            }
        }
    }

    #[test]
    fn denominator_limit_at_low_snr() {
        let a2 = gain_sq(8, 1e-9);
        assert!((a2 + QUANT_NOISE_VAR - 1.0).abs() < 1e-8);
        let a2 = gain_sq(8, 0.0);
        assert!((a2 + QUANT_NOISE_VAR - 1.0).abs() < 1e-15);
    }

    #[test]
    fn conventional_examples() {
        assert_eq!(conventional_rate(128, 8, 0.1, 8, 0.0), 0.0);
        let eta: f64 = 0.8 / 1.8;
        let oracle = (1.0 + 0.1 * eta * 129.0 / (0.1 * (8.0 - eta) + 1.0)).log2();
        assert_relative_eq!(conventional_rate(128, 8, 0.1, 8, 0.1), oracle, epsilon = 1e-13);
        assert!((oracle - 2.09).abs() < 5e-3);
    }

    #[test]
    fn zero_data_power_gives_zero_rate() {
        let cfg = SystemConfig::new(8, 2, 20, 2, 0.1, 0.0, 1).unwrap();
        let r = ergodic_rate_mc(&cfg, 50).unwrap();
        assert!(r.per_user.iter().all(|&v| v == 0.0));
        assert_eq!(r.mean, 0.0);
        let cfg = SystemConfig::new(8, 2, 20, 2, 0.0, 0.1, 1).unwrap();
        assert_eq!(ergodic_rate_mc(&cfg, 50).unwrap().mean, 0.0);
        assert!(ergodic_rate_mc(&cfg, 0).is_err());
    }

    #[test]
    fn rate_result_mean_and_stderr_scaling() {
        let cfg = SystemConfig::new(16, 4, 100, 8, 0.2, 0.2, 9).unwrap();
        let small = ergodic_rate_mc(&cfg, 400).unwrap();
        let large = ergodic_rate_mc(&cfg, 6400).unwrap();
        assert_relative_eq!(small.mean, small.per_user.iter().sum::<f64>() / 4.0, max_relative = 1e-12);
        let ratio = small.std_err / large.std_err;
        // 16x the trials -> 4x smaller error; sampling noise on the ratio is ~5%
        assert!((ratio - 4.0).abs() < 0.6, "ratio={ratio}");
    }

    #[test]
    fn perfect_csi_dominates() {
        for &(m, k, tau, rho) in &[(16, 4, 4, 0.1), (32, 8, 16, 0.3), (8, 2, 2, 1.0)] {
            let cfg = SystemConfig::new(m, k, 100, tau, rho, rho, 5).unwrap();
            let est = ergodic_rate_mc_with(&cfg, 500, CsiMode::Estimated).unwrap();
            let perfect = ergodic_rate_mc_with(&cfg, 500, CsiMode::Perfect).unwrap();
            assert!(perfect.mean + 3.0 * perfect.std_err > est.mean - 3.0 * est.std_err);
            assert!(perfect.mean > est.mean);
        }
    }

    #[test]
    fn mc_matches_literal_reimplementation() {
        // Literal per-user SINR terms with explicit loops, no Gram matrices.
        let cfg = SystemConfig::new(8, 2, 20, 2, 0.1, 0.1, 21).unwrap();
        let trials = 100_000;
        let fast = ergodic_rate_mc(&cfg, trials).unwrap();

        let pilots = cfg.pilots().unwrap();
        let est = LmmseEstimator::new(&pilots, cfg.rho_p).unwrap();
        let alpha_d = crate::bussgang::bussgang_gain(cfg.k, cfg.rho_d).unwrap().value();
        let inner = |a: &CMatrix, i: usize, b: &CMatrix, j: usize| -> C64 {
            (0..a.nrows()).map(|row| a[(row, i)].conj() * b[(row, j)]).sum()
        };
        let mut rates = Vec::with_capacity(trials);
        for t in 0..trials as u64 {
            let mut rng = trial_rng(1_000_003, t);
            let ch = ChannelSample::draw(cfg.m, cfg.k, &mut rng);
            let r_p = simulate_training(&cfg, &ch, &pilots, &mut rng).unwrap();
            let hh = est.estimate(&r_p).unwrap().h_hat;
            let eps = &ch.h - &hh;
            let mut sum = 0.0;
            for u in 0..cfg.k {
                let sig = cfg.rho_d * (inner(&hh, u, &hh, u) * alpha_d).norm_sqr();
                let mut den = 0.0;
                for i in 0..cfg.k {
                    if i != u {
                        den += cfg.rho_d * (inner(&hh, u, &hh, i) * alpha_d).norm_sqr();
                    }
                    den += cfg.rho_d * (inner(&hh, u, &eps, i) * alpha_d).norm_sqr();
                }
                let norm = inner(&hh, u, &hh, u).re;
                den += alpha_d * alpha_d * norm + (1.0 - 2.0 / PI) * norm;
                // an all-zero estimate column carries no signal
                if sig > 0.0 {
                    sum += (1.0 + sig / den).log2();
                }
            }
            rates.push(sum / cfg.k as f64);
        }
        let (mean, se) = mean_and_stderr(&rates);
        let tol = 3.0 * (se * se + fast.std_err * fast.std_err).sqrt();
        assert!((mean - fast.mean).abs() < tol, "literal={mean} fast={} tol={tol}", fast.mean);
    }

    #[test]
    fn moments_zero_pilot_power() {
        let cfg = SystemConfig::new(16, 4, 50, 4, 0.0, 0.1, 2).unwrap();
        let rep = appendix_moments_mc(&cfg, 1000).unwrap();
        for m in &rep.moments {
            assert_eq!(m.simulated, 0.0, "{}", m.name);
            assert_eq!(m.predicted, 0.0);
        }
        assert!(appendix_moments_mc(&cfg, 999).is_err());
    }

    #[test]
    fn moment_checks_single_user_skip_cross_term() {
        let cfg = SystemConfig::new(16, 1, 50, 4, 0.2, 0.1, 2).unwrap();
        let rep = appendix_moments_mc(&cfg, 1000).unwrap();
        assert!(rep.get(MOMENT_CROSS_CHANNEL).is_none());
        assert_eq!(rep.moments.len(), 3);
        let q = estimate_quality(&cfg.pilots().unwrap(), 0.2, 16).unwrap();
        assert_relative_eq!(rep.eta_sq, q.eta_sq, epsilon = 1e-15);
    }
}
