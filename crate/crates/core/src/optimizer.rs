//! Sum spectral efficiency and training-length optimization.
//!
//! Case I splits a per-user energy budget `P = rho T` between training
//! (`gamma P = tau rho_p`) and data (`(1 - gamma) P = (T - tau) rho_d`) and
//! optimizes `(tau, gamma)` jointly. Case II fixes `rho_p = rho_d = rho` and
//! optimizes `tau` alone. `tau` is scanned over the integers `K..T-1`; the
//! inner search over `gamma` is a golden-section search guarded by a dense
//! grid check.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bussgang::low_snr_quality;
use crate::rate::{closed_form_rate_unchecked, conventional_eta_sq, conventional_rate_from_eta};
use crate::{Error, Result};

/// Tolerance on `gamma` for the golden-section search.
pub const GAMMA_TOL: f64 = 1e-8;
/// Interior points of the grid used to check unimodality in `gamma`.
pub const GAMMA_GRID: usize = 1000;

/// `((T - tau) / T) sum_k R_k`.
pub fn sum_spectral_efficiency(per_user_rates: &[f64], tau: usize, t: usize) -> Result<f64> {
    let k = per_user_rates.len();
    if k == 0 || k > tau || tau > t {
        return Err(Error::Domain(format!("need 1 <= K <= tau <= T, got K={k} tau={tau} T={t}")));
    }
    Ok((t - tau) as f64 / t as f64 * per_user_rates.iter().sum::<f64>())
}

/// Low-SNR sum spectral efficiency with the estimate variance replaced by
/// its closed-form surrogate.
pub fn low_snr_se(m: usize, k: usize, t: usize, tau: usize, rho_p: f64, rho_d: f64) -> f64 {
    if tau >= t {
        return 0.0;
    }
    let sigma_sq = low_snr_quality(tau, rho_p, k);
    (t - tau) as f64 * k as f64 / t as f64 * closed_form_rate_unchecked(m, k, rho_d, sigma_sq)
}

/// Per-user energy over one coherence interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBudget {
    pub t: usize,
    pub p: f64,
}

impl EnergyBudget {
    pub fn new(t: usize, p: f64) -> Result<Self> {
        if t == 0 || !(p > 0.0) || !p.is_finite() {
            return Err(Error::Domain(format!("need T >= 1 and finite P > 0, got T={t} P={p}")));
        }
        Ok(Self { t, p })
    }

    /// Budget for average power `rho`, `P = rho T`.
    pub fn from_average(t: usize, rho: f64) -> Result<Self> {
        Self::new(t, rho * t as f64)
    }

    pub fn rho(&self) -> f64 {
        self.p / self.t as f64
    }

    /// `(rho_p, rho_d)` for training fraction `gamma` and length `tau`.
    pub fn split(&self, gamma: f64, tau: f64) -> (f64, f64) {
        let t = self.t as f64;
        let rho_d = if tau >= t { 0.0 } else { (1.0 - gamma) * self.p / (t - tau) };
        (gamma * self.p / tau, rho_d)
    }
}

/// Coefficients of `S(gamma, tau) = ((T-tau)K/T) log2(1 + a1 tau / (a2 tau^2 + a3 tau + a4))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeCoefficients {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
}

impl SeCoefficients {
    pub fn new(gamma: f64, m: usize, k: usize, t: usize, p: f64) -> Self {
        let (m, k, t) = (m as f64, k as f64, t as f64);
        let g = gamma;
        let gg = g - g * g;
        let pi2 = PI * PI;
        Self {
            a1: 4.0 * (m + 1.0) * gg * p * p,
            // the tau^2 coefficient is negative: it comes from the -pi tau
            // part of the data-phase normalization
            a2: -(pi2 + 2.0 * p * PI * g),
            a3: 4.0 * p * p * (g - 1.0) * g
                + k * p * PI * (PI - 2.0 * PI * g + 2.0 * g * (1.0 + p - p * g))
                + pi2 * t
                + 2.0 * p * PI * g * t,
            a4: k * k * p * p * (pi2 - 2.0 * PI) * gg + k * p * (pi2 - 2.0 * PI) * g * t,
        }
    }

    /// The SINR `a1 tau / (a2 tau^2 + a3 tau + a4)`.
    pub fn sinr(&self, tau: f64) -> f64 {
        let num = self.a1 * tau;
        if num == 0.0 {
            return 0.0;
        }
        num / ((self.a2 * tau + self.a3) * tau + self.a4)
    }

    /// `a1 >= 0` holds for every `gamma` in `[0, 1]`.
    pub fn a1_nonnegative(&self) -> bool {
        self.a1 >= 0.0
    }
}

fn se_gamma_tau_unchecked(gamma: f64, tau: f64, m: usize, k: usize, t: usize, p: f64) -> f64 {
    if tau >= t as f64 {
        return 0.0;
    }
    let sinr = SeCoefficients::new(gamma, m, k, t, p).sinr(tau);
    (t as f64 - tau) * k as f64 / t as f64 * sinr.ln_1p() / std::f64::consts::LN_2
}

/// Low-SNR sum spectral efficiency as a function of the training energy
/// fraction `gamma` and training length `tau`.
pub fn se_gamma_tau(gamma: f64, tau: f64, m: usize, k: usize, t: usize, p: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::Domain(format!("gamma must lie in (0, 1), got {gamma}")));
    }
    if !(tau >= k as f64 && tau <= t as f64) {
        return Err(Error::Domain(format!("need K <= tau <= T, got K={k} tau={tau} T={t}")));
    }
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::Domain(format!("P must be finite and > 0, got {p}")));
    }
    Ok(se_gamma_tau_unchecked(gamma, tau, m, k, t, p))
}

/// A sum-spectral-efficiency model that can be optimized over `tau` and the
/// power split.
pub trait SumSeModel: Sync {
    fn users(&self) -> usize;

    /// Sum SE at training length `tau` with powers `rho_p`, `rho_d`.
    fn sum_se(&self, t: usize, tau: usize, rho_p: f64, rho_d: f64) -> f64;

    /// Sum SE with the power split given by `gamma` of budget `p`.
    fn sum_se_split(&self, t: usize, tau: usize, gamma: f64, p: f64) -> f64 {
        let (rho_p, rho_d) = EnergyBudget { t, p }.split(gamma, tau as f64);
        self.sum_se(t, tau, rho_p, rho_d)
    }
}

/// One-bit receiver with the low-SNR rate approximation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OneBitModel {
    pub m: usize,
    pub k: usize,
}

impl SumSeModel for OneBitModel {
    fn users(&self) -> usize {
        self.k
    }

    fn sum_se(&self, t: usize, tau: usize, rho_p: f64, rho_d: f64) -> f64 {
        low_snr_se(self.m, self.k, t, tau, rho_p, rho_d)
    }

    fn sum_se_split(&self, t: usize, tau: usize, gamma: f64, p: f64) -> f64 {
        se_gamma_tau_unchecked(gamma, tau as f64, self.m, self.k, t, p)
    }
}

/// Infinite-resolution baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConventionalModel {
    pub m: usize,
    pub k: usize,
}

impl SumSeModel for ConventionalModel {
    fn users(&self) -> usize {
        self.k
    }

    fn sum_se(&self, t: usize, tau: usize, rho_p: f64, rho_d: f64) -> f64 {
        if tau >= t {
            return 0.0;
        }
        let eta = conventional_eta_sq(tau as f64, rho_p);
        (t - tau) as f64 * self.k as f64 / t as f64 * conventional_rate_from_eta(self.m, self.k, rho_d, eta)
    }
}

/// Golden-section search for the maximum of `f` on `[lo, hi]`.
pub fn golden_section_max<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    // keep the best point seen in the final bracket
    [(x, fx), (c, fc), (d, fd)]
        .into_iter()
        .fold((x, fx), |best, cand| if cand.1 > best.1 { cand } else { best })
}

/// Number of strict local maxima of a sampled sequence, plateaus counted once.
fn count_local_maxima(values: &[f64]) -> usize {
    let mut count = 0;
    let mut rising = true;
    for w in values.windows(2) {
        if w[1] > w[0] {
            rising = true;
        } else if w[1] < w[0] {
            if rising {
                count += 1;
            }
            rising = false;
        }
    }
    if rising && values.len() > 1 {
        count += 1;
    }
    count
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub tau: usize,
    /// Best training fraction at this `tau` (Case I only).
    pub gamma: Option<f64>,
    pub se: f64,
    /// The `gamma` grid showed a single local maximum (Case I only).
    pub unimodal: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub tau_star: usize,
    pub gamma_star: Option<f64>,
    pub se_star: f64,
    pub trace: Vec<TracePoint>,
}

impl OptimizationResult {
    fn from_trace(trace: Vec<TracePoint>) -> Self {
        // ascending scan with strict improvement: ties go to the smallest tau
        let mut best = trace[0];
        for p in &trace[1..] {
            if p.se > best.se {
                best = *p;
            }
        }
        Self { tau_star: best.tau, gamma_star: best.gamma, se_star: best.se, trace }
    }
}

fn check_bounds(k: usize, t: usize) -> Result<()> {
    if k == 0 || t <= k {
        return Err(Error::Domain(format!(
            "no feasible training length: need 1 <= K < T, got K={k} T={t}"
        )));
    }
    Ok(())
}

/// Best `gamma` at fixed `tau`: golden section, checked against a dense grid.
fn best_gamma<M: SumSeModel + ?Sized>(model: &M, t: usize, tau: usize, p: f64) -> TracePoint {
    let f = |g: f64| model.sum_se_split(t, tau, g, p);
    let (mut gamma, mut se) = golden_section_max(f, 0.0, 1.0, GAMMA_TOL);

    let step = 1.0 / (GAMMA_GRID + 1) as f64;
    let grid: Vec<f64> = (1..=GAMMA_GRID).map(|i| f(i as f64 * step)).collect();
    let unimodal = count_local_maxima(&grid) <= 1;
    let (i_max, grid_max) = grid
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, v)| if v > best.1 { (i, v) } else { best });
    if !unimodal || grid_max > se {
        // restart inside the grid cell pair around the best sample
        let lo = i_max as f64 * step;
        let hi = (i_max + 2) as f64 * step;
        let (g, s) = golden_section_max(f, lo, hi, GAMMA_TOL);
        if s > se {
            gamma = g;
            se = s;
        }
    }
    TracePoint { tau, gamma: Some(gamma), se, unimodal }
}

/// Joint optimization of training length and power split under budget `p`.
pub fn optimize_case1<M: SumSeModel + ?Sized>(model: &M, t: usize, p: f64) -> Result<OptimizationResult> {
    let k = model.users();
    check_bounds(k, t)?;
    EnergyBudget::new(t, p)?;
    let trace: Vec<TracePoint> = (k..t).into_par_iter().map(|tau| best_gamma(model, t, tau, p)).collect();
    Ok(OptimizationResult::from_trace(trace))
}

/// Training length with equal training and data power `rho`.
pub fn optimize_case2<M: SumSeModel + ?Sized>(model: &M, t: usize, rho: f64) -> Result<OptimizationResult> {
    let k = model.users();
    check_bounds(k, t)?;
    if !(rho >= 0.0) || !rho.is_finite() {
        return Err(Error::Domain(format!("rho must be finite and >= 0, got {rho}")));
    }
    let trace: Vec<TracePoint> = (k..t)
        .map(|tau| TracePoint { tau, gamma: None, se: model.sum_se(t, tau, rho, rho), unimodal: true })
        .collect();
    Ok(OptimizationResult::from_trace(trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rate::closed_form_rate;
    use approx::assert_relative_eq;

    #[test]
    fn sum_se_examples() {
        assert_eq!(sum_spectral_efficiency(&[1.0; 8], 200, 200).unwrap(), 0.0);
        assert_eq!(sum_spectral_efficiency(&[1.0; 8], 100, 200).unwrap(), 4.0);
        assert!(sum_spectral_efficiency(&[1.0; 8], 7, 200).is_err());
        assert!(sum_spectral_efficiency(&[1.0; 8], 201, 200).is_err());
        assert!(sum_spectral_efficiency(&[], 1, 200).is_err());
    }

    #[test]
    fn sum_se_closed_form_pipeline() {
        let eta = low_snr_quality(16, 0.1, 8);
        let r = closed_form_rate(128, 8, 0.1, eta).unwrap();
        let s = sum_spectral_efficiency(&[r; 8], 16, 200).unwrap();
        assert_relative_eq!(s, 184.0 / 200.0 * 8.0 * r, max_relative = 1e-15);
        assert_relative_eq!(s, low_snr_se(128, 8, 200, 16, 0.1, 0.1), max_relative = 1e-14);
    }

    #[test]
    fn low_snr_se_examples() {
        assert_eq!(low_snr_se(128, 8, 200, 8, 0.0, 0.1), 0.0);
        assert_eq!(low_snr_se(128, 8, 200, 200, 0.1, 0.1), 0.0);
        let s = low_snr_se(128, 8, 200, 8, 0.1, 0.1);
        let oracle = 192.0 / 200.0 * 8.0 * closed_form_rate(128, 8, 0.1, 0.28294).unwrap();
        assert!((s - oracle).abs() < 1e-3, "{s} vs {oracle}");
        assert!((s - 9.25).abs() < 0.01);
    }

    #[test]
    fn energy_budget_split() {
        let b = EnergyBudget::from_average(200, 0.1).unwrap();
        assert_eq!(b.p, 0.1 * 200.0);
        assert_relative_eq!(b.rho(), 0.1, epsilon = 1e-15);
        let (rp, rd) = b.split(0.5, 20.0);
        assert_relative_eq!(rp, 0.5, epsilon = 1e-15);
        assert_relative_eq!(rd, 10.0 / 180.0, epsilon = 1e-15);
        assert_relative_eq!(20.0 * rp + 180.0 * rd, b.p, epsilon = 1e-12);
        assert!(EnergyBudget::new(200, 0.0).is_err());
    }

    #[test]
    fn rational_form_example() {
        let s = se_gamma_tau(0.5, 20.0, 128, 8, 200, 20.0).unwrap();
        let direct = low_snr_se(128, 8, 200, 20, 0.5, 10.0 / 180.0);
        assert_relative_eq!(s, direct, max_relative = 1e-9);
    }

    #[test]
    fn rational_form_boundaries() {
        for &tau in &[8.0, 20.0, 100.0] {
            assert!(se_gamma_tau(1e-12, tau, 128, 8, 200, 20.0).unwrap() < 1e-6);
            assert!(se_gamma_tau(1.0 - 1e-12, tau, 128, 8, 200, 20.0).unwrap() < 1e-6);
        }
        assert_eq!(se_gamma_tau(0.5, 200.0, 128, 8, 200, 20.0).unwrap(), 0.0);
        assert!(se_gamma_tau(0.5, 199.999, 128, 8, 200, 20.0).unwrap() < 1e-3);
        assert!(se_gamma_tau(0.0, 20.0, 128, 8, 200, 20.0).is_err());
        assert!(se_gamma_tau(1.0, 20.0, 128, 8, 200, 20.0).is_err());
        assert!(se_gamma_tau(0.5, 7.0, 128, 8, 200, 20.0).is_err());
        assert!(se_gamma_tau(0.5, 201.0, 128, 8, 200, 20.0).is_err());
    }

    #[test]
    fn coefficients_a1_sign() {
        for i in 0..=100 {
            let g = i as f64 / 100.0;
            let c = SeCoefficients::new(g, 128, 8, 200, 20.0);
            assert!(c.a1_nonnegative());
            if i == 0 || i == 100 {
                assert_eq!(c.a1, 0.0);
            }
        }
    }

    #[test]
    fn golden_section_finds_parabola_peak() {
        let (x, fx) = golden_section_max(|x| -(x - 0.3137).powi(2), 0.0, 1.0, 1e-10);
        assert!((x - 0.3137).abs() < 1e-8);
        assert!(fx <= 0.0 && fx > -1e-15);
    }

    #[test]
    fn local_maxima_counting() {
        assert_eq!(count_local_maxima(&[0.0, 1.0, 2.0, 1.0, 0.0]), 1);
        assert_eq!(count_local_maxima(&[0.0, 1.0, 1.0, 0.0]), 1);
        assert_eq!(count_local_maxima(&[0.0, 2.0, 1.0, 3.0, 0.0]), 2);
        assert_eq!(count_local_maxima(&[3.0, 2.0, 1.0]), 1);
        assert_eq!(count_local_maxima(&[1.0, 1.0]), 1);
        assert_eq!(count_local_maxima(&[1.0, 2.0, 3.0]), 1);
    }

    struct Bimodal;

    impl SumSeModel for Bimodal {
        fn users(&self) -> usize {
            1
        }
        fn sum_se(&self, _t: usize, _tau: usize, _rho_p: f64, _rho_d: f64) -> f64 {
            0.0
        }
        fn sum_se_split(&self, _t: usize, tau: usize, gamma: f64, _p: f64) -> f64 {
            // narrow tall peak near 0.9, wide low one near 0.3
            let wide = (-(gamma - 0.3).powi(2) / 0.02).exp();
            let tall = 2.0 * (-(gamma - 0.9).powi(2) / 0.0005).exp();
            (wide + tall) / tau as f64
        }
    }

    #[test]
    fn non_unimodal_gamma_falls_back_to_grid() {
        let r = optimize_case1(&Bimodal, 4, 1.0).unwrap();
        assert_eq!(r.tau_star, 1);
        assert!((r.gamma_star.unwrap() - 0.9).abs() < 1e-6, "{:?}", r.gamma_star);
        assert!(r.trace.iter().all(|p| !p.unimodal));
    }

    #[test]
    fn case2_forced_and_infeasible() {
        let model = OneBitModel { m: 128, k: 8 };
        let r = optimize_case2(&model, 9, 0.1).unwrap();
        assert_eq!(r.tau_star, 8);
        assert_eq!(r.trace.len(), 1);
        assert!(optimize_case2(&model, 8, 0.1).is_err());
        assert!(optimize_case1(&model, 8, 1.0).is_err());
        assert!(optimize_case1(&model, 100, 0.0).is_err());
    }

    #[test]
    fn case2_matches_exhaustive_scan() {
        let model = OneBitModel { m: 64, k: 4 };
        let r = optimize_case2(&model, 120, 0.05).unwrap();
        let best = (4..120)
            .map(|tau| (tau, low_snr_se(64, 4, 120, tau, 0.05, 0.05)))
            .fold((0, f64::NEG_INFINITY), |b, c| if c.1 > b.1 { c } else { b });
        assert_eq!(r.tau_star, best.0);
        assert_eq!(r.se_star, best.1);
        assert!(r.trace.iter().all(|p| p.se <= r.se_star));
    }

    #[test]
    fn case1_result_dominates_trace() {
        let model = OneBitModel { m: 128, k: 8 };
        let r = optimize_case1(&model, 200, 20.0).unwrap();
        assert!(r.tau_star > 8);
        assert!(r.trace.iter().all(|p| p.se <= r.se_star));
        assert!(r.trace.iter().all(|p| p.unimodal));
        let g = r.gamma_star.unwrap();
        assert!(g > 0.0 && g < 1.0);
    }

    #[test]
    fn case1_matches_exhaustive_grid() {
        // exhaustive oracle over tau and gamma in {0.001, ..., 0.999}
        let (m, k, t) = (128, 8, 200);
        for &rho in &[0.1, 10.0] {
            let p = rho * t as f64;
            let mut best = (0, 0.0, f64::NEG_INFINITY);
            for tau in k..t {
                for i in 1..1000 {
                    let g = i as f64 / 1000.0;
                    let (rp, rd) = EnergyBudget { t, p }.split(g, tau as f64);
                    let s = low_snr_se(m, k, t, tau, rp, rd);
                    if s > best.2 {
                        best = (tau, g, s);
                    }
                }
            }
            let r = optimize_case1(&OneBitModel { m, k }, t, p).unwrap();
            assert!(r.se_star >= best.2 - 1e-9);
            assert!((r.se_star - best.2) / best.2 < 1e-4);
            assert!((r.tau_star as i64 - best.0 as i64).abs() <= 1, "{} vs {}", r.tau_star, best.0);
        }
        let low = optimize_case1(&OneBitModel { m, k }, t, 0.1 * t as f64).unwrap();
        let high = optimize_case1(&OneBitModel { m, k }, t, 10.0 * t as f64).unwrap();
        assert!(high.tau_star < low.tau_star);
        assert!(high.tau_star >= k);
    }
}
