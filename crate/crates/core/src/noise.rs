// Copyright 2026 The spinmem Authors
// SPDX-License-Identifier: Apache-2.0

//! Ornstein-Uhlenbeck noise for detuning and relative Rabi amplitude.
//!
//! Updates are exact for any step length. Free-precession segments also need
//! the accumulated phase `∫δ dt`, which is drawn jointly with the endpoint
//! value from their exact bivariate Gaussian law.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// RNG used for every noise stream.
pub type NoiseRng = ChaCha8Rng;

/// Independent stream `stream` of the master seed.
pub fn stream_rng(master_seed: u64, stream: u64) -> NoiseRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream);
    rng
}

/// Stream id for trajectory `traj` of sweep point `point`.
pub fn stream_id(point: usize, traj: usize) -> u64 {
    ((point as u64) << 32) | (traj as u64 & 0xffff_ffff)
}

/// Stationary OU channel: `⟨x(t)x(t')⟩ = σ² exp(−|t−t'|/τ_c)`.
///
/// `tau_c = ∞` is the quasi-static limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OuParams {
    pub sigma: f64,
    pub tau_c: f64,
}

impl OuParams {
    pub fn new(sigma: f64, tau_c: f64) -> Result<Self> {
        if !(sigma >= 0.0) {
            return Err(Error::invalid(format!("OU sigma must be non-negative, got {sigma}")));
        }
        if !(tau_c > 0.0) {
            return Err(Error::invalid(format!("OU correlation time must be positive, got {tau_c}")));
        }
        Ok(Self { sigma, tau_c })
    }

    pub fn quasi_static(sigma: f64) -> Result<Self> {
        Self::new(sigma, f64::INFINITY)
    }

    pub fn silent() -> Self {
        Self { sigma: 0.0, tau_c: f64::INFINITY }
    }

    /// Diffusion constant `D = 2σ²/τ_c`.
    pub fn diffusion(&self) -> f64 {
        2.0 * self.sigma * self.sigma / self.tau_c
    }

    pub fn is_silent(&self) -> bool {
        self.sigma == 0.0
    }
}

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Exact OU update over `dt`:
/// `x' = x e^{−dt/τ} + n sqrt(σ²(1 − e^{−2dt/τ}))`.
pub fn ou_step<R: Rng + ?Sized>(x: f64, dt: f64, p: &OuParams, rng: &mut R) -> f64 {
    if dt <= 0.0 || p.tau_c.is_infinite() {
        return x;
    }
    let h = dt / p.tau_c;
    let decay = (-h).exp();
    let var = p.sigma * p.sigma * -(-2.0 * h).exp_m1();
    x * decay + normal(rng) * var.sqrt()
}

/// Exact joint update of the OU value and its time integral over `dt`.
///
/// Returns `(x(t+dt), ∫_t^{t+dt} x)`.
pub fn ou_step_integrated<R: Rng + ?Sized>(x: f64, dt: f64, p: &OuParams, rng: &mut R) -> (f64, f64) {
    if dt <= 0.0 {
        return (x, 0.0);
    }
    if p.tau_c.is_infinite() || p.sigma == 0.0 {
        let next = ou_step(x, dt, p, rng);
        return (next, if p.tau_c.is_infinite() { x * dt } else { 0.5 * (x + next) * dt });
    }
    let tau = p.tau_c;
    let s2 = p.sigma * p.sigma;
    let h = dt / tau;
    let one_m_mu = -(-h).exp_m1();
    let one_m_mu2 = -(-2.0 * h).exp_m1();
    // h − 2(1−μ) + (1−μ²)/2, expanded for small h to avoid cancellation
    let bracket = if h < 1e-3 {
        h * h * h * (1.0 / 3.0 - h / 4.0 + 7.0 * h * h / 60.0)
    } else {
        h - 2.0 * one_m_mu + 0.5 * one_m_mu2
    };
    let var_x = s2 * one_m_mu2;
    let var_y = 2.0 * s2 * tau * tau * bracket;
    let cov = s2 * tau * one_m_mu * one_m_mu;

    let n1 = normal(rng);
    let n2 = normal(rng);
    let sd_x = var_x.sqrt();
    let next = x * (1.0 - one_m_mu) + sd_x * n1;
    let cond_var = (var_y - cov * cov / var_x).max(0.0);
    let integral = x * tau * one_m_mu + (cov / sd_x) * n1 + cond_var.sqrt() * n2;
    (next, integral)
}

/// A draw from the stationary law `N(0, σ²)`.
pub fn sample_quasistatic<R: Rng + ?Sized>(p: &OuParams, rng: &mut R) -> f64 {
    if p.sigma == 0.0 {
        return 0.0;
    }
    p.sigma * normal(rng)
}

/// Sampled OU path on a fixed time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseTrajectory {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub seed: u64,
}

impl NoiseTrajectory {
    /// Starts from a stationary draw and steps exactly between grid points.
    pub fn generate(p: &OuParams, times: &[f64], seed: u64, stream: u64) -> Result<Self> {
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("trajectory times must be strictly increasing"));
        }
        let mut rng = stream_rng(seed, stream);
        let mut values = Vec::with_capacity(times.len());
        let mut x = sample_quasistatic(p, &mut rng);
        let mut last = times.first().copied().unwrap_or(0.0);
        for &t in times {
            x = ou_step(x, t - last, p, &mut rng);
            values.push(x);
            last = t;
        }
        Ok(Self { times: times.to_vec(), values, seed })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::mean_and_variance;

    fn params() -> OuParams {
        OuParams::new(2.0, 0.5).unwrap()
    }

    #[test]
    fn zero_step_is_identity() {
        let mut rng = stream_rng(1, 0);
        assert_eq!(ou_step(0.37, 0.0, &params(), &mut rng), 0.37);
        assert_eq!(ou_step_integrated(0.37, 0.0, &params(), &mut rng), (0.37, 0.0));
    }

    #[test]
    fn long_step_reaches_stationary_law() {
        let p = params();
        let mut rng = stream_rng(2, 0);
        let draws: Vec<f64> = (0..100_000).map(|_| ou_step(5.0, 100.0 * p.tau_c, &p, &mut rng)).collect();
        let (_, var) = mean_and_variance(&draws);
        assert!((var.sqrt() / p.sigma - 1.0).abs() < 0.02);
    }

    #[test]
    fn ensemble_autocorrelation_is_exponential() {
        let p = params();
        let lags = [0.1, 0.3, 0.8];
        let n = 10_000;
        let mut acc = [0.0; 3];
        let mut norm = 0.0;
        for traj in 0..n {
            let mut rng = stream_rng(3, traj as u64);
            let x0 = sample_quasistatic(&p, &mut rng);
            norm += x0 * x0;
            let mut x = x0;
            let mut t = 0.0;
            for (k, lag) in lags.iter().enumerate() {
                x = ou_step(x, lag - t, &p, &mut rng);
                t = *lag;
                acc[k] += x0 * x;
            }
        }
        for (k, lag) in lags.iter().enumerate() {
            let expected = (-lag / p.tau_c).exp();
            let got = acc[k] / norm;
            assert!((got / expected - 1.0).abs() < 0.05, "lag {lag}: {got} vs {expected}");
        }
    }

    #[test]
    fn substeps_match_single_step_in_distribution() {
        let p = params();
        let total = 0.7;
        let n = 40_000;
        let (mut one, mut many) = (Vec::with_capacity(n), Vec::with_capacity(n));
        for i in 0..n {
            let mut a = stream_rng(4, i as u64);
            one.push(ou_step(1.5, total, &p, &mut a));
            let mut b = stream_rng(5, i as u64);
            let mut x = 1.5;
            for _ in 0..7 {
                x = ou_step(x, total / 7.0, &p, &mut b);
            }
            many.push(x);
        }
        let (m1, v1) = mean_and_variance(&one);
        let (m2, v2) = mean_and_variance(&many);
        let mean = 1.5 * (-total / p.tau_c).exp();
        let var = p.sigma * p.sigma * (1.0 - (-2.0 * total / p.tau_c).exp());
        for (m, v) in [(m1, v1), (m2, v2)] {
            assert!((m - mean).abs() < 4.0 * (var / n as f64).sqrt());
            assert!((v / var - 1.0).abs() < 0.03);
        }
    }

    #[test]
    fn integral_moments_match_closed_form() {
        // stationary start: Var ∫_0^T x = 2σ²τ²(T/τ − 1 + e^{−T/τ})
        let p = params();
        let dt = 0.4;
        let n = 60_000;
        let ints: Vec<f64> = (0..n)
            .map(|i| {
                let mut rng = stream_rng(6, i as u64);
                let x0 = sample_quasistatic(&p, &mut rng);
                ou_step_integrated(x0, dt, &p, &mut rng).1
            })
            .collect();
        let (_, var) = mean_and_variance(&ints);
        let h = dt / p.tau_c;
        let expected = 2.0 * p.sigma.powi(2) * p.tau_c.powi(2) * (h - 1.0 + (-h).exp());
        assert!((var / expected - 1.0).abs() < 0.03, "{var} vs {expected}");
    }

    #[test]
    fn integral_small_step_uses_series_consistently() {
        // the series and direct branches meet continuously at h = 1e-3
        let p = OuParams::new(1.0, 1.0).unwrap();
        let var_at = |h: f64| {
            let one_m_mu = -(-h).exp_m1();
            let one_m_mu2 = -(-2.0 * h).exp_m1();
            let direct = h - 2.0 * one_m_mu + 0.5 * one_m_mu2;
            let series = h * h * h * (1.0 / 3.0 - h / 4.0 + 7.0 * h * h / 60.0);
            (direct, series)
        };
        let (d, s) = var_at(1e-3);
        assert!((d / s - 1.0).abs() < 1e-6);
        let mut rng = stream_rng(0, 0);
        let (_, y) = ou_step_integrated(0.0, 1e-9 * p.tau_c, &p, &mut rng);
        assert!(y.is_finite());
    }

    #[test]
    fn quasistatic_zero_sigma() {
        let mut rng = stream_rng(7, 0);
        let p = OuParams::new(0.0, 1.0).unwrap();
        assert!((0..100).all(|_| sample_quasistatic(&p, &mut rng) == 0.0));
    }

    #[test]
    fn trajectories_are_reproducible() {
        let p = params();
        let times: Vec<f64> = (0..50).map(|i| i as f64 * 0.01).collect();
        let a = NoiseTrajectory::generate(&p, &times, 99, 3).unwrap();
        let b = NoiseTrajectory::generate(&p, &times, 99, 3).unwrap();
        let c = NoiseTrajectory::generate(&p, &times, 99, 4).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.values, c.values);
        assert!(NoiseTrajectory::generate(&p, &[0.0, 0.0], 1, 0).is_err());
    }

    #[test]
    fn stationary_variance_along_trajectory() {
        let p = params();
        let times: Vec<f64> = (0..20).map(|i| i as f64 * 0.25).collect();
        let n = 20_000;
        let mut sums = vec![0.0; times.len()];
        for i in 0..n {
            let tr = NoiseTrajectory::generate(&p, &times, 8, i).unwrap();
            for (s, v) in sums.iter_mut().zip(&tr.values) {
                *s += v * v;
            }
        }
        for s in sums {
            assert!((s / n as f64 / (p.sigma * p.sigma) - 1.0).abs() < 0.05);
        }
    }

    #[test]
    fn invalid_params() {
        assert!(OuParams::new(-1.0, 1.0).is_err());
        assert!(OuParams::new(1.0, 0.0).is_err());
        assert_eq!(OuParams::new(1.0, 0.5).unwrap().diffusion(), 4.0);
    }
}
