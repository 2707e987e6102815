// Copyright 2026 The spinmem Authors
// SPDX-License-Identifier: Apache-2.0

//! Coherence decay of CPMG-type echoes under Ornstein-Uhlenbeck detuning
//! noise, and the coherence and memory times derived from it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One dynamical-decoupling configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecaySpec {
    /// Number of π pulses.
    pub n: usize,
    /// Pulse separation `τ̃ = 2τ`, s.
    pub tau_tilde: f64,
    /// Detuning noise standard deviation, rad/s.
    pub sigma: f64,
    /// Noise correlation time, s. May be infinite.
    pub tau_c: f64,
}

impl DecaySpec {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::invalid("pulse count must be at least 1"));
        }
        if !(self.tau_tilde > 0.0) || !self.tau_tilde.is_finite() {
            return Err(Error::invalid(format!("pulse separation must be positive, got {}", self.tau_tilde)));
        }
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return Err(Error::invalid(format!("σ must be non-negative, got {}", self.sigma)));
        }
        if !(self.tau_c > 0.0) {
            return Err(Error::invalid(format!("τ_c must be positive, got {}", self.tau_c)));
        }
        Ok(())
    }

    /// Total free-evolution time `N τ̃`.
    pub fn duration(&self) -> f64 {
        self.n as f64 * self.tau_tilde
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecayModel {
    Exact,
    Approx,
    Fit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayEstimate {
    /// Time at which the envelope has fallen by `1/e`, s.
    pub t2: f64,
    pub uncertainty: f64,
    pub model: DecayModel,
}

// 1 − sech x and 1 − tanh(x)/x, with series below SERIES_X
const SERIES_X: f64 = 1e-2;

fn one_minus_sech(x: f64) -> f64 {
    if x < SERIES_X {
        let x2 = x * x;
        x2 * (0.5 - x2 * (5.0 / 24.0 - x2 * 61.0 / 720.0))
    } else {
        1.0 - 1.0 / x.cosh()
    }
}

fn one_minus_tanh_ratio(x: f64) -> f64 {
    if x < SERIES_X {
        let x2 = x * x;
        x2 * (1.0 / 3.0 - x2 * (2.0 / 15.0 - x2 * 17.0 / 315.0))
    } else {
        1.0 - x.tanh() / x
    }
}

/// Exact decay exponent `γ` for free-evolution time `t` (normally `N τ̃`).
/// The echo signal is `exp(−γ)`.
pub fn decay_rate_exact(spec: &DecaySpec, t: f64) -> f64 {
    let DecaySpec { n, tau_tilde, sigma, tau_c } = *spec;
    if tau_c.is_infinite() {
        return 0.0;
    }
    let x = tau_tilde / (2.0 * tau_c);
    let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
    // σ²τc²[−(1 + (−1)^{N+1} e^{−t/τc})(1 − sech x)² + (t/τc)(1 − tanh x / x)]
    let edge = (1.0 + sign * (-t / tau_c).exp()) * (tau_c * one_minus_sech(x)).powi(2);
    let bulk = t * tau_c * one_minus_tanh_ratio(x);
    (sigma * sigma * (bulk - edge)).max(0.0)
}

/// Leading-order exponent `σ² N τ̃³ / (12 τ_c)`.
pub fn decay_rate_approx(spec: &DecaySpec) -> f64 {
    spec.sigma * spec.sigma * spec.n as f64 * spec.tau_tilde.powi(3) / (12.0 * spec.tau_c)
}

/// Hahn-echo coherence time `(12 τ_c / σ²)^{1/3}`.
pub fn hahn_t2(sigma: f64, tau_c: f64) -> Result<f64> {
    if !(sigma > 0.0 && tau_c > 0.0) {
        return Err(Error::invalid("σ and τ_c must be positive"));
    }
    Ok((12.0 * tau_c / (sigma * sigma)).cbrt())
}

/// `T2(N) = T2H · N^{2/3}`.
pub fn t2_for_order(n: usize, t2_hahn: f64) -> f64 {
    t2_hahn * (n as f64).powf(2.0 / 3.0)
}

/// Solves `decay_rate_exact(N, t/N) = 1` for `t`.
pub fn t2_exact(n: usize, sigma: f64, tau_c: f64) -> Result<DecayEstimate> {
    let guess = t2_for_order(n, hahn_t2(sigma, tau_c)?);
    let g = |t: f64| {
        let spec = DecaySpec { n, tau_tilde: t / n as f64, sigma, tau_c };
        decay_rate_exact(&spec, t) - 1.0
    };
    let (mut lo, mut hi) = (0.5 * guess, 2.0 * guess);
    while g(lo) > 0.0 {
        lo *= 0.5;
    }
    let mut expansions = 0;
    while g(hi) < 0.0 {
        hi *= 2.0;
        expansions += 1;
        if expansions > 200 {
            return Err(Error::InconsistentInputs("decay exponent never reaches 1".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(DecayEstimate { t2: 0.5 * (lo + hi), uncertainty: 0.0, model: DecayModel::Exact })
}

/// Memory time at fixed pulse separation, `(T2H/τ̃)² T2H`, optionally
/// combined with electron relaxation as `1/T = 1/(2 T1e) + 1/Tmem`.
pub fn memory_time(tau_tilde: f64, t2_hahn: f64, t1e: Option<f64>) -> Result<f64> {
    if !(tau_tilde > 0.0) {
        return Err(Error::invalid(format!("pulse separation must be positive, got {tau_tilde}")));
    }
    if !(t2_hahn > 0.0) {
        return Err(Error::invalid(format!("T2H must be positive, got {t2_hahn}")));
    }
    let t_mem = (t2_hahn / tau_tilde).powi(2) * t2_hahn;
    combine_t1(t_mem, t1e)
}

/// `1/T = 1/(2 T1e) + 1/T`.
pub fn combine_t1(t_mem: f64, t1e: Option<f64>) -> Result<f64> {
    match t1e {
        None => Ok(t_mem),
        Some(t1) if t1 > 0.0 => Ok(1.0 / (0.5 / t1 + 1.0 / t_mem)),
        Some(t1) => Err(Error::invalid(format!("T1e must be positive, got {t1}"))),
    }
}
