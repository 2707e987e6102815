// Copyright 2026 The spinmem Authors
// SPDX-License-Identifier: Apache-2.0

//! Stretched-exponential decay fits and correlation-time estimation.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::decay::{decay_rate_exact, DecayEstimate, DecayModel, DecaySpec};
use crate::error::{Error, Result};
use crate::fitting::{levenberg_marquardt, r_squared, LmSettings};

/// Stretch exponent of `exp(−(t/T2)^p)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum Exponent {
    Fixed(f64),
    Free,
}

impl Default for Exponent {
    /// Cubic, the slow-noise limit for a fixed-`N` sweep.
    fn default() -> Self {
        Exponent::Fixed(3.0)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct DecayFitOptions {
    pub exponent: Exponent,
    /// Holds the baseline `c` fixed when set.
    pub offset: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub estimate: DecayEstimate,
    pub amplitude: f64,
    pub offset: f64,
    pub exponent: f64,
    pub rss: f64,
    pub r_squared: f64,
}

/// Least-squares fit of `y = a exp(−(t/T2)^p) + c`.
pub fn fit_decay_time(t: &[f64], y: &[f64], opts: &DecayFitOptions) -> Result<DecayFit> {
    if t.len() != y.len() {
        return Err(Error::invalid("time and signal lengths differ"));
    }
    if t.iter().chain(y).any(|v| !v.is_finite()) || t.iter().any(|&v| v < 0.0) {
        return Err(Error::invalid("times must be finite and non-negative, signals finite"));
    }
    if let Exponent::Fixed(p) = opts.exponent {
        if !(p > 0.0) {
            return Err(Error::invalid(format!("stretch exponent must be positive, got {p}")));
        }
    }
    let free_p = opts.exponent == Exponent::Free;
    let n_params = 2 + usize::from(free_p) + usize::from(opts.offset.is_none());
    if t.len() <= n_params {
        return Err(Error::InsufficientData(format!("{} points for {n_params} parameters", t.len())));
    }
    let (y_min, y_max) = y.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let span = y_max - y_min;
    if span <= 1e-12 * y_max.abs().max(1.0) {
        return Err(Error::FitFailure { reason: "signal is constant; no decay to fit".into(), rss: 0.0 });
    }

    // start: baseline at the tail, T2 at the 1/e crossing of the data
    let c0 = opts.offset.unwrap_or(y_min);
    let mut order: Vec<usize> = (0..t.len()).collect();
    order.sort_by(|&a, &b| t[a].total_cmp(&t[b]));
    let a0 = y[order[0]] - c0;
    let level = c0 + a0 / std::f64::consts::E;
    let t_max = t[order[order.len() - 1]];
    let t2_0 = order
        .iter()
        .find(|&&i| (y[i] - level) * a0.signum() <= 0.0)
        .map_or(t_max, |&i| t[i])
        .max(1e-6 * t_max.max(f64::MIN_POSITIVE));
    let p0 = match opts.exponent {
        Exponent::Fixed(p) => p,
        Exponent::Free => 2.0,
    };

    // parameters: a, ln T2, [ln p], [c]
    let unpack = |u: &[f64]| -> (f64, f64, f64, f64) {
        let mut k = 2;
        let p = if free_p {
            k += 1;
            u[2].exp()
        } else {
            p0
        };
        let c = opts.offset.unwrap_or_else(|| u[k]);
        (u[0], u[1].exp(), p, c)
    };
    let model = |u: &[f64], tk: f64| {
        let (a, t2, p, c) = unpack(u);
        a * (-(tk / t2).powf(p)).exp() + c
    };
    let residuals = |u: &[f64]| -> Result<Vec<f64>> {
        Ok(t.iter().zip(y).map(|(&tk, &yk)| model(u, tk) - yk).collect())
    };
    let mut u0 = vec![a0, t2_0.ln()];
    if free_p {
        u0.push(p0.ln());
    }
    if opts.offset.is_none() {
        u0.push(c0);
    }
    let scale = Some(u0.iter().map(|v| v.abs().max(span)).collect());
    let lm = LmSettings { tolerance: 1e-14, scale, ..Default::default() };
    let fit = levenberg_marquardt(residuals, &u0, &lm)?;
    if !fit.converged {
        return Err(Error::FitFailure { reason: "decay fit did not converge".into(), rss: fit.rss });
    }
    let (a, t2, p, c) = unpack(&fit.x);
    if !t2.is_finite() || t2 > 1e6 * t_max.max(f64::MIN_POSITIVE) {
        return Err(Error::FitFailure { reason: format!("decay time diverged (T2 = {t2:e})"), rss: fit.rss });
    }
    let fitted: Vec<f64> = t.iter().map(|&tk| model(&fit.x, tk)).collect();
    Ok(DecayFit {
        estimate: DecayEstimate { t2, uncertainty: t2 * fit.stderr[1], model: DecayModel::Fit },
        amplitude: a,
        offset: c,
        exponent: p,
        rss: fit.rss,
        r_squared: r_squared(y, &fitted)?,
    })
}

/// Echo signal versus pulse separation at fixed pulse count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationDataset {
    pub n: usize,
    pub tau_tilde: Vec<f64>,
    pub signal: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationFit {
    pub tau_c: f64,
    pub stderr: f64,
    /// 95% interval from the linearized covariance and the Student-t
    /// quantile.
    pub ci95: (f64, f64),
    /// Per-dataset signal amplitude.
    pub amplitudes: Vec<f64>,
    pub rss: f64,
    pub dof: usize,
}

/// Fits `y = a_k exp(−γ(N_k, τ̃))` with one shared `τ_c` and a free
/// amplitude per dataset; `sigma` is held fixed.
pub fn fit_correlation_time(datasets: &[CorrelationDataset], sigma: f64, tau_c_start: f64) -> Result<CorrelationFit> {
    if !(sigma > 0.0) {
        return Err(Error::invalid(format!("σ must be positive, got {sigma}")));
    }
    if !(tau_c_start > 0.0) {
        return Err(Error::invalid(format!("starting τ_c must be positive, got {tau_c_start}")));
    }
    let mut points = 0;
    for d in datasets {
        if d.tau_tilde.len() != d.signal.len() {
            return Err(Error::invalid("pulse-separation and signal lengths differ"));
        }
        if d.n == 0 || d.tau_tilde.iter().any(|&v| !(v > 0.0)) {
            return Err(Error::invalid("pulse counts and separations must be positive"));
        }
        points += d.tau_tilde.len();
    }
    let n_params = 1 + datasets.len();
    if points < 4 || points <= n_params {
        return Err(Error::InsufficientData(format!("{points} points for {n_params} parameters (need at least 4)")));
    }

    // parameters: ln τc, a_1..a_k
    let residuals = |u: &[f64]| -> Result<Vec<f64>> {
        let tau_c = u[0].exp();
        let mut out = Vec::with_capacity(points);
        for (k, d) in datasets.iter().enumerate() {
            for (&tt, &y) in d.tau_tilde.iter().zip(&d.signal) {
                let spec = DecaySpec { n: d.n, tau_tilde: tt, sigma, tau_c };
                out.push(u[1 + k] * (-decay_rate_exact(&spec, spec.duration())).exp() - y);
            }
        }
        Ok(out)
    };
    let mut u0 = vec![tau_c_start.ln()];
    u0.extend(datasets.iter().map(|d| d.signal.iter().cloned().fold(f64::NEG_INFINITY, f64::max)));
    let scale = Some(u0.iter().map(|v| v.abs().max(1.0)).collect());
    let lm = LmSettings { tolerance: 1e-13, scale, ..Default::default() };
    let fit = levenberg_marquardt(residuals, &u0, &lm)?;
    if !fit.converged || !fit.stderr[0].is_finite() {
        return Err(Error::FitFailure { reason: "correlation-time fit did not converge".into(), rss: fit.rss });
    }
    let tau_c = fit.x[0].exp();
    let stderr = tau_c * fit.stderr[0];
    let dof = points - n_params;
    let q = StudentsT::new(0.0, 1.0, dof as f64)
        .map_err(|e| Error::invalid(format!("Student-t quantile: {e}")))?
        .inverse_cdf(0.975);
    Ok(CorrelationFit {
        tau_c,
        stderr,
        ci95: (tau_c - q * stderr, tau_c + q * stderr),
        amplitudes: fit.x[1..].to_vec(),
        rss: fit.rss,
        dof,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hz;
    use rand::SeedableRng;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn noiseless_cubic_self_fit() {
        let t: Vec<f64> = (0..40).map(|k| 0.05 * k as f64).collect();
        let y: Vec<f64> = t.iter().map(|&v| (-(v / 1.0f64).powi(3)).exp()).collect();
        let f = fit_decay_time(&t, &y, &DecayFitOptions { offset: Some(0.0), ..Default::default() }).unwrap();
        assert!((f.estimate.t2 - 1.0).abs() < 1e-6, "{}", f.estimate.t2);
        let g = fit_decay_time(&t, &y, &DecayFitOptions::default()).unwrap();
        assert!((g.estimate.t2 - 1.0).abs() < 1e-6);
        assert!(g.offset.abs() < 1e-6);
    }

    #[test]
    fn free_exponent_recovered() {
        let t: Vec<f64> = (1..60).map(|k| 0.1 * k as f64).collect();
        let y: Vec<f64> = t.iter().map(|&v| 0.8 * (-(v / 2.5f64).powf(1.4)).exp() + 0.1).collect();
        let f = fit_decay_time(&t, &y, &DecayFitOptions { exponent: Exponent::Free, offset: None }).unwrap();
        assert!((f.exponent - 1.4).abs() < 1e-6);
        assert!((f.estimate.t2 - 2.5).abs() < 1e-6);
        assert!((f.amplitude - 0.8).abs() < 1e-6);
    }

    #[test]
    fn constant_signal_is_a_fit_failure() {
        let t: Vec<f64> = (0..10).map(|k| k as f64).collect();
        let y = vec![0.7; 10];
        assert!(matches!(fit_decay_time(&t, &y, &DecayFitOptions::default()), Err(Error::FitFailure { .. })));
    }

    #[test]
    fn correlation_time_self_consistent() {
        let sigma = hz(112.5);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let noise = Normal::new(0.0, 0.01).unwrap();
        let tt: Vec<f64> = (1..=20).map(|k| 0.03 * k as f64).collect();
        let data: Vec<CorrelationDataset> = [1usize, 2]
            .iter()
            .map(|&n| CorrelationDataset {
                n,
                tau_tilde: tt.clone(),
                signal: tt
                    .iter()
                    .map(|&v| {
                        let spec = DecaySpec { n, tau_tilde: v, sigma, tau_c: 829.0 };
                        (-decay_rate_exact(&spec, spec.duration())).exp() + noise.sample(&mut rng)
                    })
                    .collect(),
            })
            .collect();
        let f = fit_correlation_time(&data, sigma, 300.0).unwrap();
        assert!(f.ci95.0 < 829.0 && 829.0 < f.ci95.1, "{f:?}");
        assert_eq!(f.dof, 40 - 3);
    }

    #[test]
    fn too_few_points() {
        let d = CorrelationDataset { n: 1, tau_tilde: vec![0.1, 0.2, 0.3], signal: vec![0.9, 0.7, 0.4] };
        assert!(matches!(fit_correlation_time(&[d], hz(112.5), 800.0), Err(Error::InsufficientData(_))));
    }
}
