// Copyright 2026 The spinmem Authors
// SPDX-License-Identifier: Apache-2.0

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::stream_rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeSettings {
    pub population: usize,
    pub generations: usize,
    /// Differential weight, in [0.5, 1].
    pub f: f64,
    /// Crossover rate, in [0.7, 0.95].
    pub cr: f64,
    pub seed: u64,
}

impl Default for DeSettings {
    fn default() -> Self {
        Self { population: 64, generations: 150, f: 0.7, cr: 0.9, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    /// Best objective after initialization and after every generation.
    pub history: Vec<f64>,
}

/// DE/rand/1/bin minimization. Trial vectors of a generation are drawn
/// serially from one RNG stream and evaluated in parallel, so the result
/// depends only on the seed. NaN objective values count as `+∞`.
pub fn differential_evolution<F>(objective: F, bounds: &[(f64, f64)], s: &DeSettings) -> Result<DeResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if bounds.is_empty() || bounds.iter().any(|&(lo, hi)| !(lo.is_finite() && hi.is_finite() && lo <= hi)) {
        return Err(Error::invalid("DE bounds must be finite with lo ≤ hi"));
    }
    if s.population < 4 {
        return Err(Error::invalid(format!("DE population must be at least 4, got {}", s.population)));
    }
    if !(0.5..=1.0).contains(&s.f) || !(0.7..=0.95).contains(&s.cr) {
        return Err(Error::invalid(format!("DE needs F in [0.5, 1] and CR in [0.7, 0.95], got {} / {}", s.f, s.cr)));
    }
    let eval = |x: &Vec<f64>| {
        let v = objective(x);
        if v.is_nan() { f64::INFINITY } else { v }
    };
    let dim = bounds.len();
    let mut rng = stream_rng(s.seed, 0);
    let mut pop: Vec<Vec<f64>> = (0..s.population)
        .map(|_| bounds.iter().map(|&(lo, hi)| lo + (hi - lo) * rng.random::<f64>()).collect())
        .collect();
    let mut fit: Vec<f64> = pop.par_iter().map(eval).collect();
    let mut evaluations = s.population;
    let best_of = |fit: &[f64]| {
        fit.iter().enumerate().fold(0, |b, (i, &v)| if v < fit[b] { i } else { b })
    };
    let mut history = vec![fit[best_of(&fit)]];

    for _ in 0..s.generations {
        let trials: Vec<Vec<f64>> = (0..s.population)
            .map(|i| {
                let pick = |rng: &mut crate::noise::NoiseRng, taken: &[usize]| loop {
                    let r = rng.random_range(0..s.population);
                    if !taken.contains(&r) {
                        break r;
                    }
                };
                let r1 = pick(&mut rng, &[i]);
                let r2 = pick(&mut rng, &[i, r1]);
                let r3 = pick(&mut rng, &[i, r1, r2]);
                let jrand = rng.random_range(0..dim);
                (0..dim)
                    .map(|j| {
                        let (lo, hi) = bounds[j];
                        if j != jrand && rng.random::<f64>() >= s.cr {
                            return pop[i][j];
                        }
                        let v = pop[r1][j] + s.f * (pop[r2][j] - pop[r3][j]);
                        // bounce back between the parent and the violated bound
                        if v < lo {
                            lo + rng.random::<f64>() * (pop[i][j] - lo)
                        } else if v > hi {
                            hi - rng.random::<f64>() * (hi - pop[i][j])
                        } else {
                            v
                        }
                    })
                    .collect()
            })
            .collect();
        let trial_fit: Vec<f64> = trials.par_iter().map(eval).collect();
        evaluations += s.population;
        for (i, (t, v)) in trials.into_iter().zip(trial_fit).enumerate() {
            if v <= fit[i] {
                pop[i] = t;
                fit[i] = v;
            }
        }
        history.push(fit[best_of(&fit)]);
    }
    let b = best_of(&fit);
    Ok(DeResult { x: pop[b].clone(), value: fit[b], evaluations, history })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LmSettings {
    pub max_iterations: usize,
    /// Stop when the relative RSS decrease or relative step falls below this.
    pub tolerance: f64,
    /// Relative finite-difference step.
    pub fd_step: f64,
    /// Per-parameter magnitude used for finite-difference steps near zero.
    pub scale: Option<Vec<f64>>,
}

impl Default for LmSettings {
    fn default() -> Self {
        Self { max_iterations: 200, tolerance: 1e-10, fd_step: 1e-6, scale: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LmResult {
    pub x: Vec<f64>,
    pub rss: f64,
    pub residuals: Vec<f64>,
    /// `s² (JᵀJ)⁻¹` with `s² = RSS / (m − n)`; `None` if singular.
    pub covariance: Option<Vec<Vec<f64>>>,
    pub stderr: Vec<f64>,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

fn rss_of(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

fn jacobian<F>(residuals: &F, x: &[f64], r0_len: usize, s: &LmSettings) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let n = x.len();
    let mut jac = DMatrix::zeros(r0_len, n);
    for j in 0..n {
        let mag = s.scale.as_ref().map_or(0.0, |sc| sc[j].abs()).max(x[j].abs());
        let h = s.fd_step * if mag > 0.0 { mag } else { 1.0 };
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[j] += h;
        xm[j] -= h;
        let rp = residuals(&xp)?;
        let rm = residuals(&xm)?;
        for i in 0..r0_len {
            jac[(i, j)] = (rp[i] - rm[i]) / (2.0 * h);
        }
    }
    Ok(jac)
}

/// Levenberg-Marquardt with Marquardt diagonal scaling and a central
/// finite-difference Jacobian. Residual errors reject the trial step.
pub fn levenberg_marquardt<F>(residuals: F, start: &[f64], s: &LmSettings) -> Result<LmResult>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let n = start.len();
    if let Some(sc) = &s.scale {
        if sc.len() != n {
            return Err(Error::invalid("LM scale length differs from parameter count"));
        }
    }
    let mut x = start.to_vec();
    let mut r = residuals(&x)?;
    let m = r.len();
    if m < n {
        return Err(Error::InsufficientData(format!("{m} residuals for {n} parameters")));
    }
    let mut rss = rss_of(&r);
    let mut evaluations = 1;
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < s.max_iterations {
        iterations += 1;
        let jac = jacobian(&residuals, &x, m, s)?;
        evaluations += 2 * n;
        let a = jac.transpose() * &jac;
        let g = jac.transpose() * DVector::from_column_slice(&r);
        let dmax = a.diagonal().max();
        let mut accepted = false;
        let mut small_step = false;
        while lambda < 1e16 {
            let mut lhs = a.clone();
            for k in 0..n {
                lhs[(k, k)] += lambda * a[(k, k)].max(1e-12 * dmax.max(1e-300));
            }
            let Some(step) = lhs.lu().solve(&(-&g)) else {
                lambda *= 10.0;
                continue;
            };
            let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            small_step = step.iter().zip(&x).all(|(d, xi)| d.abs() <= s.tolerance * (xi.abs() + s.tolerance));
            evaluations += 1;
            match residuals(&trial) {
                Ok(rt) if rss_of(&rt) <= rss => {
                    let new_rss = rss_of(&rt);
                    let gain = rss - new_rss;
                    x = trial;
                    r = rt;
                    rss = new_rss;
                    lambda = (lambda / 10.0).max(1e-12);
                    accepted = true;
                    if gain <= s.tolerance * rss.max(f64::MIN_POSITIVE) {
                        small_step = true;
                    }
                    break;
                }
                _ => lambda *= 10.0,
            }
            if small_step {
                break;
            }
        }
        if small_step || !accepted || rss == 0.0 {
            converged = small_step || rss == 0.0 || lambda >= 1e16;
            break;
        }
    }
    let jac = jacobian(&residuals, &x, m, s)?;
    evaluations += 2 * n;
    let (covariance, stderr) = covariance(&jac, rss, m, n);
    Ok(LmResult { x, rss, residuals: r, covariance, stderr, iterations, evaluations, converged })
}

fn covariance(jac: &DMatrix<f64>, rss: f64, m: usize, n: usize) -> (Option<Vec<Vec<f64>>>, Vec<f64>) {
    let dof = m.saturating_sub(n);
    let s2 = if dof > 0 { rss / dof as f64 } else { f64::NAN };
    match (jac.transpose() * jac).try_inverse() {
        Some(inv) => {
            let cov: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| s2 * inv[(i, j)]).collect()).collect();
            let se = (0..n).map(|i| cov[i][i].max(0.0).sqrt()).collect();
            (Some(cov), se)
        }
        None => (None, vec![f64::NAN; n]),
    }
}

/// `1 − SS_res / SS_tot`.
pub fn r_squared(data: &[f64], model: &[f64]) -> Result<f64> {
    if data.len() != model.len() || data.is_empty() {
        return Err(Error::invalid("data and model must have equal non-zero length"));
    }
    let mean = data.iter().sum::<f64>() / data.len() as f64;
    let ss_tot: f64 = data.iter().map(|y| (y - mean).powi(2)).sum();
    let ss_res: f64 = data.iter().zip(model).map(|(y, f)| (y - f).powi(2)).sum();
    if ss_tot == 0.0 {
        return Err(Error::InsufficientData("data have zero variance".into()));
    }
    Ok(1.0 - ss_res / ss_tot)
}
