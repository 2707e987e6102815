// Copyright 2026 The spinmem Authors
// SPDX-License-Identifier: Apache-2.0

//! Joint fit of the ODMR model to several spectra sharing one electron
//! gyromagnetic ratio.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::optimize::{differential_evolution, levenberg_marquardt, r_squared, DeSettings, LmSettings};
use crate::error::{Error, Result};
use crate::quantum::ElectronState;
use crate::sequences::{odmr_transfer_table, OdmrModelParams, OdmrSweep, SweepDirection};
use crate::spin::{hyperfine_from_frequencies, SpinSystemParams};

/// One measured spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OdmrDataset {
    pub sweep: OdmrSweep,
    pub signal: Vec<f64>,
}

/// Inputs held fixed during the fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdmrFixedInputs {
    pub omega_rf1: f64,
    pub omega_rf2: f64,
    pub gamma_n: f64,
    pub mw_rabi: f64,
    pub pi_duration: f64,
    pub electron_sigma: f64,
}

impl OdmrFixedInputs {
    /// Nuclear frequencies `2π·2489.73 kHz` and `2π·493.62 kHz` with the
    /// reference MW settings.
    pub fn reference() -> Self {
        let m = OdmrModelParams::reference(1.0, 0.5);
        Self {
            omega_rf1: crate::hz(2489.73e3),
            omega_rf2: crate::hz(493.62e3),
            gamma_n: crate::spin::GAMMA_C13,
            mw_rabi: m.mw_rabi,
            pi_duration: m.pi_duration,
            electron_sigma: m.electron_sigma,
        }
    }

    /// Spin system implied by a field value.
    pub fn system(&self, b_z: f64, gamma_e_eff: f64) -> Result<SpinSystemParams> {
        let (a_zz, a_zx) = hyperfine_from_frequencies(self.omega_rf1, self.omega_rf2, b_z, self.gamma_n)?;
        SpinSystemParams::new(a_zx, a_zz, b_z, self.gamma_n, gamma_e_eff)
    }

    fn model(&self, gamma_e_eff: f64, p_up: f64) -> OdmrModelParams {
        OdmrModelParams {
            gamma_e_eff,
            p_up,
            mw_rabi: self.mw_rabi,
            pi_duration: self.pi_duration,
            electron_sigma: self.electron_sigma,
        }
    }

    /// Expected spectrum for `(γ_e, B, p)`. The recursion is affine in `p`,
    /// so values outside `[0, 1]` extrapolate smoothly; optimizers rely on it.
    pub fn expected(&self, sweep: &OdmrSweep, gamma_e_eff: f64, b_z: f64, p_up: f64) -> Result<Vec<f64>> {
        let sys = self.system(b_z, gamma_e_eff)?;
        let model = self.model(gamma_e_eff, 0.5);
        let deltas = sweep.detunings(gamma_e_eff, b_z);
        let (lo, hi) = deltas.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &d| (a.min(d), b.max(d)));
        let table = odmr_transfer_table(&sys, &model, sweep.manifold, lo, hi)?;
        Ok(table.spectrum(&deltas, p_up).signal)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdmrBounds {
    pub gamma_e_eff: (f64, f64),
    pub b_z: (f64, f64),
    pub p_up: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OdmrFitSettings {
    pub de: DeSettings,
    pub bounds: OdmrBounds,
    pub lm: LmSettings,
    /// Spectra below this R² raise the warning flag.
    pub r2_threshold: f64,
}

impl OdmrFitSettings {
    pub fn new(bounds: OdmrBounds) -> Self {
        Self {
            de: DeSettings::default(),
            bounds,
            lm: LmSettings { tolerance: 1e-12, fd_step: 1e-7, ..Default::default() },
            r2_threshold: 0.97,
        }
    }
}

/// Per-spectrum outcome of the constrained refinement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumFit {
    pub manifold: ElectronState,
    pub direction: SweepDirection,
    pub b_z: f64,
    pub b_stderr: f64,
    pub p_up: f64,
    pub p_stderr: f64,
    /// `γ_e B` held at its jointly fitted value while `B` moves.
    pub gamma_e_eff: f64,
    pub r_squared: f64,
    pub a_zz: f64,
    pub a_zx: f64,
    pub model: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OdmrFitResult {
    /// Shared value from the joint fit.
    pub gamma_e_eff: f64,
    pub gamma_stderr: f64,
    pub spectra: Vec<SpectrumFit>,
    pub mean_a_zz: f64,
    pub mean_a_zx: f64,
    pub evaluations: usize,
    pub objective: f64,
    pub warning: Option<String>,
}

/// Global DE search over `[γ_e, B_1..B_k, p_1..p_k]` on the summed squared
/// residuals, a joint Levenberg-Marquardt polish, then a per-spectrum
/// refinement of `(B_i, p_i)` with `γ_e B_i` held fixed.
pub fn fit_odmr(data: &[OdmrDataset], fixed: &OdmrFixedInputs, s: &OdmrFitSettings) -> Result<OdmrFitResult> {
    if data.is_empty() {
        return Err(Error::InsufficientData("no spectra".into()));
    }
    for d in data {
        d.sweep.direction()?;
        if d.signal.len() != d.sweep.frequencies.len() {
            return Err(Error::invalid("signal and sweep lengths differ"));
        }
    }
    let k = data.len();
    let mut bounds = vec![s.bounds.gamma_e_eff];
    bounds.extend(std::iter::repeat_n(s.bounds.b_z, k));
    bounds.extend(std::iter::repeat_n(s.bounds.p_up, k));

    let spectrum_rss = |i: usize, gamma: f64, b: f64, p: f64| -> f64 {
        match fixed.expected(&data[i].sweep, gamma, b, p) {
            Ok(m) => m.iter().zip(&data[i].signal).map(|(a, y)| (a - y).powi(2)).sum(),
            Err(_) => f64::INFINITY,
        }
    };
    let objective = |x: &[f64]| -> f64 { (0..k).map(|i| spectrum_rss(i, x[0], x[1 + i], x[1 + k + i])).sum() };
    let de = differential_evolution(objective, &bounds, &s.de)?;
    let mut evaluations = de.evaluations;

    // joint polish in scaled coordinates
    let x0 = de.x.clone();
    let scale: Vec<f64> = x0.iter().map(|v| v.abs().max(1e-3)).collect();
    let unscale = |u: &[f64]| -> Vec<f64> { u.iter().zip(&scale).map(|(a, s)| a * s).collect() };
    let joint_res = |u: &[f64]| -> Result<Vec<f64>> {
        let x = unscale(u);
        let parts: Vec<Result<Vec<f64>>> = (0..k)
            .into_par_iter()
            .map(|i| {
                let m = fixed.expected(&data[i].sweep, x[0], x[1 + i], x[1 + k + i])?;
                Ok(m.iter().zip(&data[i].signal).map(|(a, y)| a - y).collect())
            })
            .collect();
        let mut out = Vec::new();
        for p in parts {
            out.extend(p?);
        }
        Ok(out)
    };
    let u0: Vec<f64> = x0.iter().zip(&scale).map(|(a, s)| a / s).collect();
    let joint = levenberg_marquardt(joint_res, &u0, &s.lm)?;
    evaluations += joint.evaluations;
    let x = unscale(&joint.x);
    let gamma = x[0];
    let gamma_stderr = joint.stderr[0] * scale[0];

    let mut spectra = Vec::with_capacity(k);
    let mut warning = None;
    for (i, d) in data.iter().enumerate() {
        let (fit, evals) = refine_least_squares(d, fixed, gamma * x[1 + i], (x[1 + i], x[1 + k + i]), &s.lm)?;
        evaluations += evals;
        if fit.r_squared < s.r2_threshold && warning.is_none() {
            warning = Some(format!("spectrum {i} reached R² = {:.4} < {}", fit.r_squared, s.r2_threshold));
        }
        spectra.push(fit);
    }
    let mean_a_zz = spectra.iter().map(|f| f.a_zz).sum::<f64>() / k as f64;
    let mean_a_zx = spectra.iter().map(|f| f.a_zx).sum::<f64>() / k as f64;
    Ok(OdmrFitResult {
        gamma_e_eff: gamma,
        gamma_stderr,
        spectra,
        mean_a_zz,
        mean_a_zx,
        evaluations,
        objective: joint.rss,
        warning,
    })
}

/// Least-squares refinement of `(B, p)` for one spectrum with the product
/// `γ_e B` held at `product` (so `γ_e = product / B`). Returns the fit and
/// the number of model evaluations.
pub fn refine_least_squares(
    data: &OdmrDataset,
    fixed: &OdmrFixedInputs,
    product: f64,
    start: (f64, f64),
    lm: &LmSettings,
) -> Result<(SpectrumFit, usize)> {
    let (b0, p0) = start;
    if !(b0 > 0.0 && product > 0.0) {
        return Err(Error::invalid("field and γ_e·B product must be positive"));
    }
    let res = |u: &[f64]| -> Result<Vec<f64>> {
        let b = u[0] * b0;
        let m = fixed.expected(&data.sweep, product / b, b, u[1])?;
        Ok(m.iter().zip(&data.signal).map(|(a, y)| a - y).collect())
    };
    let fit = levenberg_marquardt(res, &[1.0, p0], lm)?;
    if !fit.converged {
        return Err(Error::FitFailure { reason: "constrained ODMR refinement did not converge".into(), rss: fit.rss });
    }
    let b = fit.x[0] * b0;
    let p = fit.x[1].clamp(0.0, 1.0);
    let g = product / b;
    let model = fixed.expected(&data.sweep, g, b, p)?;
    let r2 = r_squared(&data.signal, &model)?;
    let sys = fixed.system(b, g)?;
    let spectrum = SpectrumFit {
        manifold: data.sweep.manifold,
        direction: data.sweep.direction()?,
        b_z: b,
        b_stderr: fit.stderr[0] * b0,
        p_up: p,
        p_stderr: fit.stderr[1],
        gamma_e_eff: g,
        r_squared: r2,
        a_zz: sys.a_zz,
        a_zx: sys.a_zx,
        model,
    };
    Ok((spectrum, fit.evaluations))
}
