// Copyright 2026 The spinmem Authors
// SPDX-License-Identifier: Apache-2.0

//! Pulsed ODMR sweeps with nuclear polarization carried between points.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::{stream_id, stream_rng, NoiseRng};
use crate::quantum::{kron, kron_ket, ElectronState, Hermitian, Ket4, Op4, Pair};
use crate::spin::{manifold_spectrum, pair_hamiltonian, ManifoldSpectrum, SpinSystemParams};
use crate::stats::mean_and_stderr;
use rand::Rng;
use rand_distr::StandardNormal;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepDirection {
    Ascending,
    Descending,
}

/// Ordered MW frequencies (Hz) and the manifold the electron is reset into.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OdmrSweep {
    pub frequencies: Vec<f64>,
    pub manifold: ElectronState,
}

impl OdmrSweep {
    pub fn new(frequencies: Vec<f64>, manifold: ElectronState) -> Result<Self> {
        let s = Self { frequencies, manifold };
        s.direction()?;
        Ok(s)
    }

    /// `n` evenly spaced points from `start` to `stop` inclusive.
    pub fn linear(start: f64, stop: f64, n: usize, manifold: ElectronState) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid("a sweep needs at least two points"));
        }
        let step = (stop - start) / (n - 1) as f64;
        Self::new((0..n).map(|k| start + step * k as f64).collect(), manifold)
    }

    pub fn direction(&self) -> Result<SweepDirection> {
        let f = &self.frequencies;
        if f.is_empty() || f.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("sweep frequencies must be finite and non-empty"));
        }
        if f.windows(2).all(|w| w[1] > w[0]) {
            Ok(SweepDirection::Ascending)
        } else if f.windows(2).all(|w| w[1] < w[0]) {
            Ok(SweepDirection::Descending)
        } else {
            Err(Error::invalid("sweep frequencies must be strictly monotone"))
        }
    }

    /// Rotating-frame detunings `Δ_k = γ_e B − 2π ν_k`.
    pub fn detunings(&self, gamma_e_eff: f64, b_z: f64) -> Vec<f64> {
        let we = gamma_e_eff * b_z;
        self.frequencies.iter().map(|f| we - crate::TWO_PI * f).collect()
    }
}

/// Per-spectrum model inputs. The field comes from the spin system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdmrModelParams {
    /// Effective electron gyromagnetic ratio, rad/s/T.
    pub gamma_e_eff: f64,
    /// Initial up-like nuclear population along the sweep manifold's axis.
    pub p_up: f64,
    /// MW Rabi frequency, rad/s.
    pub mw_rabi: f64,
    pub pi_duration: f64,
    /// Quasi-static electron detuning spread, rad/s.
    pub electron_sigma: f64,
}

impl OdmrModelParams {
    /// `Ω = 2π·349 kHz`, `π/Ω` pulses, `σ = 2π·146 kHz`.
    pub fn reference(gamma_e_eff: f64, p_up: f64) -> Self {
        let mw_rabi = crate::hz(349e3);
        Self { gamma_e_eff, p_up, mw_rabi, pi_duration: std::f64::consts::PI / mw_rabi, electron_sigma: crate::hz(146e3) }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma_e_eff > 0.0) {
            return Err(Error::invalid("electron gyromagnetic ratio must be positive"));
        }
        if !(0.0..=1.0).contains(&self.p_up) {
            return Err(Error::invalid(format!("nuclear population {} outside [0, 1]", self.p_up)));
        }
        if !(self.mw_rabi >= 0.0 && self.pi_duration > 0.0 && self.electron_sigma >= 0.0) {
            return Err(Error::invalid("MW Rabi, π duration and electron σ must be non-negative"));
        }
        Ok(())
    }
}

/// Averaged spectrum with the nuclear polarization before every pulse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OdmrSpectrum {
    pub frequencies: Vec<f64>,
    /// `1 − P(electron flipped)`.
    pub signal: Vec<f64>,
    pub stderr: Vec<f64>,
    /// Up-like nuclear population along the manifold axis.
    pub polarization: Vec<f64>,
    pub direction: SweepDirection,
    pub passes: usize,
    pub seed: u64,
}

/// Monte Carlo ODMR: each pass walks the sweep once, drawing an electron
/// detuning per pulse, recording the flip probability and resetting the
/// electron with nuclear dephasing. The nucleus carries over between points.
pub fn simulate_odmr(
    sweep: &OdmrSweep,
    model: &OdmrModelParams,
    sys: &SpinSystemParams,
    n_avg: usize,
    seed: u64,
) -> Result<OdmrSpectrum> {
    let direction = sweep.direction()?;
    model.validate()?;
    sys.validate()?;
    if n_avg == 0 {
        return Err(Error::invalid("need at least one averaging pass"));
    }
    let spectrum = manifold_spectrum(sys);
    let deltas = sweep.detunings(model.gamma_e_eff, sys.b_z);
    let m = sweep.manifold;
    let passes: Vec<(Vec<f64>, Vec<f64>)> = (0..n_avg)
        .into_par_iter()
        .map(|pass| {
            let mut rng = stream_rng(seed, stream_id(0, pass));
            odmr_pass(&deltas, m, model, sys, &spectrum, &mut rng)
        })
        .collect();
    let n = deltas.len();
    let mut signal = Vec::with_capacity(n);
    let mut stderr = Vec::with_capacity(n);
    let mut polarization = Vec::with_capacity(n);
    for k in 0..n {
        let col: Vec<f64> = passes.iter().map(|(s, _)| s[k]).collect();
        let (mean, se) = mean_and_stderr(&col);
        signal.push(mean);
        stderr.push(if se.is_finite() { se } else { 0.0 });
        let pol: Vec<f64> = passes.iter().map(|(_, p)| p[k]).collect();
        polarization.push(mean_and_stderr(&pol).0);
    }
    Ok(OdmrSpectrum { frequencies: sweep.frequencies.clone(), signal, stderr, polarization, direction, passes: n_avg, seed })
}

fn odmr_pass(
    deltas: &[f64],
    m: ElectronState,
    model: &OdmrModelParams,
    sys: &SpinSystemParams,
    spectrum: &ManifoldSpectrum,
    rng: &mut NoiseRng,
) -> (Vec<f64>, Vec<f64>) {
    let basis = spectrum.basis(m);
    let e = m.ket();
    let mut rho = Pair::from_matrix_unchecked(kron(&(e * e.adjoint()), &basis.diagonal_state(model.p_up)));
    let up = kron_ket(&e, &basis.up);
    let up_other = kron_ket(&m.flipped().ket(), &basis.up);
    let mut signal = Vec::with_capacity(deltas.len());
    let mut pol = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        pol.push(rho.overlap_unchecked(&up) + rho.overlap_unchecked(&up_other));
        let de = if model.electron_sigma > 0.0 {
            model.electron_sigma * rng.sample::<f64, _>(StandardNormal)
        } else {
            0.0
        };
        let h = pair_hamiltonian(sys, delta + de, model.mw_rabi, 0.0);
        rho = rho.transform(&h.propagator(model.pi_duration));
        signal.push(1.0 - rho.electron_population(m.flipped()));
        rho = spectrum.laser_reset(&rho, m, true);
    }
    (signal, pol)
}

/// Noise-averaged expected spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OdmrExpectation {
    pub signal: Vec<f64>,
    pub polarization: Vec<f64>,
}

/// Single-pulse response of the pair on a uniform detuning grid.
///
/// Between pulses the state is diagonal in the manifold's nuclear
/// eigenbasis, so one pulse plus reset acts on the up-like population `p`
/// as `f = p f_u + (1−p) f_d` (flip probability) and
/// `p' = p t_u + (1−p) t_d`. Each coefficient is linear in the state, so
/// its Gaussian average over the electron detuning is exact.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferTable {
    sys: SpinSystemParams,
    spectrum: ManifoldSpectrum,
    manifold: ElectronState,
    model: OdmrModelParams,
    start: f64,
    step: f64,
    /// `[f_u, f_d, t_u, t_d]` per grid node; empty without noise.
    raw: Vec<[f64; 4]>,
}

const GAUSS_SPAN: f64 = 7.0;
const NODES_PER_SIGMA: f64 = 20.0;

fn transfer_at(
    sys: &SpinSystemParams,
    spectrum: &ManifoldSpectrum,
    m: ElectronState,
    model: &OdmrModelParams,
    delta: f64,
) -> [f64; 4] {
    let u: Op4 = pair_hamiltonian(sys, delta, model.mw_rabi, 0.0).propagator(model.pi_duration);
    let basis = spectrum.basis(m);
    let other = 2 * m.flipped().index();
    let respond = |psi: Ket4| {
        let flip = psi[other].norm_sqr() + psi[other + 1].norm_sqr();
        let proj = |b: usize| (basis.up[0].conj() * psi[b] + basis.up[1].conj() * psi[b + 1]).norm_sqr();
        (flip, proj(0) + proj(2))
    };
    let (fu, tu) = respond(u * kron_ket(&m.ket(), &basis.up));
    let (fd, td) = respond(u * kron_ket(&m.ket(), &basis.down));
    [fu, fd, tu, td]
}

/// Tabulates the pulse response over `[lo, hi]` plus the Gaussian margin.
pub fn odmr_transfer_table(
    sys: &SpinSystemParams,
    model: &OdmrModelParams,
    manifold: ElectronState,
    lo: f64,
    hi: f64,
) -> Result<TransferTable> {
    model.validate()?;
    sys.validate()?;
    if !(lo <= hi) {
        return Err(Error::invalid(format!("empty detuning range [{lo}, {hi}]")));
    }
    let spectrum = manifold_spectrum(sys);
    let sigma = model.electron_sigma;
    let mut table =
        TransferTable { sys: *sys, spectrum, manifold, model: *model, start: lo, step: 0.0, raw: Vec::new() };
    if sigma > 0.0 {
        table.step = sigma / NODES_PER_SIGMA;
        table.start = lo - GAUSS_SPAN * sigma;
        let n = ((hi + GAUSS_SPAN * sigma - table.start) / table.step).ceil() as usize + 1;
        table.raw = (0..n)
            .map(|j| transfer_at(sys, &table.spectrum, manifold, model, table.start + table.step * j as f64))
            .collect();
    }
    Ok(table)
}

impl TransferTable {
    fn averaged(&self, delta: f64) -> [f64; 4] {
        let sigma = self.model.electron_sigma;
        if self.raw.is_empty() {
            return transfer_at(&self.sys, &self.spectrum, self.manifold, &self.model, delta);
        }
        let reach = GAUSS_SPAN * sigma;
        let j0 = (((delta - reach - self.start) / self.step).ceil().max(0.0)) as usize;
        let j1 = (((delta + reach - self.start) / self.step).floor() as usize).min(self.raw.len() - 1);
        let mut acc = [0.0; 4];
        let mut wsum = 0.0;
        for j in j0..=j1 {
            let x = (self.start + self.step * j as f64 - delta) / sigma;
            let w = (-0.5 * x * x).exp();
            wsum += w;
            for (a, r) in acc.iter_mut().zip(&self.raw[j]) {
                *a += w * r;
            }
        }
        acc.map(|a| a / wsum)
    }

    /// Propagates the polarization through the sweep.
    pub fn spectrum(&self, deltas: &[f64], p_up: f64) -> OdmrExpectation {
        let mut p = p_up;
        let mut signal = Vec::with_capacity(deltas.len());
        let mut polarization = Vec::with_capacity(deltas.len());
        for &d in deltas {
            let [fu, fd, tu, td] = self.averaged(d);
            polarization.push(p);
            signal.push(1.0 - (p * fu + (1.0 - p) * fd));
            p = p * tu + (1.0 - p) * td;
        }
        OdmrExpectation { signal, polarization }
    }
}

/// Exact noise-averaged counterpart of [`simulate_odmr`].
pub fn odmr_expected(sweep: &OdmrSweep, model: &OdmrModelParams, sys: &SpinSystemParams) -> Result<OdmrExpectation> {
    sweep.direction()?;
    let deltas = sweep.detunings(model.gamma_e_eff, sys.b_z);
    let (lo, hi) = deltas.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &d| (a.min(d), b.max(d)));
    let table = odmr_transfer_table(sys, model, sweep.manifold, lo, hi)?;
    Ok(table.spectrum(&deltas, model.p_up))
}
