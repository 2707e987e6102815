// Copyright 2026 The spinmem Authors
// SPDX-License-Identifier: Apache-2.0

//! Memory time of an XY8-protected nuclear state with finite, noisy pulses.

use serde::{Deserialize, Serialize};

use super::decay::combine_t1;
use super::fit::{fit_decay_time, DecayFit, DecayFitOptions, Exponent};
use crate::error::{Error, Result};
use crate::sequences::{build_sequence, simulate_checkpoints, BuildParams, NoiseModel, PulseMode, SequenceKind, SimConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MemorySimParams {
    /// Centre-to-centre π spacing, s.
    pub tau_tilde: f64,
    /// Nuclear Rabi frequency, rad/s.
    pub rabi: f64,
    /// Longest train simulated, in XY8 blocks.
    pub max_blocks: usize,
    /// Readout every this many blocks.
    pub stride: usize,
    pub t1e: Option<f64>,
}

impl MemorySimParams {
    /// 10 ms spacing at `Ω = 2π·11.73 kHz`, out to 64 s, `T1e = 20.7 s`.
    pub fn reference(tau_tilde: f64) -> Self {
        let max_blocks = ((64.0 / (8.0 * tau_tilde)).ceil() as usize).max(8);
        Self { tau_tilde, rabi: crate::hz(11.73e3), max_blocks, stride: (max_blocks / 16).max(1), t1e: Some(20.7) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemorySimResult {
    /// Storage time `k τ̃` after `k` pulses, s.
    pub times: Vec<f64>,
    /// `2S − 1` of the differential echo signal.
    pub coherence: Vec<f64>,
    pub stderr: Vec<f64>,
    /// Stretched-exponential fit of the coherence, baseline fixed at zero.
    pub fit: DecayFit,
    /// Decay time from detuning noise and pulse errors alone, s.
    pub t_pulses: f64,
    /// Combined with electron relaxation, s.
    pub t_total: f64,
}

/// Simulates one long finite-pulse XY8 train and reads it out after every
/// `stride` blocks; each readout completes the echo virtually.
pub fn simulate_memory_time(p: &MemorySimParams, noise: &NoiseModel, cfg: &SimConfig) -> Result<MemorySimResult> {
    if p.max_blocks == 0 || p.stride == 0 || p.max_blocks / p.stride < 4 {
        return Err(Error::invalid("need at least four readouts (max_blocks / stride ≥ 4)"));
    }
    let n = 8 * p.max_blocks;
    let bp = BuildParams { rf_rabi: p.rabi, mode: PulseMode::Finite, ..Default::default() };
    let seq = build_sequence(&SequenceKind::Xy8 { n, tau: 0.5 * p.tau_tilde }, &bp)?;
    // pulse k sits at element 2k; the wait after it closes the prefix
    let counts: Vec<usize> = (p.stride..=p.max_blocks).step_by(p.stride).map(|b| 8 * b).collect();
    let marks: Vec<usize> = counts.iter().map(|&k| 2 * k + 1).collect();
    let est = simulate_checkpoints(&seq, &marks, noise, cfg)?;
    let times: Vec<f64> = counts.iter().map(|&k| k as f64 * p.tau_tilde).collect();
    let coherence: Vec<f64> = est.iter().map(|e| 2.0 * e.mean - 1.0).collect();
    let stderr: Vec<f64> = est.iter().map(|e| 2.0 * e.stderr).collect();
    let mut t = vec![0.0];
    t.extend(&times);
    let mut y = vec![1.0];
    y.extend(&coherence);
    let fit = fit_decay_time(&t, &y, &DecayFitOptions { exponent: Exponent::Free, offset: Some(0.0) })?;
    let t_pulses = fit.estimate.t2;
    Ok(MemorySimResult { times, coherence, stderr, t_total: combine_t1(t_pulses, p.t1e)?, fit, t_pulses })
}
