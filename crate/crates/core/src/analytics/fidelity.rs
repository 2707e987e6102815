// Copyright 2026 The spinmem Authors
// SPDX-License-Identifier: Apache-2.0

//! Gate fidelities of nuclear pulses and pulse trains under frozen
//! detuning and amplitude errors, and RF duty-cycle bookkeeping.

use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{Hermitian, Op2};
use crate::sequences::{PulseSequence, SequenceElement};
use crate::spin::reduced;

/// `|Tr(U_ideal† U_actual)| / 2`.
pub fn pulse_fidelity(actual: &Op2, ideal: &Op2) -> f64 {
    ((ideal.adjoint() * actual).trace().norm() / 2.0).min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FidelitySequence {
    HalfPi,
    Pi,
    /// Eight `π|y` pulses.
    Cpmg8,
    /// One `x y x y y x y x` block.
    Xy8,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FidelityParams {
    /// Nominal Rabi frequency, rad/s.
    pub rabi: f64,
    /// Centre-to-centre π-pulse spacing of the trains, s.
    pub spacing: f64,
}

impl Default for FidelityParams {
    fn default() -> Self {
        Self { rabi: crate::hz(11.73e3), spacing: 10e-3 }
    }
}

/// Propagator of `seq` with constant detuning `delta` and relative
/// amplitude error `eps`. Trains are `[s/2 − π − s/2]×8` in edge-to-edge
/// free time, so the π centres sit `s` apart.
pub fn sequence_propagator(seq: FidelitySequence, delta: f64, eps: f64, p: &FidelityParams) -> Op2 {
    let rabi = p.rabi * (1.0 + eps);
    let pulse = |angle: f64, phase: f64| reduced(delta, rabi, phase).propagator(angle / p.rabi);
    let train = |phases: &[f64; 8]| {
        let free = reduced(delta, 0.0, 0.0).propagator(0.5 * p.spacing - 0.5 * PI / p.rabi);
        phases.iter().fold(Op2::identity(), |u, &ph| free * pulse(PI, ph) * free * u)
    };
    match seq {
        FidelitySequence::HalfPi => pulse(FRAC_PI_2, 0.0),
        FidelitySequence::Pi => pulse(PI, 0.0),
        FidelitySequence::Cpmg8 => train(&[FRAC_PI_2; 8]),
        FidelitySequence::Xy8 => {
            let (x, y) = (0.0, FRAC_PI_2);
            train(&[x, y, x, y, y, x, y, x])
        }
    }
}

/// Fidelity of `seq` against its error-free propagator.
pub fn sequence_fidelity(seq: FidelitySequence, delta: f64, eps: f64, p: &FidelityParams) -> f64 {
    pulse_fidelity(&sequence_propagator(seq, delta, eps, p), &sequence_propagator(seq, 0.0, 0.0, p))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityMap {
    pub sequence: FidelitySequence,
    /// rad/s
    pub deltas: Vec<f64>,
    pub eps: Vec<f64>,
    /// `values[i][j]` at `deltas[i]`, `eps[j]`.
    pub values: Vec<Vec<f64>>,
}

pub fn fidelity_map(seq: FidelitySequence, deltas: &[f64], eps: &[f64], p: &FidelityParams) -> Result<FidelityMap> {
    if !(p.rabi > 0.0) {
        return Err(Error::invalid(format!("Rabi frequency must be positive, got {}", p.rabi)));
    }
    if matches!(seq, FidelitySequence::Cpmg8 | FidelitySequence::Xy8) && !(p.spacing >= PI / p.rabi) {
        return Err(Error::invalid(format!("spacing {} s is shorter than a π pulse", p.spacing)));
    }
    if deltas.iter().chain(eps).any(|v| !v.is_finite()) || eps.iter().any(|e| e.abs() >= 1.0) {
        return Err(Error::invalid("grid values must be finite with |ε| < 1"));
    }
    let values = deltas
        .par_iter()
        .map(|&d| eps.iter().map(|&e| sequence_fidelity(seq, d, e, p)).collect())
        .collect();
    Ok(FidelityMap { sequence: seq, deltas: deltas.to_vec(), eps: eps.to_vec(), values })
}

/// RF-on time over total duration. Instantaneous pulses count their
/// nominal length `angle / Ω`.
pub fn duty_cycle(seq: &PulseSequence) -> Result<f64> {
    let total = seq.total_duration();
    if !(total > 0.0) {
        return Err(Error::invalid("sequence has zero duration"));
    }
    let rf: f64 = seq
        .elements
        .iter()
        .map(|el| match el {
            SequenceElement::RfPulse { duration, angle, drive, .. } => {
                if *duration > 0.0 {
                    *duration
                } else {
                    angle.abs() / drive.rabi
                }
            }
            _ => 0.0,
        })
        .sum();
    Ok(rf / total)
}
