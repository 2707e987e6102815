// Copyright 2026 The spinmem Authors
// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sequences::PulseShape;

/// One Fourier component `s·sin(2πft) + c·cos(2πft)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourierTerm {
    /// Hz.
    pub frequency: f64,
    pub sin: f64,
    pub cos: f64,
}

impl FourierTerm {
    fn eval(&self, t: f64) -> f64 {
        let (s, c) = (crate::TWO_PI * self.frequency * t).sin_cos();
        self.sin * s + self.cos * c
    }
}

/// Electron drive `Ω(t)[cos φ(t) Sx + sin φ(t) Sy]` in a frame detuned by
/// `frame_detuning` from the electron resonance. Amplitude terms are in
/// rad/s, phase terms in rad.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapedPulse {
    pub duration: f64,
    pub amplitude: Vec<FourierTerm>,
    pub phase: Vec<FourierTerm>,
    /// Peak Rabi frequency, rad/s.
    pub clamp: f64,
    /// Gaussian edge length of the flattop envelope, s.
    pub rise: f64,
    /// Propagation step, s.
    pub step: f64,
    /// Rad/s.
    pub frame_detuning: f64,
}

impl ShapedPulse {
    /// A pulse with no Fourier terms, which never drives.
    pub fn zero(duration: f64, clamp: f64, rise: f64, step: f64, frame_detuning: f64) -> Result<Self> {
        let p = Self { duration, amplitude: Vec::new(), phase: Vec::new(), clamp, rise, step, frame_detuning };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rise > 0.0 && self.duration > 2.0 * self.rise) {
            return Err(Error::invalid(format!(
                "duration {} s must exceed twice the rise time {} s",
                self.duration, self.rise
            )));
        }
        if !(self.clamp > 0.0) || !self.clamp.is_finite() {
            return Err(Error::invalid(format!("Rabi clamp must be positive, got {}", self.clamp)));
        }
        if !(self.step > 0.0 && self.step <= self.rise) {
            return Err(Error::invalid(format!("step must lie in (0, rise], got {}", self.step)));
        }
        if self.amplitude.iter().chain(&self.phase).any(|t| !(t.frequency.is_finite() && t.sin.is_finite() && t.cos.is_finite())) {
            return Err(Error::invalid("Fourier terms must be finite"));
        }
        Ok(())
    }

    /// Flattop envelope: Gaussian edges with `σ = rise/3`, offset and
    /// rescaled to reach exactly 0 at both ends.
    pub fn envelope(&self, t: f64) -> f64 {
        let edge = t.min(self.duration - t);
        if edge >= self.rise {
            return 1.0;
        }
        if edge <= 0.0 {
            return 0.0;
        }
        let s = self.rise / 3.0;
        let g = |x: f64| (-0.5 * ((x - self.rise) / s).powi(2)).exp();
        let g0 = g(0.0);
        ((g(edge) - g0) / (1.0 - g0)).max(0.0)
    }

    /// `(Ω, φ)` at `t`, with `Ω ∈ [0, clamp]`; a negative Fourier amplitude
    /// becomes a π phase shift.
    pub fn eval(&self, t: f64) -> (f64, f64) {
        let t = t.clamp(0.0, self.duration);
        let raw = self.envelope(t) * self.amplitude.iter().map(|f| f.eval(t)).sum::<f64>();
        let mut phase = self.phase.iter().map(|f| f.eval(t)).sum::<f64>();
        if raw < 0.0 {
            phase += PI;
        }
        (raw.abs().min(self.clamp), phase)
    }

    pub fn steps(&self) -> usize {
        (self.duration / self.step).round().max(1.0) as usize
    }

    /// Midpoint samples of the piecewise-constant propagation grid.
    pub fn grid(&self) -> Vec<(f64, f64)> {
        let n = self.steps();
        let dt = self.duration / n as f64;
        (0..n).map(|k| self.eval((k as f64 + 0.5) * dt)).collect()
    }
}

impl PulseShape for ShapedPulse {
    fn step(&self) -> f64 {
        self.duration / self.steps() as f64
    }

    fn samples(&self) -> Vec<(f64, f64)> {
        self.grid()
    }

    fn frame_detuning(&self) -> f64 {
        self.frame_detuning
    }
}
