// Copyright 2026 The spinmem Authors
// SPDX-License-Identifier: Apache-2.0

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{InitialState, Model, PulseSequence, Readout, SequenceElement};
use crate::error::{Error, Result};
use crate::noise::{ou_step, ou_step_integrated, sample_quasistatic, stream_id, stream_rng, NoiseRng, OuParams};
use crate::quantum::{kron, Hermitian, Ket2, Op2, Op4, Pair};
use crate::spin::{manifold_spectrum, pair_hamiltonian, reduced, ManifoldSpectrum, SpinSystemParams};
use crate::stats::mean_and_stderr;

/// Noise channels seen by the engine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Nuclear detuning `δ(t)`, rad/s.
    pub detuning: OuParams,
    /// Relative Rabi error `ε(t)`.
    pub amplitude: OuParams,
    /// Electron detuning; drawn afresh from its stationary law for every
    /// MW or shaped pulse.
    pub electron: OuParams,
}

impl NoiseModel {
    pub fn silent() -> Self {
        Self { detuning: OuParams::silent(), amplitude: OuParams::silent(), electron: OuParams::silent() }
    }

    /// `σ_δ = 2π·112.5 Hz`, `τ_c = 829 s`; `σ_ε = 0.005`, `τ_Ω = 500 µs`;
    /// quasi-static electron detuning with `σ = 2π·146 kHz`.
    pub fn reference() -> Self {
        Self {
            detuning: OuParams { sigma: crate::hz(112.5), tau_c: 829.0 },
            amplitude: OuParams { sigma: 0.005, tau_c: 500e-6 },
            electron: OuParams { sigma: crate::hz(146e3), tau_c: f64::INFINITY },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_traj: usize,
    pub seed: u64,
}

impl SimConfig {
    fn validate(&self) -> Result<()> {
        if self.n_traj == 0 {
            return Err(Error::invalid("need at least one trajectory"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointEstimate {
    pub mean: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationResult {
    pub sweep: Vec<f64>,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    pub trajectories: usize,
    pub seed: u64,
}

/// Averages the readout of one sequence over `cfg.n_traj` trajectories.
pub fn simulate_sequence(
    seq: &PulseSequence,
    sys: &SpinSystemParams,
    noise: &NoiseModel,
    cfg: &SimConfig,
) -> Result<SimulationResult> {
    simulate_sweep(&[0.0], |_| Ok(seq.clone()), sys, noise, cfg)
}

/// Runs `build(x)` for each sweep value. Point `i`, trajectory `j` uses
/// RNG stream `(i << 32) | j` of `cfg.seed`.
pub fn simulate_sweep<F>(
    values: &[f64],
    build: F,
    sys: &SpinSystemParams,
    noise: &NoiseModel,
    cfg: &SimConfig,
) -> Result<SimulationResult>
where
    F: Fn(f64) -> Result<PulseSequence>,
{
    cfg.validate()?;
    let mut mean = Vec::with_capacity(values.len());
    let mut stderr = Vec::with_capacity(values.len());
    for (point, &x) in values.iter().enumerate() {
        let seq = build(x)?;
        let est = estimate_point(&seq, sys, noise, cfg, point)?;
        mean.push(est.mean);
        stderr.push(est.stderr);
    }
    Ok(SimulationResult { sweep: values.to_vec(), mean, stderr, trajectories: cfg.n_traj, seed: cfg.seed })
}

fn estimate_point(
    seq: &PulseSequence,
    sys: &SpinSystemParams,
    noise: &NoiseModel,
    cfg: &SimConfig,
    point: usize,
) -> Result<PointEstimate> {
    seq.validate()?;
    let samples: Vec<f64> = match seq.model {
        Model::Reduced => {
            let end = readout_index(seq);
            (0..cfg.n_traj)
                .into_par_iter()
                .map(|j| {
                    let mut rng = stream_rng(cfg.seed, stream_id(point, j));
                    run_reduced(seq, noise, &mut rng, &[end])[0]
                })
                .collect()
        }
        Model::Full => {
            sys.validate()?;
            let spectrum = manifold_spectrum(sys);
            (0..cfg.n_traj)
                .into_par_iter()
                .map(|j| {
                    let mut rng = stream_rng(cfg.seed, stream_id(point, j));
                    run_full(seq, sys, &spectrum, noise, &mut rng)
                })
                .collect()
        }
    };
    Ok(summarize(&samples))
}

/// Reads a reduced-model sequence out after each prefix length in
/// `checkpoints` along the same trajectories. With a differential readout
/// the final wait and pulse form a tail that is applied virtually at every
/// earlier checkpoint, so a checkpoint placed before an inner wait of an
/// echo train reads out a complete, shorter echo.
pub fn simulate_checkpoints(
    seq: &PulseSequence,
    checkpoints: &[usize],
    noise: &NoiseModel,
    cfg: &SimConfig,
) -> Result<Vec<PointEstimate>> {
    cfg.validate()?;
    seq.validate()?;
    if seq.model != Model::Reduced {
        return Err(Error::ModelMismatch { model: "full", element: "checkpoint readout".into() });
    }
    let end = readout_index(seq);
    let tail = tail_start(seq);
    if checkpoints.windows(2).any(|w| w[1] < w[0]) || checkpoints.iter().any(|&c| c > tail && c != end) {
        return Err(Error::invalid(format!("checkpoints must be sorted and at most {tail} (or exactly {end})")));
    }
    let runs: Vec<Vec<f64>> = (0..cfg.n_traj)
        .into_par_iter()
        .map(|j| {
            let mut rng = stream_rng(cfg.seed, stream_id(0, j));
            run_reduced(seq, noise, &mut rng, checkpoints)
        })
        .collect();
    Ok((0..checkpoints.len())
        .map(|k| {
            let column: Vec<f64> = runs.iter().map(|r| r[k]).collect();
            summarize(&column)
        })
        .collect())
}

fn summarize(samples: &[f64]) -> PointEstimate {
    let (mean, stderr) = mean_and_stderr(samples);
    PointEstimate { mean: mean.clamp(0.0, 1.0), stderr: if stderr.is_finite() { stderr } else { 0.0 } }
}

fn readout_index(seq: &PulseSequence) -> usize {
    match seq.readout {
        Readout::Differential(_) => seq.elements.len() - 1,
        _ => seq.elements.len(),
    }
}

#[derive(Clone, Copy)]
struct ReducedNoise {
    delta: f64,
    eps: f64,
}

fn rz(phi: f64) -> Op2 {
    let a = Complex64::from_polar(1.0, -0.5 * phi);
    Op2::new(a, Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), a.conj())
}

fn rf_unitary(el: &SequenceElement, st: &ReducedNoise, offset: f64) -> Op2 {
    match el {
        SequenceElement::RfPulse { duration, angle, drive, .. } => {
            if *duration == 0.0 {
                reduced(0.0, *angle, drive.phase).propagator(1.0)
            } else {
                let h = reduced(st.delta + offset + drive.detuning, drive.rabi * (1.0 + st.eps), drive.phase);
                h.propagator(*duration)
            }
        }
        _ => unreachable!("validated reduced sequences hold only RF pulses and waits"),
    }
}

fn run_reduced(seq: &PulseSequence, noise: &NoiseModel, rng: &mut NoiseRng, checkpoints: &[usize]) -> Vec<f64> {
    let mut psi: Ket2 = match seq.initial {
        InitialState::Level(l) => l.ket(),
        InitialState::Pair { .. } => unreachable!("validated"),
    };
    let mut st = ReducedNoise {
        delta: sample_quasistatic(&noise.detuning, rng),
        eps: sample_quasistatic(&noise.amplitude, rng),
    };
    let read = |psi: &Ket2, st: &ReducedNoise| -> f64 {
        match seq.readout {
            Readout::Level(l) => psi[l.index()].norm_sqr(),
            Readout::Differential(l) => {
                let last = seq.elements.last().expect("validated");
                let mut flipped = last.clone();
                if let SequenceElement::RfPulse { drive, .. } = &mut flipped {
                    drive.phase += std::f64::consts::PI;
                }
                let a = (rf_unitary(last, st, seq.detuning_offset) * psi)[l.index()].norm_sqr();
                let b = (rf_unitary(&flipped, st, seq.detuning_offset) * psi)[l.index()].norm_sqr();
                (0.5 * (1.0 + a - b)).clamp(0.0, 1.0)
            }
            _ => unreachable!("validated"),
        }
    };
    let end = readout_index(seq);
    let tail = tail_start(seq);
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut next = 0;
    for (i, el) in seq.elements.iter().enumerate() {
        while next < checkpoints.len() && checkpoints[next] == i {
            if i == end {
                out.push(read(&psi, &st));
            } else {
                // finish the echo on copies so the main trajectory is untouched
                let (mut p, mut s, mut r) = (psi, st, rng.clone());
                for t in &seq.elements[tail..end] {
                    step_reduced(t, seq.detuning_offset, noise, &mut p, &mut s, &mut r);
                }
                out.push(read(&p, &s));
            }
            next += 1;
        }
        if next == checkpoints.len() {
            break;
        }
        step_reduced(el, seq.detuning_offset, noise, &mut psi, &mut st, rng);
    }
    while next < checkpoints.len() {
        out.push(read(&psi, &st));
        next += 1;
    }
    out
}

/// First element of the readout tail: the final wait, if the readout pulse
/// is preceded by one, else the readout index itself.
fn tail_start(seq: &PulseSequence) -> usize {
    let end = readout_index(seq);
    match end.checked_sub(1).map(|i| &seq.elements[i]) {
        Some(SequenceElement::Wait { .. }) if end < seq.elements.len() => end - 1,
        _ => end,
    }
}

fn step_reduced(el: &SequenceElement, offset: f64, noise: &NoiseModel, psi: &mut Ket2, st: &mut ReducedNoise, rng: &mut NoiseRng) {
    match el {
        SequenceElement::Wait { duration } => {
            let (delta, phase) = ou_step_integrated(st.delta, *duration, &noise.detuning, rng);
            *psi = rz(phase + offset * duration) * *psi;
            st.delta = delta;
            st.eps = ou_step(st.eps, *duration, &noise.amplitude, rng);
        }
        SequenceElement::RfPulse { duration, .. } => {
            *psi = rf_unitary(el, st, offset) * *psi;
            if *duration > 0.0 {
                st.delta = ou_step(st.delta, *duration, &noise.detuning, rng);
                st.eps = ou_step(st.eps, *duration, &noise.amplitude, rng);
            }
        }
        _ => unreachable!("validated"),
    }
}

/// Embeds a nuclear unitary acting in the manifold `block` (0 = `↑e`).
fn manifold_selective(u: &Op2, block: usize) -> Op4 {
    let mut m = Op4::identity();
    for r in 0..2 {
        for c in 0..2 {
            m[(2 * block + r, 2 * block + c)] = u[(r, c)];
        }
    }
    m
}

fn run_full(
    seq: &PulseSequence,
    sys: &SpinSystemParams,
    spectrum: &ManifoldSpectrum,
    noise: &NoiseModel,
    rng: &mut NoiseRng,
) -> f64 {
    let mut rho = match seq.initial {
        InitialState::Pair { electron, nuclear_up } => {
            let e = electron.ket();
            let nuc = spectrum.basis(electron).diagonal_state(nuclear_up);
            Pair::from_matrix_unchecked(kron(&(e * e.adjoint()), &nuc))
        }
        InitialState::Level(_) => unreachable!("validated"),
    };
    for el in &seq.elements {
        match el {
            SequenceElement::MwPulse { duration, drive } => {
                let de = sample_quasistatic(&noise.electron, rng);
                let h = pair_hamiltonian(sys, drive.detuning + de, drive.rabi, drive.phase);
                rho = rho.transform(&h.propagator(*duration));
            }
            SequenceElement::Wait { duration } => {
                if *duration > 0.0 {
                    let h = pair_hamiltonian(sys, 0.0, 0.0, 0.0);
                    rho = rho.transform(&h.propagator(*duration));
                }
            }
            SequenceElement::LaserReset { target, dephase, .. } => {
                rho = spectrum.laser_reset(&rho, *target, *dephase);
            }
            SequenceElement::RfPulse { duration, angle, drive, manifold } => {
                let b = spectrum.basis(*manifold).matrix();
                let u = if *duration == 0.0 {
                    reduced(0.0, *angle, drive.phase).propagator(1.0)
                } else {
                    reduced(drive.detuning, drive.rabi, drive.phase).propagator(*duration)
                };
                rho = rho.transform(&manifold_selective(&(b * u * b.adjoint()), manifold.index()));
            }
            SequenceElement::ShapedPulse { shape, .. } => {
                let de = sample_quasistatic(&noise.electron, rng);
                let dt = shape.step();
                let mut u = Op4::identity();
                for (rabi, phase) in shape.samples() {
                    let h = pair_hamiltonian(sys, shape.frame_detuning() + de, rabi, phase);
                    u = h.propagator(dt) * u;
                }
                rho = rho.transform(&u);
            }
        }
    }
    match seq.readout {
        Readout::Eigenstate(v) => rho.overlap_unchecked(&spectrum.eigenvector(v)),
        Readout::Electron(e) => rho.electron_population(e),
        _ => unreachable!("validated"),
    }
}
