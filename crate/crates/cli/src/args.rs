// Copyright 2026 The spinmem Authors
// SPDX-License-Identifier: Apache-2.0

//! Command-line surface. Every field name doubles as the JSON config key,
//! so units live in the names.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "spinmem", version, about = "Electron-nuclear spin memory simulator")]
pub struct Cli {
    /// JSON config (or a previous run's sidecar). Flags on the command line
    /// take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Output prefix: writes PREFIX.csv and PREFIX.json.
    #[arg(long, global = true, value_name = "PREFIX")]
    pub out: Option<PathBuf>,
    /// Worker threads. Overrides SPINMEM_THREADS; never changes results.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monte Carlo simulation of a canonical sequence.
    Simulate(SimulateArgs),
    /// Fit the ODMR model to measured spectra.
    FitOdmr(FitOdmrArgs),
    /// Closed-form decay laws, coherence and memory times.
    Decay(DecayArgs),
    /// Fit the noise correlation time to echo decays.
    FitTauC(FitTauCArgs),
    /// Gate fidelity over a detuning × amplitude-error grid.
    FidelityMap(FidelityMapArgs),
    /// RF duty cycle of an echo train.
    DutyCycle(DutyCycleArgs),
    /// dCRAB optimization of the polarization pulse.
    OptimizePulse(OptimizePulseArgs),
    /// Manifold frequencies and hyperfine inversion.
    Spectrum(SpectrumArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::FitOdmr(_) => "fit-odmr",
            Command::Decay(_) => "decay",
            Command::FitTauC(_) => "fit-tau-c",
            Command::FidelityMap(_) => "fidelity-map",
            Command::DutyCycle(_) => "duty-cycle",
            Command::OptimizePulse(_) => "optimize-pulse",
            Command::Spectrum(_) => "spectrum",
        }
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SystemArgs {
    /// Nuclear splitting in the ↓e manifold.
    #[arg(long, default_value_t = 2_489_730.0)]
    pub wrf1_hz: f64,
    /// Nuclear splitting in the ↑e manifold.
    #[arg(long, default_value_t = 493_620.0)]
    pub wrf2_hz: f64,
    #[arg(long, default_value_t = 97.159)]
    pub b_mt: f64,
    #[arg(long, default_value_t = 10.7084)]
    pub gamma_n_mhz_per_t: f64,
    #[arg(long, default_value_t = 31.615)]
    pub gamma_e_ghz_per_t: f64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct NoiseArgs {
    /// Nuclear detuning noise σ.
    #[arg(long, default_value_t = 112.5)]
    pub sigma_hz: f64,
    /// Nuclear detuning correlation time.
    #[arg(long, default_value_t = 829.0)]
    pub tau_c_s: f64,
    /// Relative Rabi-amplitude noise σ.
    #[arg(long, default_value_t = 0.005)]
    pub amp_sigma: f64,
    #[arg(long, default_value_t = 500.0)]
    pub amp_tau_us: f64,
    /// Quasi-static electron detuning σ.
    #[arg(long, default_value_t = 146.0)]
    pub electron_sigma_khz: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimKind {
    Rabi,
    Ramsey,
    Hahn,
    Cpmg,
    Xy8,
    SpinPump,
    Odmr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Instantaneous,
    Finite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Transition {
    Mw1,
    Mw2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Manifold {
    Up,
    Down,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    #[arg(value_enum)]
    pub kind: SimKind,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Trajectories per point (ODMR: sweep passes).
    #[arg(long, default_value_t = 1000)]
    pub traj: usize,
    /// Sweep start: drive time (rabi), free time (ramsey) or π spacing τ̃.
    #[arg(long)]
    pub start_ms: Option<f64>,
    #[arg(long)]
    pub stop_ms: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    /// π pulses (cpmg, xy8) or repetitions (spin-pump).
    #[arg(long, default_value_t = 8)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = Mode::Instantaneous)]
    pub mode: Mode,
    #[arg(long, default_value_t = 11.73)]
    pub rf_rabi_khz: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub noise: NoiseArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub system: SystemArgs,
    #[arg(long, default_value_t = 1.4)]
    pub mw_pi_us: f64,
    #[arg(long, value_enum, default_value_t = Transition::Mw2)]
    pub transition: Transition,
    #[arg(long)]
    pub start_mhz: Option<f64>,
    #[arg(long)]
    pub stop_mhz: Option<f64>,
    #[arg(long, value_enum, default_value_t = Manifold::Down)]
    pub manifold: Manifold,
    /// Initial up-like nuclear population (odmr).
    #[arg(long, default_value_t = 0.5)]
    pub p_up: f64,
    #[arg(long, default_value_t = 349.0)]
    pub mw_rabi_khz: f64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct FitOdmrArgs {
    /// `MANIFOLD:FILE`, repeatable. FILE is CSV whose first two columns are
    /// MW frequency (MHz) and signal, e.g. the output of `simulate odmr`.
    #[arg(long)]
    pub spectrum: Vec<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 150)]
    pub generations: usize,
    #[arg(long, default_value_t = 96.9)]
    pub b_min_mt: f64,
    #[arg(long, default_value_t = 97.4)]
    pub b_max_mt: f64,
    #[arg(long, default_value_t = 31.552)]
    pub gamma_e_min_ghz_per_t: f64,
    #[arg(long, default_value_t = 31.678)]
    pub gamma_e_max_ghz_per_t: f64,
    #[arg(long, default_value_t = 2_489_730.0)]
    pub wrf1_hz: f64,
    #[arg(long, default_value_t = 493_620.0)]
    pub wrf2_hz: f64,
    #[arg(long, default_value_t = 10.7084)]
    pub gamma_n_mhz_per_t: f64,
    #[arg(long, default_value_t = 349.0)]
    pub mw_rabi_khz: f64,
    #[arg(long, default_value_t = 146.0)]
    pub electron_sigma_khz: f64,
    #[arg(long, default_value_t = 0.97)]
    pub r2_threshold: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecayKind {
    Exact,
    Approx,
    T2,
    Memory,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct DecayArgs {
    #[arg(value_enum)]
    pub kind: DecayKind,
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    /// π spacing τ̃ (memory); exact and approx sweep it instead.
    #[arg(long, default_value_t = 24.0)]
    pub tau_ms: f64,
    #[arg(long, default_value_t = 1.0)]
    pub start_ms: f64,
    #[arg(long, default_value_t = 400.0)]
    pub stop_ms: f64,
    #[arg(long, default_value_t = 41)]
    pub points: usize,
    #[arg(long, default_value_t = 112.5)]
    pub sigma_hz: f64,
    #[arg(long, default_value_t = 829.0)]
    pub tau_c_s: f64,
    /// Hahn-echo T2; derived from σ and τc when absent.
    #[arg(long)]
    pub t2h_ms: Option<f64>,
    #[arg(long)]
    pub t1e_s: Option<f64>,
    /// Memory time from a finite-pulse XY8 Monte Carlo run.
    #[arg(long)]
    pub simulate: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 400)]
    pub traj: usize,
    #[arg(long, default_value_t = 11.73)]
    pub rf_rabi_khz: f64,
    #[arg(long, default_value_t = 0.005)]
    pub amp_sigma: f64,
    #[arg(long, default_value_t = 500.0)]
    pub amp_tau_us: f64,
    /// Longest simulated storage time.
    #[arg(long, default_value_t = 64.0)]
    pub horizon_s: f64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct FitTauCArgs {
    /// `N:FILE`, repeatable. FILE is CSV whose first two columns are the
    /// π spacing τ̃ (ms) and the coherence.
    #[arg(long)]
    pub data: Vec<String>,
    #[arg(long, default_value_t = 112.5)]
    pub sigma_hz: f64,
    #[arg(long, default_value_t = 100.0)]
    pub tau_c_start_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FidelityKind {
    HalfPi,
    Pi,
    Cpmg8,
    Xy8,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct FidelityMapArgs {
    #[arg(value_enum)]
    pub sequence: FidelityKind,
    /// Grid half-width in detuning; defaults to 3σ of 112.5 Hz.
    #[arg(long, default_value_t = 337.5)]
    pub delta_max_hz: f64,
    #[arg(long, default_value_t = 0.015)]
    pub eps_max: f64,
    #[arg(long, default_value_t = 21)]
    pub points: usize,
    #[arg(long, default_value_t = 11.73)]
    pub rabi_khz: f64,
    #[arg(long, default_value_t = 10.0)]
    pub spacing_ms: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrainKind {
    Hahn,
    Cpmg,
    Xy8,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct DutyCycleArgs {
    #[arg(value_enum)]
    pub sequence: TrainKind,
    #[arg(long, default_value_t = 8)]
    pub n: usize,
    /// π spacing τ̃.
    #[arg(long, default_value_t = 24.0)]
    pub tau_ms: f64,
    #[arg(long, default_value_t = 11.73)]
    pub rf_rabi_khz: f64,
    #[arg(long, value_enum, default_value_t = Mode::Finite)]
    pub mode: Mode,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct OptimizePulseArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 2950.0)]
    pub duration_ns: f64,
    #[arg(long, default_value_t = 10)]
    pub super_iterations: usize,
    /// Evaluations per super-iteration.
    #[arg(long, default_value_t = 1000)]
    pub evaluations: usize,
    /// Random frequencies per channel per super-iteration.
    #[arg(long, default_value_t = 4)]
    pub basis_size: usize,
    #[arg(long, default_value_t = 10.0)]
    pub max_harmonic: f64,
    #[arg(long, default_value_t = 100)]
    pub pool_size: usize,
    #[arg(long, default_value_t = 5000)]
    pub eval_pool_size: usize,
    /// Peak Rabi frequency.
    #[arg(long, default_value_t = 2000.0)]
    pub clamp_khz: f64,
    #[arg(long, default_value_t = 0.5)]
    pub seed_amplitude: f64,
    #[arg(long, default_value_t = 100.0)]
    pub rise_ns: f64,
    #[arg(long, default_value_t = 5.0)]
    pub step_ns: f64,
    /// Quasi-static electron detuning σ; 0 optimizes without noise.
    #[arg(long, default_value_t = 146.0)]
    pub electron_sigma_khz: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub system: SystemArgs,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SpectrumArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub system: SystemArgs,
    /// Forward mode: couplings instead of measured splittings.
    #[arg(long, requires = "a_zx_khz")]
    pub a_zz_khz: Option<f64>,
    #[arg(long, requires = "a_zz_khz")]
    pub a_zx_khz: Option<f64>,
}
