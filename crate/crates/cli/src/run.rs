// Copyright 2026 The spinmem Authors
// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::PI;
use std::path::Path;

use serde_json::json;
use spinmem_core::analytics::{
    decay_rate_approx, decay_rate_exact, duty_cycle, fidelity_map, fit_correlation_time, hahn_t2, memory_time,
    sequence_fidelity, simulate_memory_time, t2_exact, t2_for_order, CorrelationDataset, DecaySpec, FidelityParams,
    FidelitySequence, MemorySimParams,
};
use spinmem_core::control::{dcrab_optimize, DcrabSettings};
use spinmem_core::fitting::{fit_odmr, OdmrBounds, OdmrDataset, OdmrFitSettings, OdmrFixedInputs};
use spinmem_core::noise::OuParams;
use spinmem_core::quantum::ElectronState;
use spinmem_core::sequences::{
    build_sequence, simulate_odmr, simulate_spin_pumping, simulate_sweep, BuildParams, NoiseModel, OdmrModelParams,
    OdmrSweep, PulseMode, SequenceKind, SimConfig,
};
use spinmem_core::spin::{manifold_spectrum, Eigenstate, MwTransition, SpinSystemParams};
use spinmem_core::{hz, to_hz};

use crate::args::*;
use crate::config::{invalid, Failure, RunResult};
use crate::output::{Artifacts, Table};

fn khz(x: f64) -> f64 {
    hz(x * 1e3)
}

fn require_seed(seed: Option<u64>) -> RunResult<u64> {
    seed.ok_or_else(|| invalid("this command is stochastic: give --seed or a \"seed\" config entry"))
}

fn linspace(a: f64, b: f64, n: usize) -> RunResult<Vec<f64>> {
    if n < 2 || !a.is_finite() || !b.is_finite() {
        return Err(invalid("a sweep needs finite ends and at least two points"));
    }
    Ok((0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect())
}

impl SystemArgs {
    fn params(&self) -> RunResult<SpinSystemParams> {
        Ok(SpinSystemParams::from_nuclear_frequencies(
            hz(self.wrf1_hz),
            hz(self.wrf2_hz),
            self.b_mt * 1e-3,
            hz(self.gamma_n_mhz_per_t * 1e6),
            hz(self.gamma_e_ghz_per_t * 1e9),
        )?)
    }
}

impl NoiseArgs {
    fn model(&self) -> RunResult<NoiseModel> {
        Ok(NoiseModel {
            detuning: OuParams::new(hz(self.sigma_hz), self.tau_c_s)?,
            amplitude: OuParams::new(self.amp_sigma, self.amp_tau_us * 1e-6)?,
            electron: OuParams::quasi_static(khz(self.electron_sigma_khz))?,
        })
    }
}

fn pulse_mode(m: Mode) -> PulseMode {
    match m {
        Mode::Instantaneous => PulseMode::Instantaneous,
        Mode::Finite => PulseMode::Finite,
    }
}

fn manifold(m: Manifold) -> ElectronState {
    match m {
        Manifold::Up => ElectronState::Up,
        Manifold::Down => ElectronState::Down,
    }
}

/// Fills kind-dependent sweep defaults so the echoed config is complete.
pub fn prepare_simulate(a: &mut SimulateArgs) {
    let (start, stop, points) = match a.kind {
        SimKind::Rabi => (0.0, 0.2, 41),
        SimKind::Ramsey => (0.0, 10.0, 41),
        SimKind::Hahn => (10.0, 600.0, 21),
        SimKind::Cpmg | SimKind::Xy8 => (5.0, 250.0, 21),
        SimKind::SpinPump => (0.0, 0.0, 0),
        SimKind::Odmr => (0.0, 0.0, 301),
    };
    if a.kind != SimKind::SpinPump {
        a.points.get_or_insert(points);
    }
    if !matches!(a.kind, SimKind::SpinPump | SimKind::Odmr) {
        a.start_ms.get_or_insert(start);
        a.stop_ms.get_or_insert(stop);
    }
    if a.kind == SimKind::Odmr {
        let centre = a.system.gamma_e_ghz_per_t * 1e3 * a.system.b_mt * 1e-3;
        a.start_mhz.get_or_insert(centre - 3.0);
        a.stop_mhz.get_or_insert(centre + 3.0);
    }
}

pub fn simulate(a: &SimulateArgs) -> RunResult<Artifacts> {
    let seed = require_seed(a.seed)?;
    let sys = a.system.params()?;
    let cfg = SimConfig { n_traj: a.traj, seed };
    match a.kind {
        SimKind::SpinPump => {
            let transition = match a.transition {
                Transition::Mw1 => MwTransition::Mw1,
                Transition::Mw2 => MwTransition::Mw2,
            };
            let noise = OuParams::quasi_static(khz(a.noise.electron_sigma_khz))?;
            let r = simulate_spin_pumping(a.n, &sys, a.mw_pi_us * 1e-6, transition, &noise, a.traj, seed)?;
            let x: Vec<f64> = r.repetitions.iter().map(|&k| k as f64).collect();
            let last = *r.polarization.last().expect("repetition 0 is always present");
            Ok(Artifacts {
                summary: format!("spin-pump: polarization {last:.4} ± {:.4} after {} repetitions", r.stderr[a.n], a.n),
                results: json!({ "target": r.target, "final_polarization": last, "final_stderr": r.stderr[a.n] }),
                tables: vec![("", Table::sweep(&x, &r.polarization, &r.stderr))],
            })
        }
        SimKind::Odmr => {
            let points = a.points.unwrap_or(301);
            let (lo, hi) = (a.start_mhz.unwrap_or(0.0), a.stop_mhz.unwrap_or(0.0));
            let sweep = OdmrSweep::linear(lo * 1e6, hi * 1e6, points, manifold(a.manifold))?;
            let rabi = khz(a.mw_rabi_khz);
            let model = OdmrModelParams {
                gamma_e_eff: sys.gamma_e_eff,
                p_up: a.p_up,
                mw_rabi: rabi,
                pi_duration: PI / rabi,
                electron_sigma: khz(a.noise.electron_sigma_khz),
            };
            let s = simulate_odmr(&sweep, &model, &sys, a.traj, seed)?;
            let x: Vec<f64> = s.frequencies.iter().map(|f| f * 1e-6).collect();
            let (k, min) = s.signal.iter().enumerate().fold((0, f64::INFINITY), |b, (i, &v)| if v < b.1 { (i, v) } else { b });
            Ok(Artifacts {
                summary: format!("odmr: {points} points, {} passes, deepest dip {min:.4} at {:.4} MHz", a.traj, x[k]),
                results: json!({ "direction": s.direction, "final_polarization": s.polarization.last() }),
                tables: vec![("", Table::sweep(&x, &s.signal, &s.stderr))],
            })
        }
        kind => {
            let noise = a.noise.model()?;
            let bp = BuildParams { rf_rabi: khz(a.rf_rabi_khz), mode: pulse_mode(a.mode), ..Default::default() };
            let xs = linspace(a.start_ms.unwrap_or(0.0), a.stop_ms.unwrap_or(0.0), a.points.unwrap_or(0))?;
            let values: Vec<f64> = xs.iter().map(|x| x * 1e-3).collect();
            let n = a.n;
            let build = |x: f64| {
                let k = match kind {
                    SimKind::Rabi => SequenceKind::Rabi { drive_time: x },
                    SimKind::Ramsey => SequenceKind::Ramsey { free_time: x },
                    SimKind::Hahn => SequenceKind::Hahn { tau: 0.5 * x },
                    SimKind::Cpmg => SequenceKind::Cpmg { n, tau: 0.5 * x },
                    _ => SequenceKind::Xy8 { n, tau: 0.5 * x },
                };
                build_sequence(&k, &bp)
            };
            let mut r = simulate_sweep(&values, build, &sys, &noise, &cfg)?;
            // differential readouts are reported as the coherence 2S − 1
            let observable = if kind == SimKind::Rabi {
                "population"
            } else {
                r.mean.iter_mut().for_each(|m| *m = 2.0 * *m - 1.0);
                r.stderr.iter_mut().for_each(|s| *s *= 2.0);
                "coherence"
            };
            let name = serde_json::to_value(kind).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
            Ok(Artifacts {
                summary: format!(
                    "{name}: {} points × {} trajectories, {observable} {:.4} → {:.4}",
                    xs.len(),
                    a.traj,
                    r.mean[0],
                    r.mean[r.mean.len() - 1]
                ),
                results: json!({ "observable": observable, "points": xs.len(), "trajectories": a.traj }),
                tables: vec![("", Table::sweep(&xs, &r.mean, &r.stderr))],
            })
        }
    }
}

/// First two numeric columns of a CSV; non-numeric rows (headers) are
/// skipped.
fn read_pairs(path: &Path) -> RunResult<(Vec<f64>, Vec<f64>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_path(path)
        .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for rec in rdr.records() {
        let rec = rec.map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        let parse = |i: usize| rec.get(i).and_then(|s| s.trim().parse::<f64>().ok());
        match (parse(0), parse(1)) {
            (Some(a), Some(b)) => {
                x.push(a);
                y.push(b);
            }
            _ if x.is_empty() => continue,
            _ => return Err(invalid(format!("{}: non-numeric row after data", path.display()))),
        }
    }
    if x.is_empty() {
        return Err(invalid(format!("{}: no numeric rows", path.display())));
    }
    Ok((x, y))
}

fn split_tagged(s: &str) -> RunResult<(&str, &Path)> {
    s.split_once(':')
        .map(|(tag, p)| (tag, Path::new(p)))
        .ok_or_else(|| invalid(format!("expected TAG:FILE, got {s:?}")))
}

pub fn fit_odmr_cmd(a: &FitOdmrArgs) -> RunResult<Artifacts> {
    let seed = require_seed(a.seed)?;
    if a.spectrum.is_empty() {
        return Err(invalid("give at least one --spectrum MANIFOLD:FILE"));
    }
    let mut data = Vec::new();
    for s in &a.spectrum {
        let (tag, path) = split_tagged(s)?;
        let m = match tag {
            "up" => ElectronState::Up,
            "down" => ElectronState::Down,
            _ => return Err(invalid(format!("manifold must be up or down, got {tag:?}"))),
        };
        let (f, signal) = read_pairs(path)?;
        data.push(OdmrDataset { sweep: OdmrSweep::new(f.iter().map(|v| v * 1e6).collect(), m)?, signal });
    }
    let rabi = khz(a.mw_rabi_khz);
    let fixed = OdmrFixedInputs {
        omega_rf1: hz(a.wrf1_hz),
        omega_rf2: hz(a.wrf2_hz),
        gamma_n: hz(a.gamma_n_mhz_per_t * 1e6),
        mw_rabi: rabi,
        pi_duration: PI / rabi,
        electron_sigma: khz(a.electron_sigma_khz),
    };
    let bounds = OdmrBounds {
        gamma_e_eff: (hz(a.gamma_e_min_ghz_per_t * 1e9), hz(a.gamma_e_max_ghz_per_t * 1e9)),
        b_z: (a.b_min_mt * 1e-3, a.b_max_mt * 1e-3),
        p_up: (0.0, 1.0),
    };
    let mut s = OdmrFitSettings::new(bounds);
    s.de.seed = seed;
    s.de.generations = a.generations;
    s.r2_threshold = a.r2_threshold;
    let r = fit_odmr(&data, &fixed, &s)?;
    let rows: Vec<Vec<f64>> = r
        .spectra
        .iter()
        .enumerate()
        .map(|(i, f)| {
            vec![
                i as f64,
                f.b_z * 1e3,
                f.b_stderr * 1e3,
                f.p_up,
                f.p_stderr,
                f.r_squared,
                to_hz(f.a_zz) * 1e-3,
                to_hz(f.a_zx) * 1e-3,
            ]
        })
        .collect();
    let header = ["spectrum", "b_mt", "b_stderr_mt", "p_up", "p_stderr", "r_squared", "a_zz_khz", "a_zx_khz"];
    let min_r2 = r.spectra.iter().map(|f| f.r_squared).fold(f64::INFINITY, f64::min);
    let spectra: Vec<_> = r
        .spectra
        .iter()
        .map(|f| {
            json!({
                "manifold": f.manifold, "direction": f.direction, "b_mt": f.b_z * 1e3, "b_stderr_mt": f.b_stderr * 1e3,
                "p_up": f.p_up, "p_stderr": f.p_stderr, "r_squared": f.r_squared,
                "a_zz_khz": to_hz(f.a_zz) * 1e-3, "a_zx_khz": to_hz(f.a_zx) * 1e-3,
            })
        })
        .collect();
    let mut summary = format!(
        "fit-odmr: {} spectra, gamma_e {:.5} GHz/T, A_zz {:.1} kHz, A_zx {:.1} kHz, min R² {min_r2:.4}",
        r.spectra.len(),
        to_hz(r.gamma_e_eff) * 1e-9,
        to_hz(r.mean_a_zz) * 1e-3,
        to_hz(r.mean_a_zx) * 1e-3
    );
    if let Some(w) = &r.warning {
        summary.push_str(&format!(" (warning: {w})"));
    }
    Ok(Artifacts {
        summary,
        results: json!({
            "gamma_e_ghz_per_t": to_hz(r.gamma_e_eff) * 1e-9,
            "gamma_e_stderr_ghz_per_t": to_hz(r.gamma_stderr) * 1e-9,
            "mean_a_zz_khz": to_hz(r.mean_a_zz) * 1e-3,
            "mean_a_zx_khz": to_hz(r.mean_a_zx) * 1e-3,
            "objective": r.objective,
            "evaluations": r.evaluations,
            "warning": r.warning,
            "spectra": spectra,
        }),
        tables: vec![("", Table { header: header.iter().map(|h| h.to_string()).collect(), rows })],
    })
}

pub fn decay(a: &DecayArgs) -> RunResult<Artifacts> {
    let sigma = hz(a.sigma_hz);
    match a.kind {
        DecayKind::Exact | DecayKind::Approx => {
            let xs = linspace(a.start_ms, a.stop_ms, a.points)?;
            let mut coherence = Vec::with_capacity(xs.len());
            for &x in &xs {
                let spec = DecaySpec { n: a.n, tau_tilde: x * 1e-3, sigma, tau_c: a.tau_c_s };
                spec.validate()?;
                let g = match a.kind {
                    DecayKind::Exact => decay_rate_exact(&spec, spec.duration()),
                    _ => decay_rate_approx(&spec),
                };
                coherence.push((-g).exp());
            }
            let t2 = match a.kind {
                DecayKind::Exact => t2_exact(a.n, sigma, a.tau_c_s)?.t2,
                _ => t2_for_order(a.n, hahn_t2(sigma, a.tau_c_s)?),
            };
            let label = if a.kind == DecayKind::Exact { "exact" } else { "approx" };
            Ok(Artifacts {
                summary: format!("decay {label}: N = {}, T2 = {:.2} ms", a.n, t2 * 1e3),
                results: json!({ "t2_ms": t2 * 1e3 }),
                tables: vec![("", Table::sweep(&xs, &coherence, &vec![0.0; xs.len()]))],
            })
        }
        DecayKind::T2 => {
            let h = hahn_t2(sigma, a.tau_c_s)?;
            let exact = t2_exact(a.n, sigma, a.tau_c_s)?.t2;
            let scaled = t2_for_order(a.n, h);
            Ok(Artifacts {
                summary: format!(
                    "T2(N = {}) = {:.2} ms exact, {:.2} ms from T2H·N^(2/3) with T2H = {:.2} ms",
                    a.n,
                    exact * 1e3,
                    scaled * 1e3,
                    h * 1e3
                ),
                results: json!({ "t2h_ms": h * 1e3, "t2_exact_ms": exact * 1e3, "t2_scaled_ms": scaled * 1e3 }),
                tables: Vec::new(),
            })
        }
        DecayKind::Memory if a.simulate => {
            let seed = require_seed(a.seed)?;
            let tt = a.tau_ms * 1e-3;
            if !(tt > 0.0 && a.horizon_s > 0.0) {
                return Err(invalid("π spacing and horizon must be positive"));
            }
            let max_blocks = ((a.horizon_s / (8.0 * tt)).ceil() as usize).max(8);
            let p = MemorySimParams {
                tau_tilde: tt,
                rabi: khz(a.rf_rabi_khz),
                max_blocks,
                stride: (max_blocks / 16).max(1),
                t1e: a.t1e_s,
            };
            let noise = NoiseModel {
                detuning: OuParams::new(sigma, a.tau_c_s)?,
                amplitude: OuParams::new(a.amp_sigma, a.amp_tau_us * 1e-6)?,
                electron: OuParams::silent(),
            };
            let r = simulate_memory_time(&p, &noise, &SimConfig { n_traj: a.traj, seed })?;
            Ok(Artifacts {
                summary: format!(
                    "memory time (XY8, τ̃ = {} ms, simulated): {:.2} s ({:.2} s without electron relaxation)",
                    a.tau_ms, r.t_total, r.t_pulses
                ),
                results: json!({
                    "memory_time_s": r.t_total, "pulse_limited_s": r.t_pulses,
                    "exponent": r.fit.exponent, "r_squared": r.fit.r_squared,
                }),
                tables: vec![("", Table::sweep(&r.times, &r.coherence, &r.stderr))],
            })
        }
        DecayKind::Memory => {
            let h = match a.t2h_ms {
                Some(ms) => ms * 1e-3,
                None => hahn_t2(sigma, a.tau_c_s)?,
            };
            let t = memory_time(a.tau_ms * 1e-3, h, a.t1e_s)?;
            Ok(Artifacts {
                summary: format!("memory time at τ̃ = {} ms: {t:.2} s", a.tau_ms),
                results: json!({ "memory_time_s": t, "t2h_ms": h * 1e3 }),
                tables: Vec::new(),
            })
        }
    }
}

pub fn fit_tau_c(a: &FitTauCArgs) -> RunResult<Artifacts> {
    if a.data.is_empty() {
        return Err(invalid("give at least one --data N:FILE"));
    }
    let mut sets = Vec::new();
    for s in &a.data {
        let (tag, path) = split_tagged(s)?;
        let n: usize = tag.parse().map_err(|_| invalid(format!("pulse count must be an integer, got {tag:?}")))?;
        let (x, y) = read_pairs(path)?;
        sets.push(CorrelationDataset { n, tau_tilde: x.iter().map(|v| v * 1e-3).collect(), signal: y });
    }
    let f = fit_correlation_time(&sets, hz(a.sigma_hz), a.tau_c_start_s)?;
    Ok(Artifacts {
        summary: format!("τc = {:.1} s (95% CI {:.1} to {:.1} s)", f.tau_c, f.ci95.0, f.ci95.1),
        results: json!({
            "tau_c_s": f.tau_c, "stderr_s": f.stderr, "ci95_s": [f.ci95.0, f.ci95.1],
            "amplitudes": f.amplitudes, "rss": f.rss, "dof": f.dof,
        }),
        tables: Vec::new(),
    })
}

pub fn fidelity(a: &FidelityMapArgs) -> RunResult<Artifacts> {
    let seq = match a.sequence {
        FidelityKind::HalfPi => FidelitySequence::HalfPi,
        FidelityKind::Pi => FidelitySequence::Pi,
        FidelityKind::Cpmg8 => FidelitySequence::Cpmg8,
        FidelityKind::Xy8 => FidelitySequence::Xy8,
    };
    let p = FidelityParams { rabi: khz(a.rabi_khz), spacing: a.spacing_ms * 1e-3 };
    let d_hz = linspace(-a.delta_max_hz, a.delta_max_hz, a.points)?;
    let eps = linspace(-a.eps_max, a.eps_max, a.points)?;
    let deltas: Vec<f64> = d_hz.iter().map(|&d| hz(d)).collect();
    let m = fidelity_map(seq, &deltas, &eps, &p)?;
    let corner = sequence_fidelity(seq, hz(a.delta_max_hz), a.eps_max, &p);
    let min = m.values.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    Ok(Artifacts {
        summary: format!(
            "fidelity at ({} Hz, {}) = {corner:.5}, minimum over the grid {min:.5}",
            a.delta_max_hz, a.eps_max
        ),
        results: json!({ "corner_fidelity": corner, "min_fidelity": min }),
        tables: vec![("", Table::matrix("delta_hz\\eps", &eps, &d_hz, &m.values))],
    })
}

pub fn duty(a: &DutyCycleArgs) -> RunResult<Artifacts> {
    let tau = 0.5 * a.tau_ms * 1e-3;
    let kind = match a.sequence {
        TrainKind::Hahn => SequenceKind::Hahn { tau },
        TrainKind::Cpmg => SequenceKind::Cpmg { n: a.n, tau },
        TrainKind::Xy8 => SequenceKind::Xy8 { n: a.n, tau },
    };
    let bp = BuildParams { rf_rabi: khz(a.rf_rabi_khz), mode: pulse_mode(a.mode), ..Default::default() };
    let seq = build_sequence(&kind, &bp)?;
    let d = duty_cycle(&seq)?;
    Ok(Artifacts {
        summary: format!("duty cycle {:.3} % over {:.4} s", 100.0 * d, seq.total_duration()),
        results: json!({ "duty_cycle": d, "total_duration_s": seq.total_duration() }),
        tables: Vec::new(),
    })
}

pub fn optimize(a: &OptimizePulseArgs) -> RunResult<Artifacts> {
    let seed = require_seed(a.seed)?;
    let sys = a.system.params()?;
    let s = DcrabSettings {
        super_iterations: a.super_iterations,
        evaluations: a.evaluations,
        basis_size: a.basis_size,
        max_harmonic: a.max_harmonic,
        pool_size: a.pool_size,
        eval_pool_size: a.eval_pool_size,
        clamp: khz(a.clamp_khz),
        seed_amplitude: a.seed_amplitude,
        rise: a.rise_ns * 1e-9,
        step: a.step_ns * 1e-9,
        seed,
    };
    let noise = if a.electron_sigma_khz == 0.0 {
        OuParams::silent()
    } else {
        OuParams::quasi_static(khz(a.electron_sigma_khz))?
    };
    let r = dcrab_optimize(&sys, a.duration_ns * 1e-9, &s, &noise)?;
    let x: Vec<f64> = r.history.iter().map(|h| h.evaluation as f64).collect();
    let y: Vec<f64> = r.history.iter().map(|h| h.value).collect();
    let grid = r.pulse.grid();
    let dt = r.pulse.duration / grid.len() as f64;
    let pulse = Table {
        header: vec!["t_ns".into(), "rabi_khz".into(), "phase_rad".into()],
        rows: grid
            .iter()
            .enumerate()
            .map(|(k, &(rabi, phase))| vec![(k as f64 + 0.5) * dt * 1e9, to_hz(rabi) * 1e-3, phase])
            .collect(),
    };
    Ok(Artifacts {
        summary: format!(
            "optimize-pulse: infidelity {:.3e} ± {:.1e} on the evaluation pool ({:.3e} on the optimization pool)",
            r.eval_fom, r.eval_stderr, r.fom
        ),
        results: json!({
            "fom": r.fom, "eval_fom": r.eval_fom, "eval_stderr": r.eval_stderr, "stalled": r.stalled,
            "pulse": r.pulse,
        }),
        tables: vec![("", Table::sweep(&x, &y, &vec![0.0; y.len()])), ("pulse", pulse)],
    })
}

pub fn spectrum(a: &SpectrumArgs) -> RunResult<Artifacts> {
    let sa = &a.system;
    let sys = match (a.a_zz_khz, a.a_zx_khz) {
        (Some(zz), Some(zx)) => SpinSystemParams::new(
            khz(zx),
            khz(zz),
            sa.b_mt * 1e-3,
            hz(sa.gamma_n_mhz_per_t * 1e6),
            hz(sa.gamma_e_ghz_per_t * 1e9),
        )?,
        (None, None) => sa.params()?,
        _ => return Err(invalid("forward mode needs both a_zz_khz and a_zx_khz")),
    };
    let sp = manifold_spectrum(&sys);
    let k = |w: f64| to_hz(w) * 1e-3;
    let line = |from, to| k(sp.resonant_detuning(from, to));
    let angle = sp.axis_angle().to_degrees();
    Ok(Artifacts {
        summary: format!(
            "A_zz = {:.1} kHz, A_zx = {:.1} kHz, RF1 = {:.2} kHz, RF2 = {:.2} kHz, axis angle {angle:.2}°",
            k(sys.a_zz),
            k(sys.a_zx),
            k(sp.omega_rf1),
            k(sp.omega_rf2)
        ),
        results: json!({
            "a_zz_khz": k(sys.a_zz),
            "a_zx_khz": k(sys.a_zx),
            "rf1_khz": k(sp.omega_rf1),
            "rf2_khz": k(sp.omega_rf2),
            "nuclear_larmor_khz": k(sys.nuclear_larmor()),
            "axis_angle_deg": angle,
            "line_detuning_khz": {
                "v1_v3": line(Eigenstate::V1, Eigenstate::V3),
                "v1_v4": line(Eigenstate::V1, Eigenstate::V4),
                "v2_v3": line(Eigenstate::V2, Eigenstate::V3),
                "v2_v4": line(Eigenstate::V2, Eigenstate::V4),
            },
        }),
        tables: Vec::new(),
    })
}
