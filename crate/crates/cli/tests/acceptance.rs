// Copyright 2026 The spinmem Authors
// SPDX-License-Identifier: Apache-2.0

//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
//! and exits non-zero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use spinmem_core::analytics::*;
use spinmem_core::control::{dcrab_optimize, DcrabSettings};
use spinmem_core::fitting::*;
use spinmem_core::noise::OuParams;
use spinmem_core::quantum::ElectronState;
use spinmem_core::sequences::*;
use spinmem_core::spin::*;
use spinmem_core::{hz, to_hz};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

const SIGMA: f64 = 706.858_347_057_703_5; // 2π·112.5 Hz
const TAU_C: f64 = 829.0;

fn hyperfine_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    while checked < 1000 {
        let b = rng.random_range(0.02..0.5);
        let sys = SpinSystemParams {
            a_zx: hz(rng.random_range(10e3..2e6)),
            a_zz: hz(rng.random_range(-5e6..5e6)),
            b_z: b,
            gamma_n: GAMMA_C13,
            gamma_e_eff: hz(28e9),
        };
        let sp = manifold_spectrum(&sys);
        let Ok((zz, zx)) = hyperfine_from_frequencies(sp.omega_rf1, sp.omega_rf2, b, GAMMA_C13) else {
            continue;
        };
        let back = manifold_spectrum(&SpinSystemParams { a_zz: zz, a_zx: zx, ..sys });
        worst = worst.max(rel(back.omega_rf1, sp.omega_rf1)).max(rel(back.omega_rf2, sp.omega_rf2));
        checked += 1;
    }
    let (zz, zx) = hyperfine_from_frequencies(hz(2489.73e3), hz(493.62e3), 97.159e-3, GAMMA_C13).unwrap();
    let (ezz, ezx) = (rel(zz, hz(2862.3e3)), rel(zx, hz(602.8e3)));
    outcome(
        worst <= 1e-9 && ezz <= 1e-3 && ezx <= 2e-3,
        format!(
            "worst relative round-trip error {worst:.1e} over 1000 sets; A_zz = {:.1} kHz ({:.3}%), A_zx = {:.1} kHz ({:.3}%)",
            to_hz(zz) * 1e-3,
            100.0 * ezz,
            to_hz(zx) * 1e-3,
            100.0 * ezx
        ),
    )
}

fn axis_angle() -> Outcome {
    let a = manifold_spectrum(&SpinSystemParams::reference()).axis_angle().to_degrees();
    outcome((a - 30.0).abs() <= 1.5, format!("{a:.2}°"))
}

struct CpmgRun {
    n: usize,
    t: Vec<f64>,
    coherence: Vec<f64>,
    stderr: Vec<f64>,
}

fn cpmg_monte_carlo() -> Vec<CpmgRun> {
    let h = hahn_t2(SIGMA, TAU_C).unwrap();
    let noise = NoiseModel {
        detuning: OuParams::new(SIGMA, TAU_C).unwrap(),
        amplitude: OuParams::silent(),
        electron: OuParams::silent(),
    };
    let sys = SpinSystemParams::reference();
    [1usize, 2, 4, 8]
        .iter()
        .map(|&n| {
            let t2 = t2_for_order(n, h);
            let t: Vec<f64> = (1..=12).map(|k| t2 * k as f64 / 8.0).collect();
            let bp = BuildParams::default();
            let build = |x: f64| build_sequence(&SequenceKind::Cpmg { n, tau: x / (2.0 * n as f64) }, &bp);
            let r = simulate_sweep(&t, build, &sys, &noise, &SimConfig { n_traj: 2000, seed: 30 + n as u64 }).unwrap();
            CpmgRun {
                n,
                t,
                coherence: r.mean.iter().map(|m| 2.0 * m - 1.0).collect(),
                stderr: r.stderr.iter().map(|s| 2.0 * s).collect(),
            }
        })
        .collect()
}

fn cubic_fit(r: &CpmgRun) -> f64 {
    let opts = DecayFitOptions { exponent: Exponent::Fixed(3.0), offset: Some(0.0) };
    fit_decay_time(&r.t, &r.coherence, &opts).unwrap().estimate.t2
}

fn oracle_equivalence(runs: &[CpmgRun], elapsed: f64) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut misses = 0;
    for r in runs {
        for ((&t, &c), &se) in r.t.iter().zip(&r.coherence).zip(&r.stderr) {
            let spec = DecaySpec { n: r.n, tau_tilde: t / r.n as f64, sigma: SIGMA, tau_c: TAU_C };
            let z = (c - (-decay_rate_exact(&spec, t)).exp()).abs() / se.max(1e-300);
            worst = worst.max(z);
            if z > 3.0 {
                misses += 1;
            }
        }
    }
    let t2h = cubic_fit(&runs[0]);
    let e = rel(t2h, 0.271);
    let mut detail = format!(
        "{} points, largest deviation {worst:.2} standard errors; fitted T2H = {:.1} ms ({:+.1}% vs 271 ms; measured 274 ± 16 ms); {elapsed:.0} s",
        runs.iter().map(|r| r.t.len()).sum::<usize>(),
        t2h * 1e3,
        100.0 * (t2h / 0.271 - 1.0)
    );
    if misses > 0 {
        detail.push_str(&format!("; {misses} points beyond 3 SE"));
    }
    outcome(misses == 0 && e <= 0.05 && elapsed < 600.0, detail)
}

fn scaling_law(runs: &[CpmgRun]) -> Outcome {
    let h = hahn_t2(SIGMA, TAU_C).unwrap();
    let exact = [1usize, 2, 4, 8, 16, 100].iter().all(|&n| rel(t2_for_order(n, h), h * (n as f64).cbrt().powi(2)) < 1e-14);
    let pts: Vec<(f64, f64)> = runs.iter().map(|r| ((r.n as f64).ln(), cubic_fit(r).ln())).collect();
    let k = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / k, pts.iter().map(|p| p.1).sum::<f64>() / k);
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    outcome(
        exact && (slope - 0.67).abs() <= 0.05,
        format!("closed-form law exact: {exact}; Monte Carlo exponent {slope:.3}"),
    )
}

fn memory_time_estimates() -> Outcome {
    let h = hahn_t2(SIGMA, TAU_C).unwrap();
    let conservative = memory_time(0.024, h, Some(20.7)).unwrap();
    let t1_only = combine_t1(f64::INFINITY, Some(20.7)).unwrap();
    let sim = simulate_memory_time(
        &MemorySimParams::reference(0.010),
        &NoiseModel::reference(),
        &SimConfig { n_traj: 400, seed: 10 },
    )
    .unwrap();
    outcome(
        rel(conservative, 18.1) <= 0.15 && (t1_only - 41.4).abs() <= 1e-12 && rel(sim.t_total, 28.0) <= 0.2,
        format!(
            "24 ms: {conservative:.2} s; electron-relaxation limit {t1_only} s; 10 ms XY8 simulation: {:.2} s",
            sim.t_total
        ),
    )
}

fn spin_pumping() -> Outcome {
    let noise = OuParams::quasi_static(hz(146e3)).unwrap();
    let r = simulate_spin_pumping(50, &SpinSystemParams::reference(), 1.4e-6, MwTransition::Mw2, &noise, 1000, 6).unwrap();
    let (p15, p50) = (r.polarization[15], r.polarization[50]);
    outcome(p15 >= 0.92 && p50 >= 0.965, format!("N = 15: {p15:.4}, N = 50: {p50:.4}"))
}

fn pulse_fidelities() -> Outcome {
    let p = FidelityParams::default();
    let f = |s| sequence_fidelity(s, 3.0 * SIGMA, 0.015, &p);
    let (h, pi, c, x) =
        (f(FidelitySequence::HalfPi), f(FidelitySequence::Pi), f(FidelitySequence::Cpmg8), f(FidelitySequence::Xy8));
    outcome(
        (h - 0.9997).abs() <= 5e-4 && (pi - 0.9993).abs() <= 5e-4 && x >= 0.999 && (c - 0.96).abs() <= 0.02,
        format!("π/2 {h:.5}, π {pi:.5}, XY8 {x:.5}, CPMG-8 {c:.4}"),
    )
}

fn odmr_closed_loop() -> Outcome {
    let fixed = OdmrFixedInputs::reference();
    let gamma = hz(31.616e9);
    let truth = [
        (ElectronState::Up, true, 97.149e-3, 0.345),
        (ElectronState::Up, false, 97.140e-3, 0.55),
        (ElectronState::Down, true, 97.165e-3, 0.5),
        (ElectronState::Down, false, 97.155e-3, 0.606),
    ];
    let mut data = Vec::new();
    for (i, &(m, descending, b, p)) in truth.iter().enumerate() {
        let c = to_hz(gamma * b);
        let (lo, hi) = if descending { (c + 3e6, c - 3e6) } else { (c - 3e6, c + 3e6) };
        let sweep = OdmrSweep::linear(lo, hi, 301, m).unwrap();
        let sys = fixed.system(b, gamma).unwrap();
        let model = OdmrModelParams {
            gamma_e_eff: gamma,
            p_up: p,
            mw_rabi: fixed.mw_rabi,
            pi_duration: fixed.pi_duration,
            electron_sigma: fixed.electron_sigma,
        };
        let mc = simulate_odmr(&sweep, &model, &sys, 200, 100 + i as u64).unwrap();
        data.push(OdmrDataset { sweep, signal: mc.signal });
    }
    let bounds = OdmrBounds { gamma_e_eff: (gamma * 0.998, gamma * 1.002), b_z: (96.9e-3, 97.4e-3), p_up: (0.0, 1.0) };
    let mut s = OdmrFitSettings::new(bounds);
    s.de.generations = 150;
    s.de.seed = 7;
    let r = fit_odmr(&data, &fixed, &s).unwrap();
    let (mut eb, mut ezz, mut ezx, mut r2): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 1.0);
    for (f, &(_, _, b, _)) in r.spectra.iter().zip(&truth) {
        let sys = fixed.system(b, gamma).unwrap();
        eb = eb.max(rel(f.b_z, b));
        ezz = ezz.max(rel(f.a_zz, sys.a_zz));
        ezx = ezx.max(rel(f.a_zx, sys.a_zx));
        r2 = r2.min(f.r_squared);
    }
    outcome(
        eb <= 1e-3 && ezz <= 1e-2 && ezx <= 1e-2 && r2 >= 0.97,
        format!(
            "worst relative error B {:.3}%, A_zz {:.3}%, A_zx {:.3}%; lowest R² {r2:.4}",
            100.0 * eb,
            100.0 * ezz,
            100.0 * ezx
        ),
    )
}

fn correlation_coverage() -> Outcome {
    let noise = Normal::new(0.0, 0.01).unwrap();
    let tt: Vec<f64> = (1..=20).map(|k| 0.03 * k as f64).collect();
    let mut covered = 0;
    let mut failed = 0;
    for seed in 0..100 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let signal = tt
            .iter()
            .map(|&v| {
                let spec = DecaySpec { n: 1, tau_tilde: v, sigma: SIGMA, tau_c: TAU_C };
                (-decay_rate_exact(&spec, spec.duration())).exp() + noise.sample(&mut rng)
            })
            .collect();
        match fit_correlation_time(&[CorrelationDataset { n: 1, tau_tilde: tt.clone(), signal }], SIGMA, 300.0) {
            Ok(f) if f.ci95.0 <= TAU_C && TAU_C <= f.ci95.1 => covered += 1,
            Ok(_) => {}
            Err(_) => failed += 1,
        }
    }
    outcome(covered >= 90, format!("{covered}/100 intervals contain τc = 829 s ({failed} fits failed)"))
}

fn dcrab(elapsed_start: Instant) -> Outcome {
    let sys = SpinSystemParams::reference();
    let s = DcrabSettings::default();
    let quiet = dcrab_optimize(&sys, 2950e-9, &s, &OuParams::silent()).unwrap();
    let noisy = dcrab_optimize(&sys, 2950e-9, &s, &OuParams::quasi_static(hz(146e3)).unwrap()).unwrap();
    let elapsed = elapsed_start.elapsed().as_secs_f64();
    outcome(
        quiet.eval_fom <= 1e-3 && noisy.eval_fom <= 1e-2 && elapsed < 1800.0,
        format!(
            "noiseless {:.2e}; noisy {:.2e} ± {:.1e} on {} evaluation realizations ({:.2e} on the optimization pool); {elapsed:.0} s",
            quiet.eval_fom, noisy.eval_fom, noisy.eval_stderr, s.eval_pool_size, noisy.fom
        ),
    )
}

fn determinism() -> Outcome {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance-determinism");
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    let odmr_csv = dir.join("odmr-src.csv");
    let commands: Vec<(&str, Vec<String>)> = vec![
        ("cpmg", "simulate cpmg --n 4 --traj 300 --points 6 --seed 5".into()),
        ("xy8", "simulate xy8 --n 8 --mode finite --traj 100 --points 4 --seed 5".into()),
        ("ramsey", "simulate ramsey --traj 300 --points 6 --seed 5".into()),
        ("pump", "simulate spin-pump --n 20 --traj 300 --seed 5".into()),
        ("odmr", "simulate odmr --traj 40 --points 81 --seed 5".into()),
        ("memory", "decay memory --simulate --tau-ms 10 --horizon-s 8 --traj 50 --seed 5".into()),
        ("pulse", "optimize-pulse --super-iterations 2 --evaluations 30 --pool-size 6 --eval-pool-size 12 --seed 5".into()),
        ("fit", format!("fit-odmr --spectrum down:{} --generations 8 --seed 5", odmr_csv.display())),
    ]
    .into_iter()
    .map(|(k, c)| (k, c.split_whitespace().map(String::from).collect()))
    .collect();
    let src = Command::new(env!("CARGO_BIN_EXE_spinmem"))
        .args(["simulate", "odmr", "--traj", "40", "--points", "81", "--seed", "3", "--out"])
        .arg(dir.join("odmr-src"))
        .output()
        .unwrap();
    assert!(src.status.success());
    let mut mismatched = Vec::new();
    for (name, args) in &commands {
        let mut outputs = Vec::new();
        for (run, threads) in ["1", "3", "1"].iter().enumerate() {
            let prefix = dir.join(format!("{name}-{run}"));
            let o = Command::new(env!("CARGO_BIN_EXE_spinmem"))
                .args(args)
                .arg("--out")
                .arg(&prefix)
                .env("SPINMEM_THREADS", threads)
                .output()
                .unwrap();
            assert!(o.status.success(), "{name}: {}", String::from_utf8_lossy(&o.stderr));
            let mut files: Vec<_> = std::fs::read_dir(&dir)
                .unwrap()
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.file_name().unwrap().to_string_lossy().starts_with(&format!("{name}-{run}.")))
                .collect();
            files.sort();
            let bytes: Vec<(String, Vec<u8>)> = files
                .iter()
                .map(|p| {
                    let n = p.file_name().unwrap().to_string_lossy().replacen(&format!("{name}-{run}"), "", 1);
                    (n, std::fs::read(p).unwrap())
                })
                .collect();
            outputs.push(bytes);
        }
        // sidecars name their own files, so compare them with the prefix masked
        let masked = |v: &Vec<(String, Vec<u8>)>, run: usize| -> Vec<(String, Vec<u8>)> {
            v.iter()
                .map(|(n, b)| (n.clone(), String::from_utf8_lossy(b).replace(&format!("{name}-{run}"), "X").into_bytes()))
                .collect()
        };
        if !(masked(&outputs[0], 0) == masked(&outputs[1], 1) && masked(&outputs[0], 0) == masked(&outputs[2], 2)) {
            mismatched.push(*name);
        }
    }
    outcome(
        mismatched.is_empty(),
        format!("{} stochastic commands byte-identical across 1 and 3 threads and repeat runs", commands.len())
            + &if mismatched.is_empty() { String::new() } else { format!("; differing: {mismatched:?}") },
    )
}

fn main() {
    let mut all = true;
    let mut report = |id: usize, name: &str, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let o = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        all &= o.pass;
        println!(
            "[{}] {id:>2}. {name}: {} ({:.1} s)",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed().as_secs_f64()
        );
    };
    report(1, "hyperfine round trip", &mut hyperfine_round_trip);
    report(2, "quantization-axis angle", &mut axis_angle);
    let start = Instant::now();
    let runs = catch_unwind(cpmg_monte_carlo).ok();
    let mc_time = start.elapsed().as_secs_f64();
    report(3, "Monte Carlo CPMG vs exact decay", &mut || match &runs {
        Some(r) => oracle_equivalence(r, mc_time),
        None => outcome(false, "Monte Carlo run failed".into()),
    });
    report(4, "coherence-time scaling law", &mut || match &runs {
        Some(r) => scaling_law(r),
        None => outcome(false, "Monte Carlo run failed".into()),
    });
    report(5, "memory-time estimates", &mut memory_time_estimates);
    report(6, "spin pumping", &mut spin_pumping);
    report(7, "pulse fidelities", &mut pulse_fidelities);
    report(8, "ODMR closed loop", &mut odmr_closed_loop);
    report(9, "correlation-time interval coverage", &mut correlation_coverage);
    report(10, "dCRAB polarization pulse", &mut || dcrab(Instant::now()));
    report(11, "determinism", &mut determinism);
    if !all {
        std::process::exit(1);
    }
}
