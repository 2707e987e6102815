// Copyright 2026 The spinmem Authors
// SPDX-License-Identifier: Apache-2.0

use proptest::prelude::*;

use spinmem_core::analytics::*;
use spinmem_core::noise::{ou_step, stream_rng, OuParams};
use spinmem_core::sequences::*;
use spinmem_core::spin::*;
use spinmem_core::{hz, to_hz};

#[test]
fn ou_chain_reaches_stationary_variance() {
    let p = OuParams::new(3.0, 2.0).unwrap();
    let mut rng = stream_rng(5, 0);
    let mut x = 0.0;
    let (mut s, mut s2) = (0.0, 0.0);
    let n = 40_000;
    for _ in 0..n {
        // steps of 3τ keep the samples nearly independent
        x = ou_step(x, 6.0, &p, &mut rng);
        s += x;
        s2 += x * x;
    }
    let var = s2 / n as f64 - (s / n as f64).powi(2);
    assert!((var / 9.0 - 1.0).abs() < 0.03, "{var}");
}

#[test]
fn sweep_ignores_thread_count() {
    let noise = NoiseModel::reference();
    let sys = SpinSystemParams::reference();
    let t = [0.02, 0.1, 0.3];
    let run = |threads| {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| {
            let bp = BuildParams::default();
            simulate_sweep(
                &t,
                |x: f64| build_sequence(&SequenceKind::Cpmg { n: 2, tau: x / 4.0 }, &bp),
                &sys,
                &noise,
                &SimConfig { n_traj: 97, seed: 3 },
            )
            .unwrap()
        })
    };
    let (a, b) = (run(1), run(4));
    assert_eq!(a.mean, b.mean);
    assert_eq!(a.stderr, b.stderr);
}

#[test]
fn hahn_time_closed_form() {
    let sigma = hz(112.5);
    let t2 = hahn_t2(sigma, 829.0).unwrap();
    assert!((t2 - (12.0 * 829.0 / (sigma * sigma)).cbrt()).abs() < 1e-15);
    assert!((t2 - 0.2710).abs() < 5e-4);
}

proptest! {
    #[test]
    fn spectrum_inversion_round_trips(b in 0.03f64..0.3, zz in -4e6f64..4e6, zx in 5e3f64..1.5e6) {
        let sys = SpinSystemParams { a_zz: hz(zz), a_zx: hz(zx), b_z: b, gamma_n: GAMMA_C13, gamma_e_eff: hz(28e9) };
        let sp = manifold_spectrum(&sys);
        if let Ok((zz2, zx2)) = hyperfine_from_frequencies(sp.omega_rf1, sp.omega_rf2, b, GAMMA_C13) {
            let back = manifold_spectrum(&SpinSystemParams { a_zz: zz2, a_zx: zx2, ..sys });
            prop_assert!((to_hz(back.omega_rf1) - to_hz(sp.omega_rf1)).abs() < 1e-6);
            prop_assert!((to_hz(back.omega_rf2) - to_hz(sp.omega_rf2)).abs() < 1e-6);
        }
    }

    #[test]
    fn exact_decay_grows_with_time(n in 1usize..16, t1 in 1e-3f64..1.0, f in 1.0f64..4.0) {
        let rate = |t: f64| decay_rate_exact(&DecaySpec { n, tau_tilde: t / n as f64, sigma: hz(112.5), tau_c: 829.0 }, t);
        prop_assert!(rate(t1) >= 0.0);
        prop_assert!(rate(t1 * f) >= rate(t1));
    }
}
