// Copyright 2026 The spinmem Authors
// SPDX-License-Identifier: Apache-2.0

//! Nuclear initialization by repeated conditional electron flips and resets.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::{sample_quasistatic, stream_id, stream_rng, OuParams};
use crate::quantum::{kron, ElectronState, Hermitian, Op2, Pair};
use crate::spin::{manifold_spectrum, pair_hamiltonian, Eigenstate, MwTransition, SpinSystemParams};
use crate::stats::mean_and_stderr;

/// Eigenstate that accumulates population when pumping on `t`.
///
/// Each transition empties its own `↓e` starting state, so population
/// collects in the other `↓e` eigenstate.
pub fn pumping_target(t: MwTransition) -> Eigenstate {
    match t {
        MwTransition::Mw1 => Eigenstate::V1,
        MwTransition::Mw2 => Eigenstate::V2,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PumpingResult {
    /// `0..=N`.
    pub repetitions: Vec<usize>,
    /// Overlap with the target eigenvector after each repetition.
    pub polarization: Vec<f64>,
    pub stderr: Vec<f64>,
    pub target: Eigenstate,
    pub trajectories: usize,
    pub seed: u64,
}

/// Starts from `↓e` with an unpolarized nucleus. Each repetition is a
/// resonant MW π pulse (`Ω = π / mw_pi`) with a fresh electron detuning
/// draw, then an electron reset into `↓e` with nuclear dephasing.
pub fn simulate_spin_pumping(
    n: usize,
    sys: &SpinSystemParams,
    mw_pi: f64,
    transition: MwTransition,
    electron_noise: &OuParams,
    n_traj: usize,
    seed: u64,
) -> Result<PumpingResult> {
    sys.validate()?;
    if !(mw_pi > 0.0) {
        return Err(Error::invalid(format!("MW π duration must be positive, got {mw_pi}")));
    }
    if n_traj == 0 {
        return Err(Error::invalid("need at least one trajectory"));
    }
    let spectrum = manifold_spectrum(sys);
    let target = pumping_target(transition);
    let v = spectrum.eigenvector(target);
    let rabi = PI / mw_pi;
    let detuning = spectrum.transition_detuning(transition);
    let down = ElectronState::Down.ket();
    let start = Pair::from_matrix_unchecked(kron(&(down * down.adjoint()), &(Op2::identity() * crate::quantum::C64::new(0.5, 0.0))));

    let runs: Vec<Vec<f64>> = (0..n_traj)
        .into_par_iter()
        .map(|j| {
            let mut rng = stream_rng(seed, stream_id(0, j));
            let mut rho = start.clone();
            let mut trace = Vec::with_capacity(n + 1);
            trace.push(rho.overlap_unchecked(&v));
            for _ in 0..n {
                let de = sample_quasistatic(electron_noise, &mut rng);
                let h = pair_hamiltonian(sys, detuning + de, rabi, 0.0);
                rho = rho.transform(&h.propagator(mw_pi));
                rho = spectrum.laser_reset(&rho, ElectronState::Down, true);
                trace.push(rho.overlap_unchecked(&v));
            }
            trace
        })
        .collect();

    let mut polarization = Vec::with_capacity(n + 1);
    let mut stderr = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let col: Vec<f64> = runs.iter().map(|r| r[k]).collect();
        let (m, se) = mean_and_stderr(&col);
        polarization.push(m);
        stderr.push(if se.is_finite() { se } else { 0.0 });
    }
    Ok(PumpingResult { repetitions: (0..=n).collect(), polarization, stderr, target, trajectories: n_traj, seed })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_repetitions_is_initial_overlap() {
        let r = simulate_spin_pumping(0, &SpinSystemParams::reference(), 1.4e-6, MwTransition::Mw2, &OuParams::silent(), 3, 1)
            .unwrap();
        assert_eq!(r.polarization.len(), 1);
        assert!((r.polarization[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn pumping_is_monotone_without_noise() {
        let r = simulate_spin_pumping(20, &SpinSystemParams::reference(), 1.4e-6, MwTransition::Mw1, &OuParams::silent(), 1, 1)
            .unwrap();
        assert!(r.polarization.windows(2).all(|w| w[1] >= w[0] - 1e-12));
        assert!(r.polarization[20] > 0.95);
    }
}
