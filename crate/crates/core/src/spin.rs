// Copyright 2026 The spinmem Authors
// SPDX-License-Identifier: Apache-2.0

//! Hamiltonians of the hyperfine-coupled pair and the nuclear eigenstructure
//! of each electron manifold.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hz;
use crate::quantum::{apply_laser_reset, kron_ket, ElectronState, Ket2, Ket4, Op2, Op4, Pair, C64};

/// ¹³C gyromagnetic ratio, rad/s per tesla.
pub const GAMMA_C13: f64 = crate::TWO_PI * 10.7084e6;

/// Physical constants of the electron-nuclear pair. Angular units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinSystemParams {
    /// Non-secular hyperfine term, rad/s. Non-negative by convention; the
    /// physics is symmetric under a reflection of the nuclear x axis.
    pub a_zx: f64,
    /// Secular hyperfine term, rad/s.
    pub a_zz: f64,
    /// Field along the defect axis, T.
    pub b_z: f64,
    /// Nuclear gyromagnetic ratio, rad/s/T.
    pub gamma_n: f64,
    /// Effective electron gyromagnetic ratio (spin + orbital), rad/s/T.
    pub gamma_e_eff: f64,
}

impl SpinSystemParams {
    pub fn new(a_zx: f64, a_zz: f64, b_z: f64, gamma_n: f64, gamma_e_eff: f64) -> Result<Self> {
        let p = Self { a_zx, a_zz, b_z, gamma_n, gamma_e_eff };
        p.validate()?;
        Ok(p)
    }

    /// Builds the pair from measured nuclear transition frequencies.
    pub fn from_nuclear_frequencies(
        omega_rf1: f64,
        omega_rf2: f64,
        b_z: f64,
        gamma_n: f64,
        gamma_e_eff: f64,
    ) -> Result<Self> {
        let (a_zz, a_zx) = hyperfine_from_frequencies(omega_rf1, omega_rf2, b_z, gamma_n)?;
        Self::new(a_zx, a_zz, b_z, gamma_n, gamma_e_eff)
    }

    /// The GeV-¹³C pair: RF1 = 2489.73 kHz, RF2 = 493.62 kHz at 97.159 mT.
    pub fn reference() -> Self {
        Self::from_nuclear_frequencies(hz(2489.73e3), hz(493.62e3), 97.159e-3, GAMMA_C13, hz(31.615e9))
            .expect("reference parameters are consistent")
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.b_z > 0.0) {
            return Err(Error::invalid(format!("B_z must be positive, got {}", self.b_z)));
        }
        if !(self.gamma_n > 0.0) {
            return Err(Error::invalid(format!("gamma_n must be positive, got {}", self.gamma_n)));
        }
        if !(self.a_zx >= 0.0) || !self.a_zz.is_finite() {
            return Err(Error::invalid("A_zx must be non-negative and A_zz finite"));
        }
        Ok(())
    }

    /// Bare nuclear Larmor frequency `γn·Bz`.
    pub fn nuclear_larmor(&self) -> f64 {
        self.gamma_n * self.b_z
    }

    /// Nuclear Hamiltonian `(hz, hx)` in `hz·Iz + hx·Ix` form for the given
    /// electron manifold.
    pub fn nuclear_field(&self, e: ElectronState) -> (f64, f64) {
        let s = match e {
            ElectronState::Up => 0.5,
            ElectronState::Down => -0.5,
        };
        (s * self.a_zz - self.nuclear_larmor(), s * self.a_zx)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    Mw,
    Rf,
}

/// A resonant drive in its rotating frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveParams {
    /// Rabi frequency, rad/s.
    pub rabi: f64,
    /// Detuning from the bare transition, rad/s.
    pub detuning: f64,
    /// Drive phase, rad. `0` drives about x, `π/2` about y.
    pub phase: f64,
    pub channel: Channel,
}

impl DriveParams {
    pub fn new(rabi: f64, detuning: f64, phase: f64, channel: Channel) -> Result<Self> {
        if !(rabi >= 0.0) {
            return Err(Error::invalid(format!("Rabi frequency must be non-negative, got {rabi}")));
        }
        Ok(Self { rabi, detuning, phase, channel })
    }

    pub fn mw(rabi: f64, detuning: f64) -> Self {
        Self { rabi, detuning, phase: 0.0, channel: Channel::Mw }
    }
}

/// Full pair Hamiltonian in the electron rotating frame:
/// `(Δ+δ)Sz + Ω(cos φ Sx + sin φ Sy) − γn Bz Iz + Azx Sz Ix + Azz Sz Iz`.
pub fn hamiltonian_full(params: &SpinSystemParams, drive: Option<&DriveParams>, delta_extra: f64) -> Op4 {
    let (rabi, detuning, phase) = drive.map_or((0.0, 0.0, 0.0), |d| (d.rabi, d.detuning, d.phase));
    pair_hamiltonian(params, detuning + delta_extra, rabi, phase)
}

/// Entry-wise construction of the pair Hamiltonian for a total detuning.
pub(crate) fn pair_hamiltonian(params: &SpinSystemParams, detuning: f64, rabi: f64, phase: f64) -> Op4 {
    let g = params.nuclear_larmor();
    let zz = 0.25 * params.a_zz;
    let zx = 0.25 * params.a_zx;
    let d = 0.5 * detuning;
    let mut h = Op4::zeros();
    h[(0, 0)] = C64::new(d - 0.5 * g + zz, 0.0);
    h[(1, 1)] = C64::new(d + 0.5 * g - zz, 0.0);
    h[(2, 2)] = C64::new(-d - 0.5 * g - zz, 0.0);
    h[(3, 3)] = C64::new(-d + 0.5 * g + zz, 0.0);
    h[(0, 1)] = C64::new(zx, 0.0);
    h[(1, 0)] = C64::new(zx, 0.0);
    h[(2, 3)] = C64::new(-zx, 0.0);
    h[(3, 2)] = C64::new(-zx, 0.0);
    if rabi != 0.0 {
        let up = C64::from_polar(0.5 * rabi, -phase);
        h[(0, 2)] = up;
        h[(1, 3)] = up;
        h[(2, 0)] = up.conj();
        h[(3, 1)] = up.conj();
    }
    h
}

/// Reduced two-level Hamiltonian in the frame of the expected Larmor
/// frequency: `δ Sz + Ω(1+ε)(cos φ Sx + sin φ Sy)`.
pub fn hamiltonian_reduced(detuning_error: f64, rabi: f64, amp_error: f64, phase: f64) -> Result<Op2> {
    if !(amp_error.abs() < 1.0) {
        return Err(Error::invalid(format!("relative amplitude error must satisfy |ε| < 1, got {amp_error}")));
    }
    Ok(reduced(detuning_error, rabi * (1.0 + amp_error), phase))
}

pub(crate) fn reduced(detuning: f64, rabi: f64, phase: f64) -> Op2 {
    let d = 0.5 * detuning;
    let off = C64::from_polar(0.5 * rabi, -phase);
    Op2::new(C64::new(d, 0.0), off, off.conj(), C64::new(-d, 0.0))
}

/// Labels of the four pair eigenstates.
///
/// `V1`/`V2` are the `↓e` states with nuclear spin down-/up-like along the
/// `↓e` axis; `V3`/`V4` the `↑e` states with nuclear spin up-/down-like
/// along the `↑e` axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Eigenstate {
    V1,
    V2,
    V3,
    V4,
}

/// Electron spin-flip transitions from the `↓e` manifold.
///
/// `Mw1` starts from `V2` (up-like nucleus), `Mw2` from `V1`; both keep the
/// nuclear orientation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MwTransition {
    Mw1,
    Mw2,
}

/// Nuclear eigenbasis of one electron manifold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NuclearBasis {
    /// Up-like eigenvector (largest overlap with `|↑n⟩`).
    pub up: Ket2,
    pub down: Ket2,
    pub up_energy: f64,
    pub down_energy: f64,
    /// Axis angle from +z toward +x, rad.
    pub theta: f64,
}

impl NuclearBasis {
    fn from_field(hz_: f64, hx: f64) -> Self {
        let theta = hx.atan2(hz_);
        let half = 0.5 * (hz_ * hz_ + hx * hx).sqrt();
        let (c, s) = ((0.5 * theta).cos(), (0.5 * theta).sin());
        // spin along (hx, 0, hz): energy +half
        let plus = Ket2::new(C64::new(c, 0.0), C64::new(s, 0.0));
        let minus = Ket2::new(C64::new(-s, 0.0), C64::new(c, 0.0));
        let (up, up_e, down, down_e) = if plus[0].norm() >= minus[0].norm() {
            (plus, half, minus, -half)
        } else {
            (minus, -half, plus, half)
        };
        Self {
            up: fix_phase(up),
            down: fix_phase(down),
            up_energy: up_e,
            down_energy: down_e,
            theta,
        }
    }

    /// Columns `[up, down]`.
    pub fn matrix(&self) -> Op2 {
        Op2::from_columns(&[self.up, self.down])
    }

    pub fn splitting(&self) -> f64 {
        (self.up_energy - self.down_energy).abs()
    }

    /// Diagonal nuclear state along this axis with up-like population `p`.
    pub fn diagonal_state(&self, p: f64) -> Op2 {
        self.up * self.up.adjoint() * C64::new(p, 0.0) + self.down * self.down.adjoint() * C64::new(1.0 - p, 0.0)
    }
}

fn fix_phase(v: Ket2) -> Ket2 {
    let big = if v[0].norm() >= v[1].norm() { v[0] } else { v[1] };
    if big.norm() == 0.0 {
        return v;
    }
    v * (big.conj() / big.norm())
}

/// Nuclear transition frequencies, quantization axes and eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldSpectrum {
    /// Splitting in the `↓e` manifold, rad/s.
    pub omega_rf1: f64,
    /// Splitting in the `↑e` manifold, rad/s.
    pub omega_rf2: f64,
    pub theta_up: f64,
    pub theta_down: f64,
    pub up: NuclearBasis,
    pub down: NuclearBasis,
}

pub fn manifold_spectrum(params: &SpinSystemParams) -> ManifoldSpectrum {
    let (hz_u, hx_u) = params.nuclear_field(ElectronState::Up);
    let (hz_d, hx_d) = params.nuclear_field(ElectronState::Down);
    let up = NuclearBasis::from_field(hz_u, hx_u);
    let down = NuclearBasis::from_field(hz_d, hx_d);
    ManifoldSpectrum {
        omega_rf1: hz_d.hypot(hx_d),
        omega_rf2: hz_u.hypot(hx_u),
        theta_up: up.theta,
        theta_down: down.theta,
        up,
        down,
    }
}

impl ManifoldSpectrum {
    pub fn basis(&self, e: ElectronState) -> &NuclearBasis {
        match e {
            ElectronState::Up => &self.up,
            ElectronState::Down => &self.down,
        }
    }

    /// Angle between the two quantization axes taken as lines, in [0, π/2].
    pub fn axis_angle(&self) -> f64 {
        let d = (self.theta_up - self.theta_down).rem_euclid(std::f64::consts::PI);
        d.min(std::f64::consts::PI - d)
    }

    pub fn eigenvector(&self, which: Eigenstate) -> Ket4 {
        let (e, n) = match which {
            Eigenstate::V1 => (ElectronState::Down, self.down.down),
            Eigenstate::V2 => (ElectronState::Down, self.down.up),
            Eigenstate::V3 => (ElectronState::Up, self.up.up),
            Eigenstate::V4 => (ElectronState::Up, self.up.down),
        };
        kron_ket(&e.ket(), &n)
    }

    /// `(σx ⊗ 1) v`: same nuclear direction, flipped electron.
    pub fn flipped_eigenvector(&self, which: Eigenstate) -> Ket4 {
        let v = self.eigenvector(which);
        Ket4::new(v[2], v[3], v[0], v[1])
    }

    /// Nuclear energy of an eigenstate, excluding the electron Zeeman term.
    pub fn nuclear_energy(&self, which: Eigenstate) -> f64 {
        match which {
            Eigenstate::V1 => self.down.down_energy,
            Eigenstate::V2 => self.down.up_energy,
            Eigenstate::V3 => self.up.up_energy,
            Eigenstate::V4 => self.up.down_energy,
        }
    }

    /// Rotating-frame detuning `Δ` at which the undriven pair has the two
    /// states degenerate (`↓e` state `from`, `↑e` state `to`).
    pub fn resonant_detuning(&self, from: Eigenstate, to: Eigenstate) -> f64 {
        self.nuclear_energy(from) - self.nuclear_energy(to)
    }

    pub fn transition_detuning(&self, t: MwTransition) -> f64 {
        match t {
            MwTransition::Mw1 => self.resonant_detuning(Eigenstate::V2, Eigenstate::V3),
            MwTransition::Mw2 => self.resonant_detuning(Eigenstate::V1, Eigenstate::V4),
        }
    }

    /// Laser reset into `target`, optionally fully dephasing the nucleus
    /// about the `target` manifold axis.
    pub fn laser_reset(&self, rho: &Pair, target: ElectronState, dephase_nuclear: bool) -> Pair {
        let basis = self.basis(target).matrix();
        apply_laser_reset(rho, target, dephase_nuclear.then_some(&basis))
    }
}

/// Hyperfine couplings `(A_zz, A_zx)` from the two nuclear transition
/// frequencies.
pub fn hyperfine_from_frequencies(omega_rf1: f64, omega_rf2: f64, b_z: f64, gamma_n: f64) -> Result<(f64, f64)> {
    if !(omega_rf1 > omega_rf2 && omega_rf2 > 0.0) {
        return Err(Error::InconsistentInputs(format!(
            "need ω_RF1 > ω_RF2 > 0, got {omega_rf1} and {omega_rf2}"
        )));
    }
    if !(b_z > 0.0 && gamma_n > 0.0) {
        return Err(Error::invalid("B_z and gamma_n must be positive"));
    }
    let larmor = gamma_n * b_z;
    let a_zz = (omega_rf1 * omega_rf1 - omega_rf2 * omega_rf2) / (2.0 * larmor);
    let offset = a_zz - 2.0 * larmor;
    let disc = 4.0 * omega_rf2 * omega_rf2 - offset * offset;
    let scale = 4.0 * omega_rf2 * omega_rf2;
    if disc < -1e-12 * scale {
        return Err(Error::InconsistentInputs(format!(
            "negative discriminant {disc:e}: ω_RF2 is smaller than |A_zz/2 − γn Bz|"
        )));
    }
    Ok((a_zz, disc.max(0.0).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{Hermitian, PairOperators};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn reference_couplings() -> SpinSystemParams {
        SpinSystemParams::new(hz(602.81e3), hz(2862.34e3), 97.159e-3, GAMMA_C13, hz(31.615e9)).unwrap()
    }

    #[test]
    fn undriven_without_azx_is_diagonal() {
        let p = SpinSystemParams::new(0.0, hz(2.0e6), 0.1, GAMMA_C13, hz(31e9)).unwrap();
        let h = hamiltonian_full(&p, None, hz(1e5));
        for r in 0..4 {
            for c in 0..4 {
                if r != c {
                    assert_eq!(h[(r, c)].norm(), 0.0);
                }
            }
        }
    }

    #[test]
    fn entrywise_hamiltonian_matches_operator_sum() {
        let p = reference_couplings();
        let ops = PairOperators::new();
        let drive = DriveParams::new(hz(349e3), hz(120e3), 0.7, Channel::Mw).unwrap();
        let c = |x: f64| C64::new(x, 0.0);
        let expected = ops.sz * c(drive.detuning + 5.0)
            + (ops.sx * c(drive.phase.cos()) + ops.sy * c(drive.phase.sin())) * c(drive.rabi)
            - ops.iz * c(p.nuclear_larmor())
            + ops.sz * ops.ix * c(p.a_zx)
            + ops.sz * ops.iz * c(p.a_zz);
        let h = hamiltonian_full(&p, Some(&drive), 5.0);
        assert!((h - expected).norm() < 1e-6 * expected.norm());
    }

    #[test]
    fn manifold_frequencies_for_reference_couplings() {
        let s = manifold_spectrum(&reference_couplings());
        assert_relative_eq!(s.omega_rf1, hz(2489.7e3), max_relative = 1e-3);
        assert_relative_eq!(s.omega_rf2, hz(493.6e3), max_relative = 1e-3);
        let deg = s.axis_angle().to_degrees();
        assert!((deg - 30.0).abs() < 1.5, "{deg}");
    }

    #[test]
    fn zero_azx_aligns_axes() {
        let p = SpinSystemParams::new(0.0, hz(2.0e6), 0.1, GAMMA_C13, 1.0).unwrap();
        assert_eq!(manifold_spectrum(&p).axis_angle(), 0.0);
    }

    #[test]
    fn block_eigenvalues_match_manifold_splittings() {
        let p = reference_couplings();
        let s = manifold_spectrum(&p);
        let (vals, _) = hamiltonian_full(&p, None, 0.0).eigh();
        let mut expected = [-s.omega_rf1 / 2.0, -s.omega_rf2 / 2.0, s.omega_rf2 / 2.0, s.omega_rf1 / 2.0];
        expected.sort_by(f64::total_cmp);
        for (a, b) in vals.iter().zip(expected) {
            assert_relative_eq!(*a, b, max_relative = 1e-10);
        }
    }

    #[test]
    fn eigenvectors_are_orthonormal_eigenstates() {
        let p = reference_couplings();
        let s = manifold_spectrum(&p);
        let h = hamiltonian_full(&p, None, 0.0);
        let all = [Eigenstate::V1, Eigenstate::V2, Eigenstate::V3, Eigenstate::V4];
        for (i, a) in all.iter().enumerate() {
            let va = s.eigenvector(*a);
            for (j, b) in all.iter().enumerate() {
                let ip = (va.adjoint() * s.eigenvector(*b))[(0, 0)];
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((ip - C64::new(want, 0.0)).norm() < 1e-12);
            }
            let hv = h * va;
            let e = s.nuclear_energy(*a);
            assert!((hv - va * C64::new(e, 0.0)).norm() < 1e-6 * s.omega_rf1);
        }
        // v2 is the up-like nucleus in the ↓e manifold
        assert!(s.down.up[0].norm() > 0.99);
    }

    #[test]
    fn detuning_shift_commuting_with_sz_keeps_nuclear_splittings() {
        let p = reference_couplings();
        let (v0, _) = hamiltonian_full(&p, None, 0.0).eigh();
        let (v1, _) = hamiltonian_full(&p, None, hz(7.3e6)).eigh();
        let mut a: Vec<f64> = v0.iter().copied().collect();
        let mut b: Vec<f64> = v1.iter().copied().collect();
        // compare the within-manifold gaps: pair by Sz sector
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        let s = manifold_spectrum(&p);
        let gaps = |v: &[f64]| {
            let mut g: Vec<f64> = Vec::new();
            for i in 0..4 {
                for j in i + 1..4 {
                    g.push(v[j] - v[i]);
                }
            }
            g
        };
        for target in [s.omega_rf1, s.omega_rf2] {
            assert!(gaps(&a).iter().any(|g| (g - target).abs() < 1e-6 * target));
            assert!(gaps(&b).iter().any(|g| (g - target).abs() < 1e-6 * target));
        }
    }

    #[test]
    fn hyperfine_inversion_of_measured_frequencies() {
        let (a_zz, a_zx) = hyperfine_from_frequencies(hz(2489.73e3), hz(493.62e3), 97.159e-3, GAMMA_C13).unwrap();
        assert_relative_eq!(a_zz, hz(2862.3e3), max_relative = 1e-3);
        assert_relative_eq!(a_zx, hz(602.8e3), max_relative = 2e-3);
    }

    #[test]
    fn hyperfine_boundary_gives_zero_azx() {
        let b = 0.1;
        let larmor = GAMMA_C13 * b;
        let a_zz = hz(3.0e6);
        let w1 = a_zz / 2.0 + larmor;
        let w2 = (larmor - a_zz / 2.0).abs();
        let (zz, zx) = hyperfine_from_frequencies(w1, w2, b, GAMMA_C13).unwrap();
        assert_relative_eq!(zz, a_zz, max_relative = 1e-12);
        assert!(zx.abs() < 1e-3 * a_zz);
    }

    #[test]
    fn inconsistent_frequencies_rejected() {
        assert!(matches!(
            hyperfine_from_frequencies(hz(2.0e6), hz(10e3), 0.1, GAMMA_C13),
            Err(Error::InconsistentInputs(_))
        ));
        assert!(hyperfine_from_frequencies(hz(1.0e5), hz(2.0e5), 0.1, GAMMA_C13).is_err());
    }

    #[test]
    fn reduced_hamiltonian_axes() {
        let [sx, sy, _] = crate::quantum::qubit_operators();
        let h = hamiltonian_reduced(0.0, 2.0, 0.0, 0.0).unwrap();
        assert!((h - sx * C64::new(2.0, 0.0)).norm() < 1e-15);
        let h = hamiltonian_reduced(0.0, 2.0, 0.0, std::f64::consts::FRAC_PI_2).unwrap();
        assert!((h - sy * C64::new(2.0, 0.0)).norm() < 1e-15);
        assert!(hamiltonian_reduced(0.0, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn y_drive_quarter_turn_points_along_x() {
        // π/2 about y takes |↓⟩ to −x
        let omega = 1.0;
        let h = hamiltonian_reduced(0.0, omega, 0.0, std::f64::consts::FRAC_PI_2).unwrap();
        let rho = crate::quantum::Qubit::pure(&crate::quantum::basis_ket(1)).unwrap();
        let out = rho.propagate(&h, std::f64::consts::FRAC_PI_2 / omega).unwrap();
        let [sx, sy, sz] = crate::quantum::qubit_operators();
        let bloch = |op: &Op2| 2.0 * (out.matrix() * op).trace().re;
        assert!((bloch(&sx) + 1.0).abs() < 1e-12);
        assert!(bloch(&sy).abs() < 1e-12 && bloch(&sz).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn frequency_round_trip(
            a_zz_khz in 500.0f64..5000.0,
            a_zx_khz in 10.0f64..1500.0,
            b_mt in 20.0f64..300.0,
        ) {
            let p = SpinSystemParams::new(hz(a_zx_khz * 1e3), hz(a_zz_khz * 1e3), b_mt * 1e-3, GAMMA_C13, 1.0).unwrap();
            let s = manifold_spectrum(&p);
            let (zz, zx) = hyperfine_from_frequencies(s.omega_rf1, s.omega_rf2, p.b_z, p.gamma_n).unwrap();
            let q = SpinSystemParams::new(zx, zz, p.b_z, p.gamma_n, 1.0).unwrap();
            let s2 = manifold_spectrum(&q);
            prop_assert!((s2.omega_rf1 / s.omega_rf1 - 1.0).abs() < 1e-9);
            prop_assert!((s2.omega_rf2 / s.omega_rf2 - 1.0).abs() < 1e-9);
        }
    }
}
