// Copyright 2026 The spinmem Authors
// SPDX-License-Identifier: Apache-2.0

//! Pulse-sequence representation, canonical builders and the Monte Carlo
//! engine.
//!
//! Echo spacings are measured between pulse centres, so `τ̃ = 2τ` is the
//! centre-to-centre separation of refocusing pulses in both pulse modes.
//! Ramsey free time is the gap between the two pulses.

mod engine;
mod odmr;
mod pumping;

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{ElectronState, Ket2};
use crate::spin::{manifold_spectrum, Channel, DriveParams, Eigenstate, MwTransition, SpinSystemParams};

pub use engine::{
    simulate_checkpoints, simulate_sequence, simulate_sweep, NoiseModel, PointEstimate, SimConfig,
    SimulationResult,
};
pub use odmr::{
    odmr_expected, odmr_transfer_table, simulate_odmr, OdmrExpectation, OdmrModelParams, OdmrSpectrum,
    OdmrSweep, SweepDirection, TransferTable,
};
pub use pumping::{pumping_target, simulate_spin_pumping, PumpingResult};

/// Level of the reduced two-level model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Up,
    Down,
}

impl Level {
    pub fn index(self) -> usize {
        match self {
            Level::Up => 0,
            Level::Down => 1,
        }
    }

    pub fn ket(self) -> Ket2 {
        crate::quantum::basis_ket(self.index())
    }
}

/// A time-sampled drive for [`SequenceElement::ShapedPulse`].
pub trait PulseShape: Send + Sync + fmt::Debug {
    /// Length of each piecewise-constant step, s.
    fn step(&self) -> f64;
    /// `(Rabi, phase)` on every step, in order.
    fn samples(&self) -> Vec<(f64, f64)>;
    /// Electron detuning `Δ` of the frame the shape is defined in, rad/s.
    fn frame_detuning(&self) -> f64;
}

#[derive(Debug, Clone)]
pub enum SequenceElement {
    /// Electron drive; full model only.
    MwPulse { duration: f64, drive: DriveParams },
    /// Nuclear drive. `duration == 0` is an ideal instantaneous rotation by
    /// `angle`; otherwise the pulse evolves for `duration` with noise frozen.
    /// `manifold` selects the electron manifold addressed in the full model.
    RfPulse { duration: f64, angle: f64, drive: DriveParams, manifold: ElectronState },
    ShapedPulse { duration: f64, shape: Arc<dyn PulseShape> },
    Wait { duration: f64 },
    LaserReset { duration: f64, target: ElectronState, dephase: bool },
}

impl PartialEq for SequenceElement {
    fn eq(&self, other: &Self) -> bool {
        use SequenceElement::*;
        match (self, other) {
            (MwPulse { duration: a, drive: da }, MwPulse { duration: b, drive: db }) => a == b && da == db,
            (
                RfPulse { duration: a, angle: x, drive: da, manifold: ma },
                RfPulse { duration: b, angle: y, drive: db, manifold: mb },
            ) => a == b && x == y && da == db && ma == mb,
            (ShapedPulse { duration: a, shape: sa }, ShapedPulse { duration: b, shape: sb }) => {
                a == b && Arc::ptr_eq(sa, sb)
            }
            (Wait { duration: a }, Wait { duration: b }) => a == b,
            (
                LaserReset { duration: a, target: ta, dephase: xa },
                LaserReset { duration: b, target: tb, dephase: xb },
            ) => a == b && ta == tb && xa == xb,
            _ => false,
        }
    }
}

impl SequenceElement {
    pub fn duration(&self) -> f64 {
        match self {
            SequenceElement::MwPulse { duration, .. }
            | SequenceElement::RfPulse { duration, .. }
            | SequenceElement::ShapedPulse { duration, .. }
            | SequenceElement::Wait { duration }
            | SequenceElement::LaserReset { duration, .. } => *duration,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SequenceElement::MwPulse { .. } => "MWPulse",
            SequenceElement::RfPulse { .. } => "RFPulse",
            SequenceElement::ShapedPulse { .. } => "ShapedPulse",
            SequenceElement::Wait { .. } => "Wait",
            SequenceElement::LaserReset { .. } => "LaserReset",
        }
    }

    pub fn is_rf(&self) -> bool {
        matches!(self, SequenceElement::RfPulse { .. })
    }

    /// Nuclear rotation by `angle`; zero-length in instantaneous mode.
    fn rf(angle: f64, phase: f64, rabi: f64, detuning: f64, mode: PulseMode) -> Self {
        let duration = match mode {
            PulseMode::Instantaneous => 0.0,
            PulseMode::Finite => angle / rabi,
        };
        SequenceElement::RfPulse {
            duration,
            angle,
            drive: DriveParams { rabi, detuning, phase, channel: Channel::Rf },
            manifold: ElectronState::Down,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    /// Electron-nuclear pair (4 levels).
    Full,
    /// Nucleus alone in the frame of its expected Larmor frequency.
    Reduced,
}

/// Pulse timing model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PulseMode {
    /// Ideal zero-length rotations, as assumed by the closed-form decay laws.
    #[default]
    Instantaneous,
    /// Pulses take `angle / Ω` with detuning and amplitude errors frozen.
    Finite,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "target")]
pub enum Readout {
    /// Reduced model: population of a level.
    Level(Level),
    /// Reduced model: the last element is run with phase `φ` and `φ + π`;
    /// the observable is `(1 + P_φ − P_{φ+π}) / 2` for the given level.
    Differential(Level),
    /// Full model: population of a pair eigenstate.
    Eigenstate(Eigenstate),
    /// Full model: electron population.
    Electron(ElectronState),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    Level(Level),
    /// Electron in `electron`, nucleus diagonal along that manifold's axis
    /// with up-like population `nuclear_up`.
    Pair { electron: ElectronState, nuclear_up: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PulseSequence {
    pub elements: Vec<SequenceElement>,
    pub model: Model,
    pub readout: Readout,
    pub initial: InitialState,
    /// Static detuning of the reduced-model frame, rad/s.
    pub detuning_offset: f64,
}

impl PulseSequence {
    pub fn total_duration(&self) -> f64 {
        self.elements.iter().map(SequenceElement::duration).sum()
    }

    /// Checks element kinds, durations and readout against the model.
    pub fn validate(&self) -> Result<()> {
        for el in &self.elements {
            let d = el.duration();
            if !(d >= 0.0) || !d.is_finite() {
                return Err(Error::invalid(format!("{} has invalid duration {d}", el.name())));
            }
            if self.model == Model::Reduced
                && matches!(
                    el,
                    SequenceElement::MwPulse { .. }
                        | SequenceElement::LaserReset { .. }
                        | SequenceElement::ShapedPulse { .. }
                )
            {
                return Err(Error::ModelMismatch { model: "reduced", element: el.name().into() });
            }
        }
        let ok = match (self.model, self.readout, self.initial) {
            (Model::Reduced, Readout::Level(_), InitialState::Level(_)) => true,
            (Model::Reduced, Readout::Differential(_), InitialState::Level(_)) => {
                matches!(self.elements.last(), Some(SequenceElement::RfPulse { .. }))
            }
            (Model::Full, Readout::Eigenstate(_) | Readout::Electron(_), InitialState::Pair { nuclear_up, .. }) => {
                (0.0..=1.0).contains(&nuclear_up)
            }
            _ => false,
        };
        if !ok {
            let model = match self.model {
                Model::Full => "full",
                Model::Reduced => "reduced",
            };
            return Err(Error::ModelMismatch { model, element: format!("{:?} / {:?}", self.readout, self.initial) });
        }
        Ok(())
    }
}

/// Canonical sequences.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SequenceKind {
    /// Single nuclear pulse of length `drive_time`.
    Rabi { drive_time: f64 },
    Ramsey { free_time: f64 },
    Hahn { tau: f64 },
    /// `π/2|x − [τ − π|y − τ]×n − π/2|±x`.
    Cpmg { n: usize, tau: f64 },
    /// Phases `x,y,x,y,y,x,y,x` repeated; `n` is the π-pulse count.
    Xy8 { n: usize, tau: f64 },
    /// `[MW π on transition − LaserReset]×repetitions`.
    SpinPumping { repetitions: usize, transition: MwTransition, mw_pi: f64 },
    /// Conditional electron flip, manifold-selective nuclear π on `↑e`,
    /// conditional electron flip.
    ProjectionSwap { transition: MwTransition, mw_pi: f64 },
    /// One ODMR point at electron detuning `detuning`.
    OdmrStep { detuning: f64, mw_pi: f64, manifold: ElectronState },
}

/// Shared builder inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BuildParams {
    /// Nuclear Rabi frequency, rad/s.
    pub rf_rabi: f64,
    pub mode: PulseMode,
    /// Static frame detuning of the reduced model, rad/s.
    pub detuning_offset: f64,
    pub laser_duration: f64,
    /// Needed by full-model kinds.
    pub sys: Option<SpinSystemParams>,
}

impl Default for BuildParams {
    fn default() -> Self {
        Self {
            rf_rabi: crate::hz(11.73e3),
            mode: PulseMode::Instantaneous,
            detuning_offset: 0.0,
            laser_duration: 5.5e-3,
            sys: None,
        }
    }
}

const X: f64 = 0.0;
const Y: f64 = FRAC_PI_2;
const XY8_PHASES: [f64; 8] = [X, Y, X, Y, Y, X, Y, X];

/// Builds one of the canonical sequences.
pub fn build_sequence(kind: &SequenceKind, p: &BuildParams) -> Result<PulseSequence> {
    let reduced = |elements: Vec<SequenceElement>, readout| PulseSequence {
        elements,
        model: Model::Reduced,
        readout,
        initial: InitialState::Level(Level::Down),
        detuning_offset: p.detuning_offset,
    };
    let needs_rf = matches!(
        kind,
        SequenceKind::Rabi { .. }
            | SequenceKind::Ramsey { .. }
            | SequenceKind::Hahn { .. }
            | SequenceKind::Cpmg { .. }
            | SequenceKind::Xy8 { .. }
            | SequenceKind::ProjectionSwap { .. }
    );
    if needs_rf && !(p.rf_rabi > 0.0) {
        return Err(Error::invalid(format!("RF Rabi frequency must be positive, got {}", p.rf_rabi)));
    }
    let seq = match *kind {
        SequenceKind::Rabi { drive_time } => {
            non_negative("drive time", drive_time)?;
            let angle = p.rf_rabi * drive_time;
            let el = match p.mode {
                PulseMode::Instantaneous => SequenceElement::rf(angle, X, p.rf_rabi, 0.0, p.mode),
                PulseMode::Finite => SequenceElement::RfPulse {
                    duration: drive_time,
                    angle,
                    drive: DriveParams { rabi: p.rf_rabi, detuning: 0.0, phase: X, channel: Channel::Rf },
                    manifold: ElectronState::Down,
                },
            };
            reduced(vec![el], Readout::Level(Level::Up))
        }
        SequenceKind::Ramsey { free_time } => {
            non_negative("free time", free_time)?;
            let half = |phase| SequenceElement::rf(FRAC_PI_2, phase, p.rf_rabi, 0.0, p.mode);
            reduced(vec![half(X), SequenceElement::Wait { duration: free_time }, half(X)], Readout::Differential(Level::Up))
        }
        SequenceKind::Hahn { tau } => echo(1, tau, &[Y], p)?,
        SequenceKind::Cpmg { n, tau } => {
            if n == 0 {
                return Err(Error::invalid("CPMG needs at least one refocusing pulse"));
            }
            echo(n, tau, &[Y], p)?
        }
        SequenceKind::Xy8 { n, tau } => {
            if n == 0 || n % 8 != 0 {
                return Err(Error::invalid(format!("XY8 pulse count must be a positive multiple of 8, got {n}")));
            }
            echo(n, tau, &XY8_PHASES, p)?
        }
        SequenceKind::SpinPumping { repetitions, transition, mw_pi } => {
            let sys = full_sys(p)?;
            positive("MW π duration", mw_pi)?;
            let spectrum = manifold_spectrum(&sys);
            let drive = DriveParams::mw(PI / mw_pi, spectrum.transition_detuning(transition));
            let mut elements = Vec::with_capacity(2 * repetitions);
            for _ in 0..repetitions {
                elements.push(SequenceElement::MwPulse { duration: mw_pi, drive });
                elements.push(laser(ElectronState::Down, p));
            }
            PulseSequence {
                elements,
                model: Model::Full,
                readout: Readout::Eigenstate(pumping_target(transition)),
                initial: InitialState::Pair { electron: ElectronState::Down, nuclear_up: 0.5 },
                detuning_offset: 0.0,
            }
        }
        SequenceKind::ProjectionSwap { transition, mw_pi } => {
            let sys = full_sys(p)?;
            positive("MW π duration", mw_pi)?;
            let spectrum = manifold_spectrum(&sys);
            let drive = DriveParams::mw(PI / mw_pi, spectrum.transition_detuning(transition));
            let mw = SequenceElement::MwPulse { duration: mw_pi, drive };
            let mut rf = SequenceElement::rf(PI, X, p.rf_rabi, 0.0, p.mode);
            if let SequenceElement::RfPulse { manifold, .. } = &mut rf {
                *manifold = ElectronState::Up;
            }
            PulseSequence {
                elements: vec![mw.clone(), rf, mw],
                model: Model::Full,
                readout: Readout::Electron(ElectronState::Up),
                initial: InitialState::Pair { electron: ElectronState::Down, nuclear_up: 0.5 },
                detuning_offset: 0.0,
            }
        }
        SequenceKind::OdmrStep { detuning, mw_pi, manifold } => {
            full_sys(p)?;
            positive("MW π duration", mw_pi)?;
            let drive = DriveParams::mw(PI / mw_pi, detuning);
            PulseSequence {
                elements: vec![SequenceElement::MwPulse { duration: mw_pi, drive }, laser(manifold, p)],
                model: Model::Full,
                readout: Readout::Electron(manifold),
                initial: InitialState::Pair { electron: manifold, nuclear_up: 0.5 },
                detuning_offset: 0.0,
            }
        }
    };
    seq.validate()?;
    Ok(seq)
}

fn laser(target: ElectronState, p: &BuildParams) -> SequenceElement {
    SequenceElement::LaserReset { duration: p.laser_duration, target, dephase: true }
}

fn full_sys(p: &BuildParams) -> Result<SpinSystemParams> {
    let sys = p.sys.ok_or_else(|| Error::invalid("full-model sequences need spin-system parameters"))?;
    sys.validate()?;
    Ok(sys)
}

fn non_negative(what: &str, x: f64) -> Result<()> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::invalid(format!("{what} must be non-negative, got {x}")));
    }
    Ok(())
}

fn positive(what: &str, x: f64) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::invalid(format!("{what} must be positive, got {x}")));
    }
    Ok(())
}

/// `π/2|x − τ − π − 2τ − … − π − τ − π/2|x` with centre-to-centre spacing.
fn echo(n: usize, tau: f64, phases: &[f64], p: &BuildParams) -> Result<PulseSequence> {
    positive("τ", tau)?;
    let (t90, t180) = match p.mode {
        PulseMode::Instantaneous => (0.0, 0.0),
        PulseMode::Finite => (FRAC_PI_2 / p.rf_rabi, PI / p.rf_rabi),
    };
    let edge = tau - 0.5 * (t90 + t180);
    let inner = 2.0 * tau - t180;
    if edge < 0.0 {
        return Err(Error::invalid(format!("τ = {tau} s is shorter than the pulses it separates")));
    }
    let rf = |angle, phase| SequenceElement::rf(angle, phase, p.rf_rabi, 0.0, p.mode);
    let mut elements = Vec::with_capacity(2 * n + 3);
    elements.push(rf(FRAC_PI_2, X));
    elements.push(SequenceElement::Wait { duration: edge });
    for k in 0..n {
        if k > 0 {
            elements.push(SequenceElement::Wait { duration: inner });
        }
        elements.push(rf(PI, phases[k % phases.len()]));
    }
    elements.push(SequenceElement::Wait { duration: edge });
    elements.push(rf(FRAC_PI_2, X));
    Ok(PulseSequence {
        elements,
        model: Model::Reduced,
        readout: Readout::Differential(Level::Up),
        initial: InitialState::Level(Level::Down),
        detuning_offset: p.detuning_offset,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn phases(seq: &PulseSequence) -> Vec<f64> {
        seq.elements
            .iter()
            .filter_map(|e| match e {
                SequenceElement::RfPulse { angle, drive, .. } if (*angle - PI).abs() < 1e-12 => Some(drive.phase),
                _ => None,
            })
            .collect()
    }

    #[test]
    fn cpmg_one_is_hahn() {
        let p = BuildParams::default();
        let a = build_sequence(&SequenceKind::Cpmg { n: 1, tau: 0.01 }, &p).unwrap();
        let b = build_sequence(&SequenceKind::Hahn { tau: 0.01 }, &p).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn xy8_phase_pattern() {
        let p = BuildParams::default();
        let s = build_sequence(&SequenceKind::Xy8 { n: 8, tau: 0.005 }, &p).unwrap();
        assert_eq!(phases(&s), XY8_PHASES.to_vec());
        let s16 = build_sequence(&SequenceKind::Xy8 { n: 16, tau: 0.005 }, &p).unwrap();
        assert_eq!(phases(&s16)[8..], XY8_PHASES);
        assert!(build_sequence(&SequenceKind::Xy8 { n: 12, tau: 0.005 }, &p).is_err());
        assert!(build_sequence(&SequenceKind::Cpmg { n: 0, tau: 0.005 }, &p).is_err());
    }

    #[test]
    fn cpmg_timing_is_centre_to_centre() {
        for mode in [PulseMode::Instantaneous, PulseMode::Finite] {
            let p = BuildParams { mode, ..Default::default() };
            let tau = 0.012;
            let s = build_sequence(&SequenceKind::Cpmg { n: 4, tau }, &p).unwrap();
            let mut t = 0.0;
            let mut centres = Vec::new();
            for e in &s.elements {
                if e.is_rf() {
                    centres.push(t + 0.5 * e.duration());
                }
                t += e.duration();
            }
            for w in centres[1..centres.len() - 1].windows(2) {
                assert!((w[1] - w[0] - 2.0 * tau).abs() < 1e-12);
            }
            assert!((centres[1] - centres[0] - tau).abs() < 1e-12);
            assert!((t - centres.last().unwrap() - 0.5 * s.elements.last().unwrap().duration()).abs() < 1e-12);
            assert!((s.total_duration() - 8.0 * tau - s.elements[0].duration()).abs() < 1e-12);
        }
    }

    #[test]
    fn spin_pumping_has_alternating_elements() {
        let p = BuildParams { sys: Some(SpinSystemParams::reference()), ..Default::default() };
        let s = build_sequence(
            &SequenceKind::SpinPumping { repetitions: 15, transition: MwTransition::Mw2, mw_pi: 1.4e-6 },
            &p,
        )
        .unwrap();
        assert_eq!(s.elements.len(), 30);
        assert!(matches!(s.elements[0], SequenceElement::MwPulse { duration, .. } if duration == 1.4e-6));
        assert!(matches!(s.elements[1], SequenceElement::LaserReset { .. }));
        assert!(build_sequence(
            &SequenceKind::SpinPumping { repetitions: 1, transition: MwTransition::Mw2, mw_pi: 1.4e-6 },
            &BuildParams::default()
        )
        .is_err());
    }

    #[test]
    fn reduced_rejects_mw() {
        let mut s = build_sequence(&SequenceKind::Ramsey { free_time: 1e-3 }, &BuildParams::default()).unwrap();
        s.elements.push(SequenceElement::MwPulse { duration: 1e-6, drive: DriveParams::mw(1.0, 0.0) });
        assert!(matches!(s.validate(), Err(Error::ModelMismatch { .. })));
    }
}
