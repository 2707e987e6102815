// Copyright 2026 The spinmem Authors
// SPDX-License-Identifier: Apache-2.0

//! Shaped electron pulses and their dCRAB optimization.

mod dcrab;
mod nelder_mead;
mod pulse;

pub use dcrab::{
    dcrab_optimize, drive_frame_detuning, polarization_fom, DcrabResult, DcrabSettings, FomRecord, NoisePool, Propagator,
};
pub use pulse::{FourierTerm, ShapedPulse};
