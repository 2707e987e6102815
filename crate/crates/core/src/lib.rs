// Copyright 2026 The spinmem Authors
// SPDX-License-Identifier: Apache-2.0

//! Simulation and analysis toolkit for a driven electron-nuclear spin pair.
//!
//! The crate models a spin-1/2 color-center electron hyperfine-coupled to a
//! spin-1/2 nucleus, with classical Ornstein-Uhlenbeck noise on detuning and
//! drive amplitude. It covers:
//!
//! - dense 2- and 4-level state algebra ([`quantum`]),
//! - Hamiltonians and manifold eigenstructure ([`spin`]),
//! - exact OU noise generation ([`noise`]),
//! - pulse sequences and the Monte Carlo engine ([`sequences`]),
//! - closed-form decay laws, decay fits and pulse fidelities ([`analytics`]),
//! - ODMR model fitting with differential evolution ([`fitting`]),
//! - chopped-random-basis pulse optimization ([`control`]).
//!
//! All frequencies are angular (rad/s), times are seconds and fields are
//! tesla. Use [`hz`] to convert cycle frequencies on ingestion.

pub mod analytics;
pub mod control;
pub mod error;
pub mod fitting;
pub mod noise;
pub mod quantum;
pub mod sequences;
pub mod spin;
pub mod stats;

pub use error::{Error, Result};

/// 2π.
pub const TWO_PI: f64 = std::f64::consts::TAU;

/// Converts a frequency in Hz to rad/s.
#[inline]
pub fn hz(f: f64) -> f64 {
    TWO_PI * f
}

/// Converts an angular frequency in rad/s to Hz.
#[inline]
pub fn to_hz(w: f64) -> f64 {
    w / TWO_PI
}
