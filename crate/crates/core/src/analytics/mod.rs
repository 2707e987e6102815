// Copyright 2026 The spinmem Authors
// SPDX-License-Identifier: Apache-2.0

//! Closed-form decay laws, coherence and memory times, decay fits, pulse
//! fidelities and duty cycles.

mod decay;
mod fidelity;
mod fit;
mod memory;

pub use decay::{
    combine_t1, decay_rate_approx, decay_rate_exact, hahn_t2, memory_time, t2_exact, t2_for_order, DecayEstimate, DecayModel,
    DecaySpec,
};
pub use fidelity::{
    duty_cycle, fidelity_map, pulse_fidelity, sequence_fidelity, sequence_propagator, FidelityMap, FidelityParams,
    FidelitySequence,
};
pub use fit::{fit_correlation_time, fit_decay_time, CorrelationDataset, CorrelationFit, DecayFit, DecayFitOptions, Exponent};
pub use memory::{simulate_memory_time, MemorySimParams, MemorySimResult};
