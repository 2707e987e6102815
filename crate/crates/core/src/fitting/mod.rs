// Copyright 2026 The spinmem Authors
// SPDX-License-Identifier: Apache-2.0

//! Global and local optimizers and the ODMR model fit.

mod odmr;
mod optimize;

pub use odmr::{fit_odmr, refine_least_squares, OdmrBounds, OdmrDataset, OdmrFitResult, OdmrFitSettings, OdmrFixedInputs, SpectrumFit};
pub use optimize::{differential_evolution, levenberg_marquardt, r_squared, DeResult, DeSettings, LmResult, LmSettings};
