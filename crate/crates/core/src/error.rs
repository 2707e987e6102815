// Copyright 2026 The spinmem Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported Hilbert-space dimension {0} (expected 2 or 4)")]
    UnsupportedDimension(usize),

    #[error("operator is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),

    #[error("state vector is not normalized (norm² = {0})")]
    NotNormalized(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("inconsistent inputs: {0}")]
    InconsistentInputs(String),

    #[error("sequence element not supported by the {model} model: {element}")]
    ModelMismatch { model: &'static str, element: String },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("fit did not converge: {reason} (residual sum of squares {rss:e})")]
    FitFailure { reason: String, rss: f64 },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
