// Copyright 2026 EAQDC Contributors
// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("matrix for gate `{name}` is not unitary (deviation {deviation:.3e})")]
    NonUnitary { name: String, deviation: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown spin `{0}`")]
    UnknownSpin(String),

    #[error("negative duration {0} s")]
    NegativeDuration(f64),

    #[error("no J coupling between spins {0} and {1}")]
    MissingCoupling(usize, usize),

    #[error("unsupported gate `{0}`")]
    UnsupportedGate(String),

    #[error("pulse optimizer reached fidelity {best:.6}, below threshold {threshold}")]
    OptimizerFailed { best: f64, threshold: f64 },

    #[error("pseudo-pure preparation failed, achieved diagonal {diagonal:?}")]
    PpsFailed { diagonal: Vec<f64> },

    #[error("peak label map is inconsistent with the coefficient sign pattern: {0}")]
    PeakMap(String),

    #[error("missing coefficient {0}")]
    MissingCoefficient(&'static str),

    #[error("visibility undefined: {0}")]
    UndefinedVisibility(String),

    #[error("{path}: {message}")]
    Config { path: PathBuf, message: String },

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
