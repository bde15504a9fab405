// Copyright 2026 EAQDC Contributors
// SPDX-License-Identifier: Apache-2.0

//! Closed-form intensities and visibilities for the quantum-mechanical and
//! hidden-variable descriptions of the entanglement-assisted delayed-choice
//! interferometer.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which theory a prediction comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Model {
    Qm,
    Hv,
}

/// Postselected outcome of the measured ancilla C.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    C0,
    C1,
}

impl Outcome {
    pub const BOTH: [Outcome; 2] = [Outcome::C0, Outcome::C1];

    pub fn bit(self) -> u8 {
        match self {
            Outcome::C0 => 0,
            Outcome::C1 => 1,
        }
    }
}

/// I_{A|c} predicted by quantum mechanics.
pub fn qm_intensity(alpha: f64, phi: f64, c: Outcome) -> f64 {
    let (s2, c2) = (alpha.sin().powi(2), alpha.cos().powi(2));
    let fringe = (phi / 2.0).cos().powi(2);
    match c {
        Outcome::C0 => 0.25 * c2 + 0.5 * s2 * fringe,
        Outcome::C1 => 0.25 * s2 + 0.5 * c2 * fringe,
    }
}

/// I_{A|c} predicted by the hidden-variable model, identical for both
/// outcomes and independent of α. Not renormalized.
pub fn hv_intensity(phi: f64) -> f64 {
    0.25 + 0.5 * (phi / 2.0).cos().powi(2)
}

pub fn qm_visibility(alpha: f64, c: Outcome) -> f64 {
    match c {
        Outcome::C0 => alpha.sin().powi(2),
        Outcome::C1 => alpha.cos().powi(2),
    }
}

pub fn hv_visibility() -> f64 {
    0.5
}

/// One line of the prediction table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PredictionRow {
    pub model: Model,
    pub outcome: Outcome,
}

impl PredictionRow {
    pub fn intensity(&self, alpha: f64, phi: f64) -> f64 {
        match self.model {
            Model::Qm => qm_intensity(alpha, phi, self.outcome),
            Model::Hv => hv_intensity(phi),
        }
    }

    pub fn visibility(&self, alpha: f64) -> f64 {
        match self.model {
            Model::Qm => qm_visibility(alpha, self.outcome),
            Model::Hv => hv_visibility(),
        }
    }

    pub fn table() -> [PredictionRow; 4] {
        [
            PredictionRow { model: Model::Qm, outcome: Outcome::C0 },
            PredictionRow { model: Model::Qm, outcome: Outcome::C1 },
            PredictionRow { model: Model::Hv, outcome: Outcome::C0 },
            PredictionRow { model: Model::Hv, outcome: Outcome::C1 },
        ]
    }
}

/// (I_max − I_min) / (I_max + I_min) over sampled (φ, I) points.
///
/// A constant curve has visibility 0; a curve whose extrema sum to zero has
/// none.
pub fn visibility_from_curve(samples: &[(f64, f64)]) -> Result<f64> {
    if samples.len() < 2 {
        return Err(Error::UndefinedVisibility(format!(
            "need at least two samples, got {}",
            samples.len()
        )));
    }
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(_, i) in samples {
        if !i.is_finite() {
            return Err(Error::UndefinedVisibility(format!("non-finite intensity {i}")));
        }
        lo = lo.min(i);
        hi = hi.max(i);
    }
    if hi == lo && hi != 0.0 {
        return Ok(0.0);
    }
    let sum = hi + lo;
    if sum == 0.0 {
        return Err(Error::UndefinedVisibility("I_max + I_min = 0".into()));
    }
    Ok((hi - lo) / sum)
}

/// Default work-qubit rotation angles: six values from 0 to π/2.
pub fn default_alpha_grid() -> Vec<f64> {
    (0..6).map(|k| k as f64 * PI / 10.0).collect()
}

/// Default phase grid: thirteen equally spaced points on [0, 2π].
pub fn default_phi_grid() -> Vec<f64> {
    (0..13).map(|k| k as f64 * 2.0 * PI / 12.0).collect()
}
