// Copyright 2026 EAQDC Contributors
// SPDX-License-Identifier: Apache-2.0

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Mode, SweepSpec};
use crate::error::{Error, Result};
use crate::nmr::{config_error, EvolveOptions, Relaxation, SpinSystem};

/// Error sources of the noisy pulse mode.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    /// Multiplies every 1/T1; 0 turns longitudinal relaxation off.
    pub t1_scale: f64,
    /// Multiplies every 1/T2.
    pub t2_scale: f64,
    /// Relative rf-power miscalibration, drawn once per run.
    pub flip_sigma: f64,
    /// Additive noise on each integrated peak, in units of the reference.
    pub readout_sigma: f64,
    pub crosstalk: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self { t1_scale: 0.0, t2_scale: 0.0, flip_sigma: 0.0, readout_sigma: 0.0, crosstalk: 0.0 }
    }
}

impl NoiseConfig {
    /// Tuned by hand so that repeats scatter by about 0.02 in intensity,
    /// inside the reported error bars. Not derived from any model of the
    /// spectrometer; 1% rf and readout noise already gives ~0.045.
    pub fn calibrated() -> Self {
        Self { t1_scale: 1.0, t2_scale: 1.0, flip_sigma: 0.005, readout_sigma: 0.005, crosstalk: 0.0 }
    }

    /// Only transverse damping, scaled by `strength`.
    pub fn t2_only(strength: f64) -> Self {
        Self { t2_scale: strength, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("t1_scale", self.t1_scale),
            ("t2_scale", self.t2_scale),
            ("flip_sigma", self.flip_sigma),
            ("readout_sigma", self.readout_sigma),
            ("crosstalk", self.crosstalk),
        ];
        for (name, v) in fields {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidParameter(format!("noise {name} = {v} must be finite and ≥ 0")));
            }
        }
        Ok(())
    }

    pub fn evolve_options(&self) -> EvolveOptions {
        let relaxation = (self.t1_scale > 0.0 || self.t2_scale > 0.0)
            .then_some(Relaxation { t1_scale: self.t1_scale, t2_scale: self.t2_scale });
        EvolveOptions { relaxation, crosstalk: self.crosstalk, ..EvolveOptions::ideal() }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    alpha: Option<Vec<f64>>,
    phi: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    modes: Option<Vec<Mode>>,
    repeats: Option<usize>,
    seed: Option<u64>,
    eta: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOptimizer {
    segments: Option<usize>,
    dt: Option<f64>,
    max_amplitude: Option<f64>,
    threshold: Option<f64>,
    goal: Option<f64>,
    max_iterations: Option<usize>,
    restarts: Option<usize>,
    seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExperiment {
    #[serde(default)]
    grid: RawGrid,
    #[serde(default)]
    sweep: RawSweep,
    noise: Option<NoiseConfig>,
    #[serde(default)]
    optimizer: RawOptimizer,
    #[serde(default)]
    swap_optimizer: RawOptimizer,
    // read separately by the spin-system loader
    spin: Option<toml::Value>,
    coupling: Option<toml::Value>,
}

/// Experiment file: any of `[grid]`, `[sweep]`, `[noise]`, `[optimizer]`,
/// `[swap_optimizer]`, plus an optional molecule in the `[[spin]]` /
/// `[coupling]` layout of [`SpinSystem::load`].
///
/// ```toml
/// [grid]
/// alpha = [0.0, 0.7853981633974483]
/// phi = [0.0, 3.141592653589793]
///
/// [sweep]
/// modes = ["analytic-qm", "circuit"]
/// repeats = 2
/// seed = 11
///
/// [noise]
/// t2_scale = 1.0
/// readout_sigma = 0.01
/// ```
#[derive(Clone, Debug, Default)]
pub struct ExperimentConfig {
    pub alphas: Option<Vec<f64>>,
    pub phis: Option<Vec<f64>>,
    pub modes: Option<Vec<Mode>>,
    pub repeats: Option<usize>,
    pub seed: Option<u64>,
    pub eta: Option<f64>,
    pub noise: Option<NoiseConfig>,
    pub system: Option<SpinSystem>,
    optimizer: Overrides,
    swap_optimizer: Overrides,
}

#[derive(Clone, Debug, Default)]
struct Overrides {
    segments: Option<usize>,
    dt: Option<f64>,
    max_amplitude: Option<f64>,
    threshold: Option<f64>,
    goal: Option<f64>,
    max_iterations: Option<usize>,
    restarts: Option<usize>,
    seed: Option<u64>,
}

impl From<RawOptimizer> for Overrides {
    fn from(r: RawOptimizer) -> Self {
        Self {
            segments: r.segments,
            dt: r.dt,
            max_amplitude: r.max_amplitude,
            threshold: r.threshold,
            goal: r.goal,
            max_iterations: r.max_iterations,
            restarts: r.restarts,
            seed: r.seed,
        }
    }
}

impl Overrides {
    fn apply(&self, p: &mut crate::optimizer::OptimizerParams) {
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = self.$f { p.$f = v; } )* };
        }
        set!(segments, dt, max_amplitude, threshold, goal, max_iterations, restarts, seed);
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str, origin: &Path) -> Result<Self> {
        let raw: RawExperiment = toml::from_str(text).map_err(|e| config_error(origin, text, &e))?;
        let system = match raw.spin {
            Some(_) => Some(SpinSystem::from_toml_str(text, origin)?),
            None if raw.coupling.is_some() => {
                return Err(Error::Config { path: origin.to_path_buf(), message: "[coupling] without [[spin]]".into() })
            }
            None => None,
        };
        let cfg = Self {
            alphas: raw.grid.alpha,
            phis: raw.grid.phi,
            modes: raw.sweep.modes,
            repeats: raw.sweep.repeats,
            seed: raw.sweep.seed,
            eta: raw.sweep.eta,
            noise: raw.noise,
            system,
            optimizer: raw.optimizer.into(),
            swap_optimizer: raw.swap_optimizer.into(),
        };
        // surface semantic errors at load time, with the file name
        cfg.apply(SweepSpec::default())
            .validate()
            .map_err(|e| Error::Config { path: origin.to_path_buf(), message: e.to_string() })?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config { path: path.to_path_buf(), message: e.to_string() })?;
        Self::from_toml_str(&text, path)
    }

    /// `spec` with every setting present in the file replaced.
    pub fn apply(&self, mut spec: SweepSpec) -> SweepSpec {
        if let Some(a) = &self.alphas {
            spec.alphas = a.clone();
        }
        if let Some(p) = &self.phis {
            spec.phis = p.clone();
        }
        if let Some(m) = &self.modes {
            spec.modes = m.clone();
        }
        if let Some(r) = self.repeats {
            spec.repeats = r;
        }
        if let Some(s) = self.seed {
            spec.seed = s;
        }
        if let Some(e) = self.eta {
            spec.eta = e;
        }
        if let Some(n) = self.noise {
            spec.noise = n;
        }
        if let Some(s) = &self.system {
            spec.system = s.clone();
        }
        self.optimizer.apply(&mut spec.optimizer);
        self.swap_optimizer.apply(&mut spec.swap_optimizer);
        spec
    }
}
