// Copyright 2026 EAQDC Contributors
// SPDX-License-Identifier: Apache-2.0

//! Parameter sweeps over (α, φ) across simulation modes.

mod config;
mod export;

pub use config::{ExperimentConfig, NoiseConfig};
pub use export::{export, from_json, rows_csv, spread_csv, to_json, visibility_csv, Format};

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{build_eaqdc, intensities, IntensityPair};
use crate::compiler::{compile, compile_swap, lower_gate, CompilationReport, CompileOptions, PulseLibrary, RotationMode, SwapStrategy};
use crate::error::{Error, Result};
use crate::nmr::{evolve, prepare_pps, Control, EvolveOptions, PulseEvent, PulseProgram, Segment, ShapedPulse, SpinSystem};
use crate::optimizer::OptimizerParams;
use crate::predictions::{hv_intensity, qm_intensity, visibility_from_curve, Outcome};
use crate::quantum::{DensityMatrix, Gate, StateVector, A, C};
use crate::readout::{extract_direct, extract_swapped, intensities_from_coefficients, measure_peaks_with, pps_reference, PeakMap, PeakSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    AnalyticQm,
    AnalyticHv,
    Circuit,
    PulseIdeal,
    PulseShaped,
    PulseNoisy,
}

impl Mode {
    pub const ALL: [Mode; 6] =
        [Mode::AnalyticQm, Mode::AnalyticHv, Mode::Circuit, Mode::PulseIdeal, Mode::PulseShaped, Mode::PulseNoisy];

    pub fn name(self) -> &'static str {
        match self {
            Mode::AnalyticQm => "analytic-qm",
            Mode::AnalyticHv => "analytic-hv",
            Mode::Circuit => "circuit",
            Mode::PulseIdeal => "pulse-ideal",
            Mode::PulseShaped => "pulse-shaped",
            Mode::PulseNoisy => "pulse-noisy",
        }
    }

    pub fn is_stochastic(self) -> bool {
        self == Mode::PulseNoisy
    }

    fn uses_shaped_pulses(self) -> bool {
        matches!(self, Mode::PulseShaped | Mode::PulseNoisy)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Mode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown mode `{s}`")))
    }
}

#[derive(Clone, Debug)]
pub struct SweepSpec {
    pub alphas: Vec<f64>,
    pub phis: Vec<f64>,
    pub modes: Vec<Mode>,
    pub repeats: usize,
    pub seed: u64,
    pub eta: f64,
    pub system: SpinSystem,
    pub noise: NoiseConfig,
    pub optimizer: OptimizerParams,
    pub swap_optimizer: OptimizerParams,
    /// Shared cache of shaped pulses; reuse it across sweeps to skip
    /// re-optimization.
    pub library: PulseLibrary,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            alphas: crate::predictions::default_alpha_grid(),
            phis: crate::predictions::default_phi_grid(),
            modes: vec![Mode::AnalyticQm, Mode::AnalyticHv, Mode::Circuit],
            repeats: 4,
            seed: 2026,
            eta: 0.5,
            system: SpinSystem::diethyl_fluoromalonate(),
            noise: NoiseConfig::calibrated(),
            optimizer: OptimizerParams::default(),
            swap_optimizer: OptimizerParams::swap(),
            library: PulseLibrary::new(),
        }
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.modes.is_empty() {
            return Err(Error::InvalidParameter("no modes selected".into()));
        }
        if self.alphas.is_empty() || self.phis.is_empty() {
            return Err(Error::InvalidParameter("empty α or φ grid".into()));
        }
        if self.repeats == 0 {
            return Err(Error::InvalidParameter("repeats must be at least 1".into()));
        }
        if self.alphas.iter().chain(&self.phis).any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("non-finite grid value".into()));
        }
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(Error::InvalidParameter(format!("eta = {} outside [0, 1]", self.eta)));
        }
        self.noise.validate()
    }

    pub fn compile_options(&self, mode: Mode) -> CompileOptions {
        let shaped = mode.uses_shaped_pulses();
        CompileOptions {
            rotations: if shaped { RotationMode::Shaped } else { RotationMode::Ideal },
            swap: if shaped { SwapStrategy::Shaped } else { SwapStrategy::ThreeCnot },
            readout_swap: None,
            optimizer: self.optimizer.clone(),
            swap_optimizer: self.swap_optimizer.clone(),
            library: self.library.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub mode: Mode,
    pub alpha: f64,
    pub phi: f64,
    pub repeat: usize,
    pub i_c0: Option<f64>,
    pub i_c1: Option<f64>,
    /// Why the cell has no value, if it has none.
    pub flag: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VisibilityRow {
    pub mode: Mode,
    pub alpha: f64,
    pub v_c0: Option<f64>,
    pub v_c1: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpreadRow {
    pub mode: Mode,
    pub alpha: f64,
    pub phi: f64,
    pub std_c0: Option<f64>,
    pub std_c1: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<Row>,
    pub visibility: Vec<VisibilityRow>,
    pub spread: Vec<SpreadRow>,
}

impl SweepResult {
    pub fn flagged(&self) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(|r| r.flag.is_some())
    }

    pub fn visibility_of(&self, mode: Mode, alpha: f64) -> Option<&VisibilityRow> {
        self.visibility.iter().find(|v| v.mode == mode && v.alpha == alpha)
    }

    pub fn max_spread(&self, mode: Mode) -> f64 {
        self.spread
            .iter()
            .filter(|s| s.mode == mode)
            .flat_map(|s| [s.std_c0, s.std_c1])
            .flatten()
            .fold(0.0, f64::max)
    }
}

/// Shared per-system state of the pulse modes.
pub struct PulseContext {
    pub system: SpinSystem,
    pub pps: DensityMatrix,
    pub map: PeakMap,
    pub reference: f64,
}

impl PulseContext {
    pub fn new(system: &SpinSystem) -> Result<Self> {
        let pps = prepare_pps(system)?;
        let map = PeakMap::for_spin(system, A)?;
        let reference = pps_reference(system, &map, true)?;
        Ok(Self { system: system.clone(), pps, map, reference })
    }
}

/// Peaks of one experiment at (α, φ): compile, evolve from the
/// pseudo-pure state, read ¹³C directly and after a SWAP with ¹⁹F.
pub fn pulse_peaks(
    ctx: &PulseContext,
    alpha: f64,
    phi: f64,
    eta: f64,
    options: &CompileOptions,
    noise: Option<(&NoiseConfig, &mut ChaCha8Rng)>,
) -> Result<(PeakSet, PeakSet, CompilationReport)> {
    let circuit = build_eaqdc(alpha, phi, eta)?;
    let report = compile(&circuit, &ctx.system, options)?;
    let swap = compile_swap((A, C), &ctx.system, options.swap, options)?;
    let (program, swap, evolve_opts, rng, readout_sigma) = match noise {
        None => (report.program.clone(), swap, EvolveOptions::ideal(), None, 0.0),
        Some((cfg, rng)) => {
            let p = perturb(&report.program, cfg, rng)?;
            let s = perturb(&swap, cfg, rng)?;
            (p, s, cfg.evolve_options(), Some(rng), cfg.readout_sigma)
        }
    };
    let direct = evolve(&ctx.pps, &program, &ctx.system, &evolve_opts)?;
    let swapped = evolve(&direct, &swap, &ctx.system, &evolve_opts)?;
    let mut peaks_d = measure_peaks_with(&direct, &ctx.map, ctx.reference)?;
    let mut peaks_s = measure_peaks_with(&swapped, &ctx.map, ctx.reference)?;
    if let Some(rng) = rng {
        for f in peaks_d.f.iter_mut().chain(peaks_s.f.iter_mut()) {
            let z: f64 = StandardNormal.sample(rng);
            *f += readout_sigma * z;
        }
    }
    Ok((peaks_d, peaks_s, report))
}

pub fn pulse_experiment(
    ctx: &PulseContext,
    alpha: f64,
    phi: f64,
    eta: f64,
    options: &CompileOptions,
    noise: Option<(&NoiseConfig, &mut ChaCha8Rng)>,
) -> Result<(IntensityPair, CompilationReport)> {
    let (direct, swapped, report) = pulse_peaks(ctx, alpha, phi, eta, options, noise)?;
    let est = extract_direct(&direct).merge(&extract_swapped(&swapped));
    Ok((intensities_from_coefficients(&est)?, report))
}

/// Miscalibrate every rf pulse by one random scale factor (per call), as
/// a drifting rf power would.
fn perturb(program: &PulseProgram, cfg: &NoiseConfig, rng: &mut ChaCha8Rng) -> Result<PulseProgram> {
    if cfg.flip_sigma == 0.0 {
        return Ok(program.clone());
    }
    let z: f64 = StandardNormal.sample(rng);
    let scale = 1.0 + cfg.flip_sigma * z;
    program
        .events()
        .iter()
        .map(|e| {
            Ok(match e {
                PulseEvent::Hard { targets, phase, angle, duration } => {
                    PulseEvent::Hard { targets: targets.clone(), phase: *phase, angle: angle * scale, duration: *duration }
                }
                PulseEvent::Shaped(p) => {
                    let segments = p
                        .segments
                        .iter()
                        .map(|s| Segment {
                            dt: s.dt,
                            controls: s
                                .controls
                                .iter()
                                .map(|c| Control { amplitude: c.amplitude * scale, phase: c.phase })
                                .collect(),
                        })
                        .collect();
                    PulseEvent::Shaped(ShapedPulse::new(p.label.clone(), p.channels.clone(), segments)?)
                }
                other => other.clone(),
            })
        })
        .collect()
}

/// (mode, α index, φ index, repeat)
type Cell = (Mode, usize, usize, usize);

fn cell_seed(seed: u64, mode: Mode, ai: usize, pi: usize, repeat: usize) -> u64 {
    // splitmix64 over the cell coordinates
    let mut z = seed
        ^ (mode as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ (ai as u64).wrapping_mul(0xBF58_476D_1CE4_E5B9)
        ^ (pi as u64).wrapping_mul(0x94D0_49BB_1331_11EB)
        ^ (repeat as u64).wrapping_mul(0xD6E8_FEB8_6659_FD93);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Optimize every shaped pulse the sweep will need, in parallel.
fn warm_library(spec: &SweepSpec) {
    if !spec.modes.iter().any(|m| m.uses_shaped_pulses()) {
        return;
    }
    let opts = spec.compile_options(Mode::PulseShaped);
    let mut jobs: Vec<(Gate, Vec<usize>)> = Vec::new();
    jobs.push((Gate::swap(), vec![A, C]));
    for &p in &spec.phis {
        jobs.push((Gate::phase(p), vec![A]));
    }
    for &a in &spec.alphas {
        jobs.push((Gate::y_alpha(a), vec![C]));
    }
    // Failures resurface, and get flagged, when the cells compile.
    jobs.par_iter().for_each(|(g, q)| {
        let _ = lower_gate(g, q, &spec.system, &opts);
    });
}

/// Run every (mode, α, φ, repeat) cell. Deterministic modes are evaluated
/// once per (α, φ) and copied across repeats.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let needs_pulses = spec.modes.iter().any(|m| matches!(m, Mode::PulseIdeal | Mode::PulseShaped | Mode::PulseNoisy));
    let ctx = if needs_pulses { Some(PulseContext::new(&spec.system)?) } else { None };
    warm_library(spec);

    let mut modes = spec.modes.clone();
    modes.sort();
    modes.dedup();
    let mut cells = Vec::new();
    for &mode in &modes {
        for ai in 0..spec.alphas.len() {
            for pi in 0..spec.phis.len() {
                let runs = if mode.is_stochastic() { spec.repeats } else { 1 };
                for repeat in 0..runs {
                    cells.push((mode, ai, pi, repeat));
                }
            }
        }
    }
    let options: BTreeMap<Mode, CompileOptions> = modes.iter().map(|&m| (m, spec.compile_options(m))).collect();
    let computed: Vec<(Cell, Result<IntensityPair>)> = cells
        .par_iter()
        .map(|&(mode, ai, pi, repeat)| {
            let (alpha, phi) = (spec.alphas[ai], spec.phis[pi]);
            let value = match mode {
                Mode::AnalyticQm => Ok(IntensityPair {
                    i_c0: qm_intensity(alpha, phi, Outcome::C0),
                    i_c1: qm_intensity(alpha, phi, Outcome::C1),
                }),
                Mode::AnalyticHv => Ok(IntensityPair { i_c0: hv_intensity(phi), i_c1: hv_intensity(phi) }),
                Mode::Circuit => build_eaqdc(alpha, phi, spec.eta)
                    .and_then(|c| c.simulate(&StateVector::zero(3)?))
                    .and_then(|psi| intensities(&psi)),
                Mode::PulseIdeal | Mode::PulseShaped => {
                    let ctx = ctx.as_ref().expect("context built for pulse modes");
                    pulse_experiment(ctx, alpha, phi, spec.eta, &options[&mode], None).map(|r| r.0)
                }
                Mode::PulseNoisy => {
                    let ctx = ctx.as_ref().expect("context built for pulse modes");
                    let mut rng = ChaCha8Rng::seed_from_u64(cell_seed(spec.seed, mode, ai, pi, repeat));
                    pulse_experiment(ctx, alpha, phi, spec.eta, &options[&mode], Some((&spec.noise, &mut rng)))
                        .map(|r| r.0)
                }
            };
            ((mode, ai, pi, repeat), value)
        })
        .collect();

    let mut rows = Vec::with_capacity(modes.len() * spec.alphas.len() * spec.phis.len() * spec.repeats);
    for ((mode, ai, pi, repeat), value) in computed {
        let copies = if mode.is_stochastic() { repeat..repeat + 1 } else { 0..spec.repeats };
        for r in copies {
            let (i_c0, i_c1, flag) = match &value {
                Ok(p) => (Some(p.i_c0), Some(p.i_c1), None),
                Err(e) => (None, None, Some(e.to_string())),
            };
            rows.push(Row { mode, alpha: spec.alphas[ai], phi: spec.phis[pi], repeat: r, i_c0, i_c1, flag });
        }
    }
    rows.sort_by(|a, b| {
        a.mode
            .cmp(&b.mode)
            .then(a.alpha.total_cmp(&b.alpha))
            .then(a.phi.total_cmp(&b.phi))
            .then(a.repeat.cmp(&b.repeat))
    });
    let (visibility, spread) = summarize(&rows, &modes, spec);
    Ok(SweepResult { rows, visibility, spread })
}

fn mean_std(xs: &[Option<f64>]) -> (Option<f64>, Option<f64>) {
    let v: Option<Vec<f64>> = xs.iter().copied().collect();
    let Some(v) = v else { return (None, None) };
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let std = if v.len() > 1 { (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt() } else { 0.0 };
    (Some(mean), Some(std))
}

fn summarize(rows: &[Row], modes: &[Mode], spec: &SweepSpec) -> (Vec<VisibilityRow>, Vec<SpreadRow>) {
    let mut cells: BTreeMap<(Mode, usize, usize), Vec<&Row>> = BTreeMap::new();
    for r in rows {
        let ai = spec.alphas.iter().position(|&a| a == r.alpha).expect("row alpha from grid");
        let pi = spec.phis.iter().position(|&p| p == r.phi).expect("row phi from grid");
        cells.entry((r.mode, ai, pi)).or_default().push(r);
    }
    let mut visibility = Vec::new();
    let mut spread = Vec::new();
    for &mode in modes {
        for (ai, &alpha) in spec.alphas.iter().enumerate() {
            let mut curve0 = Vec::new();
            let mut curve1 = Vec::new();
            for (pi, &phi) in spec.phis.iter().enumerate() {
                let rs = &cells[&(mode, ai, pi)];
                let (m0, s0) = mean_std(&rs.iter().map(|r| r.i_c0).collect::<Vec<_>>());
                let (m1, s1) = mean_std(&rs.iter().map(|r| r.i_c1).collect::<Vec<_>>());
                spread.push(SpreadRow { mode, alpha, phi, std_c0: s0, std_c1: s1 });
                curve0.push(m0.map(|m| (phi, m)));
                curve1.push(m1.map(|m| (phi, m)));
            }
            let vis = |curve: Vec<Option<(f64, f64)>>| {
                curve.into_iter().collect::<Option<Vec<_>>>().and_then(|c| visibility_from_curve(&c).ok())
            };
            visibility.push(VisibilityRow { mode, alpha, v_c0: vis(curve0), v_c1: vis(curve1) });
        }
    }
    (visibility, spread)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn mode_names_round_trip() {
        for m in Mode::ALL {
            assert_eq!(m.name().parse::<Mode>().unwrap(), m);
        }
        assert!("pulse".parse::<Mode>().is_err());
    }

    #[test]
    fn analytic_visibilities() {
        let spec = SweepSpec { modes: vec![Mode::AnalyticQm, Mode::AnalyticHv], ..Default::default() };
        let res = run_sweep(&spec).unwrap();
        let qm = res.visibility_of(Mode::AnalyticQm, PI / 2.0).unwrap();
        let hv = res.visibility_of(Mode::AnalyticHv, PI / 2.0).unwrap();
        assert!((qm.v_c0.unwrap() - 1.0).abs() < 1e-9);
        assert!((hv.v_c0.unwrap() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn deterministic_modes_have_no_spread() {
        let spec = SweepSpec { modes: vec![Mode::Circuit], ..Default::default() };
        let res = run_sweep(&spec).unwrap();
        assert_eq!(res.rows.len(), 6 * 13 * 4);
        assert_eq!(res.max_spread(Mode::Circuit), 0.0);
    }

    #[test]
    fn rows_sorted_canonically() {
        let spec = SweepSpec { modes: vec![Mode::AnalyticHv, Mode::AnalyticQm], repeats: 2, ..Default::default() };
        let res = run_sweep(&spec).unwrap();
        assert_eq!(res.rows[0].mode, Mode::AnalyticQm);
        assert!(res.rows.windows(2).all(|w| {
            (w[0].mode, w[0].alpha, w[0].phi, w[0].repeat) <= (w[1].mode, w[1].alpha, w[1].phi, w[1].repeat)
        }));
    }

    #[test]
    fn empty_modes_rejected() {
        let spec = SweepSpec { modes: vec![], ..Default::default() };
        assert!(run_sweep(&spec).is_err());
    }
}
