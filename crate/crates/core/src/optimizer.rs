// Copyright 2026 EAQDC Contributors
// SPDX-License-Identifier: Apache-2.0

//! Piecewise-constant shaped pulses optimized for Hilbert–Schmidt fidelity.
//!
//! Controls are Cartesian (ux, uy) amplitudes in Hz per channel and segment.
//! The objective is Φ = |Tr(W†U)|² / d²; the reported fidelity is √Φ.

use std::fmt::Write as _;

use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::nmr::{drift_hamiltonian, shaped_propagator, Control, Segment, ShapedPulse, SpinSystem};
use crate::quantum::{hs_fidelity, identity, Matrix, ZERO};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GradientMethod {
    /// Propagator derivatives from each segment's eigendecomposition.
    Exact,
    /// Forward differences, one perturbed segment propagator per control.
    FiniteDifference,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitialGuess {
    Zero,
    Random,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerParams {
    pub segments: usize,
    /// Seconds per segment.
    pub dt: f64,
    /// Amplitude bound per channel, Hz.
    pub max_amplitude: f64,
    /// Below this the run is reported as not converged.
    pub threshold: f64,
    /// Stop as soon as this fidelity is reached.
    pub goal: f64,
    /// L-BFGS iterations per start.
    pub max_iterations: usize,
    /// Extra random starts after the first one misses the threshold.
    pub restarts: usize,
    /// Function evaluations for the coordinate-search fallback; 0 disables.
    pub coordinate_budget: usize,
    pub seed: u64,
    /// Spins driven by the pulse; `None` drives every spin.
    pub channels: Option<Vec<usize>>,
    pub gradient: GradientMethod,
    pub initial: InitialGuess,
}

impl Default for OptimizerParams {
    fn default() -> Self {
        Self {
            segments: 100,
            dt: 10e-6,
            max_amplitude: 10_000.0,
            threshold: 0.995,
            goal: 0.9999,
            max_iterations: 400,
            restarts: 3,
            coordinate_budget: 2000,
            seed: 7,
            channels: None,
            gradient: GradientMethod::Exact,
            initial: InitialGuess::Random,
        }
    }
}

impl OptimizerParams {
    /// 1500 × 5 μs, the discretization used for the SWAP pulse.
    pub fn swap() -> Self {
        Self { segments: 1500, dt: 5e-6, goal: 0.997, max_iterations: 600, ..Self::default() }
    }
}

#[derive(Clone, Debug)]
pub struct OptimizationRun {
    pub target: Matrix,
    pub segments: usize,
    pub dt: f64,
    pub max_amplitude: f64,
    pub budget: usize,
    pub fidelity: f64,
    pub threshold: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Best fidelity after each accepted step, across all starts.
    pub history: Vec<f64>,
    pub pulse: ShapedPulse,
}

/// Ordered product of segment propagators under the always-on couplings.
pub fn pulse_propagator(pulse: &ShapedPulse, system: &SpinSystem) -> Result<Matrix> {
    for &c in &pulse.channels {
        system.check_spin(c)?;
    }
    shaped_propagator(system, pulse, false)
}

struct Problem {
    d: usize,
    dt: f64,
    drift: Matrix,
    /// Bit mask of each channel's spin in a basis index.
    masks: Vec<usize>,
    target_adj: Matrix,
    n_seg: usize,
}

struct Eval {
    phi: f64,
    grad: Vec<f64>,
}

impl Problem {
    fn n_params(&self) -> usize {
        self.n_seg * self.masks.len() * 2
    }

    fn hamiltonian(&self, x: &[f64], k: usize) -> Matrix {
        let mut h = self.drift.clone();
        let nc = self.masks.len();
        for (c, &m) in self.masks.iter().enumerate() {
            let ux = x[(k * nc + c) * 2];
            let uy = x[(k * nc + c) * 2 + 1];
            if ux == 0.0 && uy == 0.0 {
                continue;
            }
            let (px, py) = (std::f64::consts::PI * ux, std::f64::consts::PI * uy);
            for i in 0..self.d {
                let j = i ^ m;
                // ⟨i|σx|j⟩ = 1; ⟨i|σy|j⟩ = −i if i has the bit clear.
                let y = if i & m == 0 { Complex64::new(0.0, -py) } else { Complex64::new(0.0, py) };
                h[(i, j)] += Complex64::new(px, 0.0) + y;
            }
        }
        h
    }

    fn propagator(&self, x: &[f64], k: usize) -> (Matrix, SymmetricEigen<Complex64, nalgebra::Dyn>) {
        let eig = SymmetricEigen::new(self.hamiltonian(x, k));
        let mut scaled = eig.eigenvectors.clone();
        for (j, &l) in eig.eigenvalues.iter().enumerate() {
            let mut col = scaled.column_mut(j);
            col *= Complex64::from_polar(1.0, -l * self.dt);
        }
        (scaled * eig.eigenvectors.adjoint(), eig)
    }

    fn phi_of(&self, overlap: Complex64) -> f64 {
        overlap.norm_sqr() / (self.d * self.d) as f64
    }

    fn evaluate(&self, x: &[f64], method: Option<GradientMethod>) -> Eval {
        let d = self.d;
        let mut us = Vec::with_capacity(self.n_seg);
        let mut eigs = Vec::with_capacity(if method == Some(GradientMethod::Exact) { self.n_seg } else { 0 });
        // left[k] = U_{k−1} ⋯ U_0
        let mut left = Vec::with_capacity(if method.is_some() { self.n_seg + 1 } else { 0 });
        let mut acc = identity(d);
        for k in 0..self.n_seg {
            let (u, eig) = self.propagator(x, k);
            if method.is_some() {
                left.push(acc.clone());
            }
            acc = &u * acc;
            us.push(u);
            if method == Some(GradientMethod::Exact) {
                eigs.push(eig);
            }
        }
        let overlap = (&self.target_adj * &acc).trace();
        let phi = self.phi_of(overlap);
        let Some(method) = method else {
            return Eval { phi, grad: Vec::new() };
        };

        let nc = self.masks.len();
        let mut grad = vec![0.0; self.n_params()];
        let norm = 2.0 / (d * d) as f64;
        let mut right = identity(d);
        for k in (0..self.n_seg).rev() {
            // Tr(W† R U_k L) = Tr(B U_k)
            let b = &left[k] * &self.target_adj * &right;
            match method {
                GradientMethod::Exact => {
                    let eig = &eigs[k];
                    let v = &eig.eigenvectors;
                    let c = v.adjoint() * &b * v;
                    let lam = &eig.eigenvalues;
                    // Weighted matrix whose trace against a control gives d Tr(B U_k).
                    let phases: Vec<Complex64> = lam.iter().map(|&l| Complex64::from_polar(1.0, -l * self.dt)).collect();
                    let mut w = Matrix::zeros(d, d);
                    for m in 0..d {
                        for n in 0..d {
                            let (lm, ln) = (lam[m], lam[n]);
                            let gamma = if ((lm - ln) * self.dt).abs() < 1e-8 {
                                Complex64::new(0.0, -self.dt) * (phases[m] + phases[n]) * 0.5
                            } else {
                                (phases[m] - phases[n]) / (lm - ln)
                            };
                            w[(n, m)] = c[(n, m)] * gamma;
                        }
                    }
                    let g = v * w * v.adjoint();
                    for (ch, &mask) in self.masks.iter().enumerate() {
                        let (mut tx, mut ty) = (ZERO, ZERO);
                        for i in 0..d {
                            let j = i ^ mask;
                            // Σ_ij G_ij H_ji
                            tx += g[(i, j)];
                            let y = if j & mask == 0 { Complex64::new(0.0, -1.0) } else { Complex64::new(0.0, 1.0) };
                            ty += g[(i, j)] * y;
                        }
                        let pi = std::f64::consts::PI;
                        let base = (k * nc + ch) * 2;
                        grad[base] = norm * (overlap.conj() * tx * pi).re;
                        grad[base + 1] = norm * (overlap.conj() * ty * pi).re;
                    }
                }
                GradientMethod::FiniteDifference => {
                    let base_tr = (&b * &us[k]).trace();
                    let mut xp = x.to_vec();
                    for p in 0..nc * 2 {
                        let idx = k * nc * 2 + p;
                        let h = 1e-6 * (1.0 + x[idx].abs());
                        xp[idx] = x[idx] + h;
                        let (up, _) = self.propagator(&xp, k);
                        let shifted = overlap + (&b * up).trace() - base_tr;
                        grad[idx] = (self.phi_of(shifted) - phi) / h;
                        xp[idx] = x[idx];
                    }
                }
            }
            right = &right * &us[k];
        }
        Eval { phi, grad }
    }
}

/// Project each (ux, uy) pair onto the amplitude disc. True if anything moved.
fn clamp(x: &mut [f64], bound: f64) -> bool {
    let mut hit = false;
    for pair in x.chunks_mut(2) {
        let r = pair[0].hypot(pair[1]);
        if r > bound {
            pair[0] *= bound / r;
            pair[1] *= bound / r;
            hit = true;
        }
    }
    hit
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct Lbfgs {
    memory: usize,
    s: Vec<Vec<f64>>,
    y: Vec<Vec<f64>>,
}

impl Lbfgs {
    fn reset(&mut self) {
        self.s.clear();
        self.y.clear();
    }

    fn push(&mut self, s: Vec<f64>, y: Vec<f64>) {
        if dot(&s, &y) > 1e-300 {
            if self.s.len() == self.memory {
                self.s.remove(0);
                self.y.remove(0);
            }
            self.s.push(s);
            self.y.push(y);
        }
    }

    /// −H·g for the loss gradient `g`.
    fn direction(&self, g: &[f64]) -> Vec<f64> {
        let mut q = g.to_vec();
        let mut alpha = vec![0.0; self.s.len()];
        for i in (0..self.s.len()).rev() {
            let rho = 1.0 / dot(&self.y[i], &self.s[i]);
            alpha[i] = rho * dot(&self.s[i], &q);
            q.iter_mut().zip(&self.y[i]).for_each(|(qj, yj)| *qj -= alpha[i] * yj);
        }
        if let (Some(s), Some(y)) = (self.s.last(), self.y.last()) {
            let gamma = dot(s, y) / dot(y, y);
            q.iter_mut().for_each(|v| *v *= gamma);
        }
        for i in 0..self.s.len() {
            let rho = 1.0 / dot(&self.y[i], &self.s[i]);
            let beta = rho * dot(&self.y[i], &q);
            q.iter_mut().zip(&self.s[i]).for_each(|(qj, sj)| *qj += (alpha[i] - beta) * sj);
        }
        q.iter_mut().for_each(|v| *v = -*v);
        q
    }
}

struct Search<'a> {
    problem: &'a Problem,
    params: &'a OptimizerParams,
    best_x: Vec<f64>,
    best_phi: f64,
    history: Vec<f64>,
    iterations: usize,
}

impl Search<'_> {
    fn goal_phi(&self) -> f64 {
        self.params.goal * self.params.goal
    }

    fn record(&mut self, x: &[f64], phi: f64) {
        if phi > self.best_phi {
            self.best_phi = phi;
            self.best_x = x.to_vec();
        }
        self.history.push(self.best_phi.sqrt());
    }

    /// Minimize 1 − Φ from `x` with projected L-BFGS and Armijo backtracking.
    fn descend(&mut self, mut x: Vec<f64>) {
        let method = Some(self.params.gradient);
        let bound = self.params.max_amplitude;
        clamp(&mut x, bound);
        let mut ev = self.problem.evaluate(&x, method);
        self.record(&x, ev.phi);
        let mut mem = Lbfgs { memory: 12, s: Vec::new(), y: Vec::new() };
        for _ in 0..self.params.max_iterations {
            if self.best_phi >= self.goal_phi() {
                return;
            }
            let g: Vec<f64> = ev.grad.iter().map(|v| -v).collect();
            let gnorm = dot(&g, &g).sqrt();
            if gnorm < 1e-14 {
                return;
            }
            let mut d = mem.direction(&g);
            let mut slope = dot(&g, &d);
            if slope >= 0.0 {
                mem.reset();
                d = g.iter().map(|v| -v).collect();
                slope = -gnorm * gnorm;
            }
            let mut step = if mem.s.is_empty() { (0.05 * bound / gnorm).min(1e12) } else { 1.0 };
            let mut accepted = None;
            for _ in 0..40 {
                let mut trial: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + step * b).collect();
                let hit = clamp(&mut trial, bound);
                let moved: Vec<f64> = trial.iter().zip(&x).map(|(a, b)| a - b).collect();
                let predicted = dot(&g, &moved).min(step * slope);
                let tev = self.problem.evaluate(&trial, None);
                if 1.0 - tev.phi <= 1.0 - ev.phi + 1e-4 * predicted && tev.phi > ev.phi {
                    accepted = Some((trial, moved, hit));
                    break;
                }
                step *= 0.5;
            }
            self.iterations += 1;
            let Some((trial, moved, hit)) = accepted else {
                if mem.s.is_empty() {
                    return;
                }
                mem.reset();
                continue;
            };
            let next = self.problem.evaluate(&trial, method);
            let y: Vec<f64> = next.grad.iter().zip(&ev.grad).map(|(a, b)| -(a - b)).collect();
            if hit {
                mem.reset();
            } else {
                mem.push(moved, y);
            }
            x = trial;
            ev = next;
            self.record(&x, ev.phi);
        }
    }

    /// Derivative-free polish: try ± steps on each control in turn.
    fn coordinate_search(&mut self) {
        let bound = self.params.max_amplitude;
        let mut x = self.best_x.clone();
        let mut phi = self.best_phi;
        let mut step = 0.02 * bound;
        let mut evals = 0;
        while evals < self.params.coordinate_budget && step > 1e-6 * bound {
            let mut improved = false;
            for i in 0..x.len() {
                for sign in [1.0, -1.0] {
                    if evals >= self.params.coordinate_budget || phi >= self.goal_phi() {
                        break;
                    }
                    let mut trial = x.clone();
                    trial[i] += sign * step;
                    clamp(&mut trial, bound);
                    evals += 1;
                    let p = self.problem.evaluate(&trial, None).phi;
                    if p > phi {
                        x = trial;
                        phi = p;
                        improved = true;
                        self.iterations += 1;
                        self.record(&x, phi);
                        break;
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
    }
}

/// Search for a shaped pulse whose propagator matches `target` up to a
/// global phase. Always returns the best pulse found.
pub fn optimize(target: &Matrix, system: &SpinSystem, params: &OptimizerParams) -> Result<OptimizationRun> {
    let d = system.dim();
    if target.shape() != (d, d) {
        return Err(Error::Dimension(format!("target {:?} for a {}-spin system", target.shape(), system.n())));
    }
    if params.segments == 0 {
        return Err(Error::InvalidParameter("at least one segment".into()));
    }
    if !(params.dt > 0.0) {
        return Err(Error::NegativeDuration(params.dt));
    }
    if !(params.max_amplitude > 0.0) {
        return Err(Error::InvalidParameter("amplitude bound must be positive".into()));
    }
    let channels = params.channels.clone().unwrap_or_else(|| (0..system.n()).collect());
    for &c in &channels {
        system.check_spin(c)?;
    }
    let n = system.n();
    let problem = Problem {
        d,
        dt: params.dt,
        drift: drift_hamiltonian(system, false),
        masks: channels.iter().map(|&c| 1usize << (n - 1 - c)).collect(),
        target_adj: target.adjoint(),
        n_seg: params.segments,
    };

    let mut search = Search {
        problem: &problem,
        params,
        best_x: vec![0.0; problem.n_params()],
        best_phi: f64::NEG_INFINITY,
        history: Vec::new(),
        iterations: 0,
    };
    let thresh_phi = params.threshold * params.threshold;
    for start in 0..=params.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed.wrapping_add(start as u64));
        let x0 = match (start, params.initial) {
            (0, InitialGuess::Zero) => vec![0.0; problem.n_params()],
            _ => random_start(&mut rng, problem.n_params(), params.max_amplitude),
        };
        search.descend(x0);
        if search.best_phi >= thresh_phi {
            break;
        }
    }
    if search.best_phi < thresh_phi && params.coordinate_budget > 0 {
        search.coordinate_search();
    }

    let nc = channels.len();
    let segments: Vec<Segment> = (0..params.segments)
        .map(|k| Segment {
            dt: params.dt,
            controls: (0..nc)
                .map(|c| Control::from_xy(search.best_x[(k * nc + c) * 2], search.best_x[(k * nc + c) * 2 + 1]))
                .collect(),
        })
        .collect();
    let label = "grape".to_string();
    let pulse = ShapedPulse::new(label, channels, segments)?;
    let u = pulse_propagator(&pulse, system)?;
    let fidelity = hs_fidelity(target, &u)?;
    let pulse = pulse.with_propagator(system.fingerprint(), u);
    Ok(OptimizationRun {
        target: target.clone(),
        segments: params.segments,
        dt: params.dt,
        max_amplitude: params.max_amplitude,
        budget: params.max_iterations,
        fidelity,
        threshold: params.threshold,
        converged: fidelity >= params.threshold,
        iterations: search.iterations,
        history: search.history,
        pulse,
    })
}

fn random_start(rng: &mut ChaCha8Rng, n: usize, bound: f64) -> Vec<f64> {
    let normal = Normal::new(0.0, 0.1 * bound).expect("positive spread");
    let mut x: Vec<f64> = (0..n).map(|_| normal.sample(rng)).collect();
    // Break exact symmetry of the initial guess between runs.
    x.iter_mut().for_each(|v| *v += rng.random_range(-1e-3..1e-3));
    x
}

impl OptimizationRun {
    /// Error if the run missed its threshold.
    pub fn require_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::OptimizerFailed { best: self.fidelity, threshold: self.threshold })
        }
    }
}

/// Textual segment table, one control per line.
pub fn export_segments(pulse: &ShapedPulse) -> String {
    let mut out = String::new();
    let channels: Vec<String> = pulse.channels.iter().map(|c| c.to_string()).collect();
    let _ = writeln!(out, "# label={} channels={}", pulse.label, channels.join(","));
    let _ = writeln!(out, "index channel amplitude phase dt");
    for (k, seg) in pulse.segments.iter().enumerate() {
        for (ch, ctl) in pulse.channels.iter().zip(&seg.controls) {
            let _ = writeln!(out, "{k} {ch} {} {} {}", ctl.amplitude, ctl.phase, seg.dt);
        }
    }
    out
}

pub fn parse_segments(text: &str) -> Result<ShapedPulse> {
    let mut label = String::from("pulse");
    let mut channels: Option<Vec<usize>> = None;
    let mut segments: Vec<Segment> = Vec::new();
    let perr = |line: usize, message: String| Error::Parse { line, message };
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let t = raw.trim();
        if t.is_empty() || t.starts_with("index") {
            continue;
        }
        if let Some(header) = t.strip_prefix('#') {
            for field in header.split_whitespace() {
                if let Some(v) = field.strip_prefix("label=") {
                    label = v.to_string();
                } else if let Some(v) = field.strip_prefix("channels=") {
                    let parsed: std::result::Result<Vec<usize>, _> = v.split(',').map(str::parse).collect();
                    channels = Some(parsed.map_err(|e| perr(line, format!("bad channel list: {e}")))?);
                }
            }
            continue;
        }
        let cols: Vec<&str> = t.split_whitespace().collect();
        if cols.len() != 5 {
            return Err(perr(line, format!("expected 5 columns, found {}", cols.len())));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|e| perr(line, format!("`{s}`: {e}")));
        let int = |s: &str| s.parse::<usize>().map_err(|e| perr(line, format!("`{s}`: {e}")));
        let (k, ch) = (int(cols[0])?, int(cols[1])?);
        let ctl = Control { amplitude: num(cols[2])?, phase: num(cols[3])? };
        let dt = num(cols[4])?;
        let chans = channels.get_or_insert_with(Vec::new);
        let slot = match chans.iter().position(|&c| c == ch) {
            Some(p) => p,
            None if k == 0 => {
                chans.push(ch);
                chans.len() - 1
            }
            None => return Err(perr(line, format!("channel {ch} not declared"))),
        };
        if k == segments.len() {
            segments.push(Segment { dt, controls: Vec::new() });
        } else if k + 1 != segments.len() {
            return Err(perr(line, format!("segment index {k} out of order")));
        }
        let seg = segments.last_mut().expect("pushed above");
        if seg.dt != dt {
            return Err(perr(line, format!("segment {k} has two durations")));
        }
        if seg.controls.len() != slot {
            return Err(perr(line, format!("channel {ch} out of order in segment {k}")));
        }
        seg.controls.push(ctl);
    }
    ShapedPulse::new(label, channels.unwrap_or_default(), segments)
}
