// Copyright 2026 EAQDC Contributors
// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::PI;

use num_complex::Complex64;

use super::pps::thermal_state;
use super::program::{Couplings, PulseEvent, PulseProgram, ShapedPulse};
use super::system::SpinSystem;
use crate::error::{Error, Result};
use crate::quantum::{embed, expm_hermitian, identity, pauli_x, pauli_y, re, DensityMatrix, Gate, Matrix};

/// Scales on the per-spin relaxation rates 1/T1 and 1/T2.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Relaxation {
    pub t1_scale: f64,
    pub t2_scale: f64,
}

impl Default for Relaxation {
    fn default() -> Self {
        Self { t1_scale: 1.0, t2_scale: 1.0 }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EvolveOptions {
    pub relaxation: Option<Relaxation>,
    /// Hard pulses take their nominal time with couplings on.
    pub finite_pulses: bool,
    /// Keep chemical-shift offsets during free evolution.
    pub offsets: bool,
    /// Fraction of each hard pulse's flip angle leaking onto the other spins.
    pub crosstalk: f64,
}

impl EvolveOptions {
    pub fn ideal() -> Self {
        Self::default()
    }
}

/// Couplings (and offsets when enabled) that are always on.
pub fn drift_hamiltonian(system: &SpinSystem, offsets: bool) -> Matrix {
    let h = system.coupling_hamiltonian(&system.pairs()).expect("own pairs are valid");
    if offsets {
        h + system.offset_hamiltonian()
    } else {
        h
    }
}

/// π(ux σx + uy σy) on each channel spin, Hz amplitudes in.
pub fn control_hamiltonian(system: &SpinSystem, channels: &[usize], ux_uy: &[(f64, f64)]) -> Result<Matrix> {
    let n = system.n();
    let mut h = Matrix::zeros(system.dim(), system.dim());
    for (&ch, &(ux, uy)) in channels.iter().zip(ux_uy) {
        system.check_spin(ch)?;
        if ux != 0.0 {
            h += embed(&pauli_x(), &[ch], n)? * re(PI * ux);
        }
        if uy != 0.0 {
            h += embed(&pauli_y(), &[ch], n)? * re(PI * uy);
        }
    }
    Ok(h)
}

/// Ordered product of the segment propagators.
pub fn shaped_propagator(system: &SpinSystem, pulse: &ShapedPulse, offsets: bool) -> Result<Matrix> {
    let use_cache = !offsets || system.spins().iter().all(|s| s.offset == 0.0);
    if use_cache {
        if let Some(u) = pulse.cached_propagator(system.fingerprint()) {
            return Ok(u.clone());
        }
    }
    let drift = drift_hamiltonian(system, offsets);
    let mut u = identity(system.dim());
    let mut xy = Vec::with_capacity(pulse.channels.len());
    for seg in &pulse.segments {
        xy.clear();
        xy.extend(seg.controls.iter().map(|c| c.xy()));
        let h = &drift + control_hamiltonian(system, &pulse.channels, &xy)?;
        u = expm_hermitian(&h, seg.dt) * u;
    }
    Ok(u)
}

fn diagonal_propagator(h: &Matrix, t: f64) -> Matrix {
    let d = h.nrows();
    let mut u = Matrix::zeros(d, d);
    for i in 0..d {
        u[(i, i)] = Complex64::from_polar(1.0, -h[(i, i)].re * t);
    }
    u
}

/// Unitary of one event, `None` for the non-unitary crush.
pub fn event_propagator(event: &PulseEvent, system: &SpinSystem, options: &EvolveOptions) -> Result<Option<Matrix>> {
    event.validate(system.n())?;
    let n = system.n();
    Ok(Some(match event {
        PulseEvent::Hard { targets, phase, angle, duration } => {
            if options.finite_pulses && *duration > 0.0 {
                let nu = angle / (2.0 * PI * duration);
                let xy = vec![(nu * phase.cos(), nu * phase.sin()); targets.len()];
                let h = drift_hamiltonian(system, options.offsets) + control_hamiltonian(system, targets, &xy)?;
                expm_hermitian(&h, *duration)
            } else {
                let r = Gate::xy_rotation(*phase, *angle);
                let leak = Gate::xy_rotation(*phase, *angle * options.crosstalk);
                let mut u = identity(system.dim());
                for q in 0..n {
                    if targets.contains(&q) {
                        u = embed(&r, &[q], n)? * u;
                    } else if options.crosstalk != 0.0 {
                        u = embed(&leak, &[q], n)? * u;
                    }
                }
                u
            }
        }
        PulseEvent::Shaped(p) => shaped_propagator(system, p, options.offsets)?,
        PulseEvent::Delay { duration, couplings, .. } => {
            let pairs = match couplings {
                Couplings::All => system.pairs(),
                Couplings::Only(p) => p.clone(),
                Couplings::None => Vec::new(),
            };
            let mut h = system.coupling_hamiltonian(&pairs)?;
            if options.offsets {
                h += system.offset_hamiltonian();
            }
            diagonal_propagator(&h, *duration)
        }
        PulseEvent::Crush => return Ok(None),
    }))
}

/// Whole-program unitary. Fails on crushes, which have none.
pub fn program_propagator(program: &PulseProgram, system: &SpinSystem, options: &EvolveOptions) -> Result<Matrix> {
    let mut u = identity(system.dim());
    for e in program.events() {
        match event_propagator(e, system, options)? {
            Some(v) => u = v * u,
            None => return Err(Error::InvalidParameter("program contains a gradient crush".into())),
        }
    }
    Ok(u)
}

/// Run `program` on `state`, event by event.
pub fn evolve(
    state: &DensityMatrix,
    program: &PulseProgram,
    system: &SpinSystem,
    options: &EvolveOptions,
) -> Result<DensityMatrix> {
    if state.qubits() != system.n() {
        return Err(Error::Dimension(format!(
            "{}-qubit state on a {}-spin system",
            state.qubits(),
            system.n()
        )));
    }
    let mut rho = state.clone();
    for e in program.events() {
        rho = match event_propagator(e, system, options)? {
            Some(u) => rho.conjugate(&u),
            None => rho.dephased(),
        };
        if let Some(r) = options.relaxation {
            let t = e.duration();
            if t > 0.0 {
                rho = relax(&rho, system, t, &r);
            }
        }
    }
    Ok(rho)
}

/// Per-spin damping over time `t`: coherences decay at the summed 1/T2 of
/// the spins that flip, and each product of σz's relaxes at the summed 1/T1
/// of its spins. Populations head for thermal equilibrium (deviation
/// states) or the uniform mixture (full states).
pub fn relax(rho: &DensityMatrix, system: &SpinSystem, t: f64, r: &Relaxation) -> DensityMatrix {
    let n = system.n();
    let d = system.dim();
    // Rates indexed by bit position, qubit 0 being the top bit.
    let rate = |f: &dyn Fn(&super::Spin) -> f64| -> Vec<f64> {
        (0..n).map(|b| f(&system.spins()[n - 1 - b])).collect()
    };
    let r2 = rate(&|s| r.t2_scale / s.t2);
    let r1 = rate(&|s| r.t1_scale / s.t1);
    let summed = |rates: &[f64], mask: usize| -> f64 {
        (0..n).filter(|b| mask >> b & 1 == 1).map(|b| rates[b]).sum()
    };

    let mut m = rho.entries().clone();
    for row in 0..d {
        for col in 0..d {
            if row != col {
                m[(row, col)] *= (-t * summed(&r2, row ^ col)).exp();
            }
        }
    }

    let sign = |x: usize, s: usize| if (x & s).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
    let walsh = |p: &[f64]| -> Vec<f64> {
        (0..d).map(|s| (0..d).map(|x| p[x] * sign(x, s)).sum::<f64>() / d as f64).collect()
    };
    let pops: Vec<f64> = (0..d).map(|i| m[(i, i)].re).collect();
    let target: Vec<f64> = if rho.is_deviation() {
        thermal_state(system).diagonal()
    } else {
        let tr: f64 = pops.iter().sum();
        vec![tr / d as f64; d]
    };
    let mut z = walsh(&pops);
    let z_eq = walsh(&target);
    for s in 1..d {
        z[s] = z_eq[s] + (z[s] - z_eq[s]) * (-t * summed(&r1, s)).exp();
    }
    for x in 0..d {
        m[(x, x)] = re((0..d).map(|s| z[s] * sign(x, s)).sum());
    }
    DensityMatrix::from_parts(m, rho.is_deviation())
}
