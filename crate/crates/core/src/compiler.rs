// Copyright 2026 EAQDC Contributors
// SPDX-License-Identifier: Apache-2.0

//! Lowering of circuits to hard pulses, refocused J-coupling delays and
//! optimized shaped pulses.
//!
//! A controlled rotation uses C-Rₙ(θ) = Rₙ(θ/2) · exp(+iθ/4 Z_c σₙ), with
//! the Z σₙ term obtained from a refocused ZZ delay conjugated by a quarter
//! turn on the target.

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::{Arc, Mutex};

use num_rational::Ratio;

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::nmr::{
    program_propagator, Couplings, EchoTiming, EvolveOptions, PulseEvent, PulseProgram, ShapedPulse,
    SpinSystem,
};
use crate::optimizer::{optimize, OptimizerParams};
use crate::quantum::gate::pair_prep_rotation;
use crate::quantum::{embed, hs_fidelity, Gate, GateKind, Matrix, StateVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RotationMode {
    /// Phase shifter and Y(α) as hard pulses.
    Ideal,
    /// Phase shifter and Y(α) as optimized shaped pulses.
    Shaped,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SwapStrategy {
    ThreeCnot,
    Shaped,
}

/// Shaped pulses already optimized, keyed by target and system.
#[derive(Clone, Default)]
pub struct PulseLibrary {
    inner: Arc<Mutex<HashMap<String, LibraryEntry>>>,
}

#[derive(Clone, Debug)]
pub struct LibraryEntry {
    pub pulse: ShapedPulse,
    pub fidelity: f64,
    pub converged: bool,
}

impl PulseLibrary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.inner.lock().expect("library lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Cached pulse for `label`, optimizing it on first use. Failed runs are
    /// cached too so that they are not retried.
    pub fn get_or_optimize(
        &self,
        label: &str,
        target: &Matrix,
        system: &SpinSystem,
        params: &OptimizerParams,
    ) -> Result<LibraryEntry> {
        let key = format!("{label}#{:016x}#{}x{}#{}", system.fingerprint(), params.segments, params.dt, params.seed);
        if let Some(e) = self.inner.lock().expect("library lock").get(&key) {
            return Ok(e.clone());
        }
        let run = optimize(target, system, params)?;
        let mut pulse = run.pulse;
        pulse.label = label.to_string();
        let entry = LibraryEntry { pulse, fidelity: run.fidelity, converged: run.converged };
        self.inner.lock().expect("library lock").insert(key, entry.clone());
        Ok(entry)
    }
}

impl std::fmt::Debug for PulseLibrary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "PulseLibrary({} pulses)", self.len())
    }
}

#[derive(Clone, Debug)]
pub struct CompileOptions {
    pub rotations: RotationMode,
    pub swap: SwapStrategy,
    /// Append a SWAP on this pair for readout through another spin.
    pub readout_swap: Option<(usize, usize)>,
    pub optimizer: OptimizerParams,
    pub swap_optimizer: OptimizerParams,
    pub library: PulseLibrary,
}

impl Default for CompileOptions {
    fn default() -> Self {
        Self {
            rotations: RotationMode::Ideal,
            swap: SwapStrategy::ThreeCnot,
            readout_swap: None,
            optimizer: OptimizerParams::default(),
            swap_optimizer: OptimizerParams::swap(),
            library: PulseLibrary::new(),
        }
    }
}

impl CompileOptions {
    pub fn shaped() -> Self {
        Self { rotations: RotationMode::Shaped, swap: SwapStrategy::Shaped, ..Self::default() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GateFidelity {
    pub gate: String,
    pub qubits: Vec<usize>,
    pub fidelity: f64,
}

#[derive(Clone, Debug)]
pub struct CompilationReport {
    pub program: PulseProgram,
    pub hs_fidelity_vs_ideal: f64,
    /// Largest population difference from the ideal circuit on |0…0⟩.
    pub intensity_error: f64,
    pub pulse_count: usize,
    pub total_duration: f64,
    pub gate_fidelities: Vec<GateFidelity>,
}

/// Lower every gate of `circuit`, plus the optional readout SWAP, and
/// compare the result with the ideal unitary.
pub fn compile(circuit: &Circuit, system: &SpinSystem, options: &CompileOptions) -> Result<CompilationReport> {
    if circuit.n_qubits() != system.n() {
        return Err(Error::Dimension(format!(
            "{}-qubit circuit on a {}-spin system",
            circuit.n_qubits(),
            system.n()
        )));
    }
    let n = system.n();
    let ideal_opts = EvolveOptions::ideal();
    let mut program = PulseProgram::new();
    let mut gate_fidelities = Vec::new();
    let mut placed: Vec<(Gate, Vec<usize>)> = circuit.ops().iter().map(|op| (op.gate.clone(), op.qubits.clone())).collect();
    if let Some((a, b)) = options.readout_swap {
        placed.push((Gate::swap(), vec![a, b]));
    }
    let mut ideal = crate::quantum::identity(system.dim());
    for (gate, qubits) in &placed {
        let fragment = lower_gate(gate, qubits, system, options)?;
        let want = embed(gate.matrix(), qubits, n)?;
        let got = program_propagator(&fragment, system, &ideal_opts)?;
        gate_fidelities.push(GateFidelity { gate: gate.name(), qubits: qubits.clone(), fidelity: hs_fidelity(&want, &got)? });
        ideal = want * ideal;
        program.extend(fragment);
    }
    let actual = program_propagator(&program, system, &ideal_opts)?;
    let psi = StateVector::zero(n)?;
    let p_ideal = psi.apply_unitary(&ideal);
    let p_actual = psi.apply_unitary(&actual);
    let intensity_error = (0..system.dim())
        .map(|i| (p_ideal.amplitude(i).norm_sqr() - p_actual.amplitude(i).norm_sqr()).abs())
        .fold(0.0, f64::max);
    Ok(CompilationReport {
        hs_fidelity_vs_ideal: hs_fidelity(&ideal, &actual)?,
        intensity_error,
        pulse_count: program.pulse_count(),
        total_duration: program.duration(),
        gate_fidelities,
        program,
    })
}

/// Pulse fragment for one gate on `qubits` (gate slot order).
pub fn lower_gate(gate: &Gate, qubits: &[usize], system: &SpinSystem, options: &CompileOptions) -> Result<PulseProgram> {
    if gate.arity() != qubits.len() {
        return Err(Error::Dimension(format!("{} on {:?}", gate.name(), qubits)));
    }
    for &q in qubits {
        system.check_spin(q)?;
    }
    let mut out = PulseProgram::new();
    Lowering { system, options, out: &mut out }.gate(gate, qubits)?;
    Ok(out)
}

/// SWAP on `pair`, as three CNOTs or as one shaped pulse.
pub fn compile_swap(
    pair: (usize, usize),
    system: &SpinSystem,
    strategy: SwapStrategy,
    options: &CompileOptions,
) -> Result<PulseProgram> {
    let (a, b) = pair;
    system.check_spin(a)?;
    system.check_spin(b)?;
    if a == b {
        return Err(Error::InvalidParameter(format!("SWAP of spin {a} with itself")));
    }
    let mut out = PulseProgram::new();
    let mut l = Lowering { system, options, out: &mut out };
    match strategy {
        SwapStrategy::ThreeCnot => {
            l.cnot(a, b)?;
            l.cnot(b, a)?;
            l.cnot(a, b)?;
        }
        SwapStrategy::Shaped => {
            let target = embed(Gate::swap().matrix(), &[a, b], system.n())?;
            l.shaped(&format!("swap({a},{b})"), &target, &options.swap_optimizer)?;
        }
    }
    Ok(out)
}

/// `x` as a small-denominator multiple of π, if it is one.
pub fn ratio_of_pi(x: f64) -> Option<Ratio<i64>> {
    let r = x / PI;
    (1..=1024).find_map(|den: i64| {
        let num = (r * den as f64).round();
        ((num / den as f64 - r).abs() < 1e-12 * r.abs().max(1.0)).then(|| Ratio::new(num as i64, den))
    })
}

#[derive(Clone, Copy)]
enum Axis {
    X,
    Y,
    Z,
}

struct Lowering<'a> {
    system: &'a SpinSystem,
    options: &'a CompileOptions,
    out: &'a mut PulseProgram,
}

impl Lowering<'_> {
    fn gate(&mut self, gate: &Gate, q: &[usize]) -> Result<()> {
        match gate.kind() {
            GateKind::Hadamard => {
                self.rot(q[0], FRAC_PI_2, FRAC_PI_2);
                self.rot(q[0], 0.0, PI);
            }
            GateKind::PauliX => self.rot(q[0], 0.0, PI),
            GateKind::Rx(t) => self.rot(q[0], 0.0, *t),
            GateKind::Ry(t) => self.rot(q[0], FRAC_PI_2, *t),
            GateKind::Rz(t) => self.rz(q[0], *t),
            GateKind::Phase(phi) => match self.options.rotations {
                RotationMode::Ideal => self.rz(q[0], *phi),
                RotationMode::Shaped => {
                    let target = embed(gate.matrix(), q, self.system.n())?;
                    self.shaped(&format!("phase({phi})@{}", q[0]), &target, &self.options.optimizer)?;
                }
            },
            GateKind::YAlpha(alpha) => match self.options.rotations {
                RotationMode::Ideal => self.rot(q[0], FRAC_PI_2, -2.0 * alpha),
                RotationMode::Shaped => {
                    let target = embed(gate.matrix(), q, self.system.n())?;
                    self.shaped(&format!("y({alpha})@{}", q[0]), &target, &self.options.optimizer)?;
                }
            },
            GateKind::Cnot => self.cnot(q[0], q[1])?,
            GateKind::ControlledH => self.controlled_h(q[0], q[1])?,
            GateKind::Controlled(inner) => match inner.kind() {
                GateKind::Rx(t) => self.controlled_rotation(q[0], q[1], Axis::X, *t)?,
                GateKind::Ry(t) => self.controlled_rotation(q[0], q[1], Axis::Y, *t)?,
                GateKind::Rz(t) => self.controlled_rotation(q[0], q[1], Axis::Z, *t)?,
                GateKind::PauliX => self.cnot(q[0], q[1])?,
                GateKind::Hadamard => self.controlled_h(q[0], q[1])?,
                _ => return Err(Error::UnsupportedGate(gate.name())),
            },
            GateKind::Swap => {
                let frag = compile_swap((q[0], q[1]), self.system, self.options.swap, self.options)?;
                self.out.extend(frag);
            }
            GateKind::PairPrep { eta } => {
                self.gate(&pair_prep_rotation(*eta), &q[..1])?;
                self.cnot(q[0], q[1])?;
            }
            GateKind::Custom(_) => return Err(Error::UnsupportedGate(gate.name())),
        }
        Ok(())
    }

    /// In-plane rotation with a non-negative angle below 2π.
    fn rot(&mut self, q: usize, phase: f64, angle: f64) {
        let (mut phase, mut angle) = (phase, angle);
        if angle < 0.0 {
            angle = -angle;
            phase += PI;
        }
        angle %= 2.0 * PI;
        if angle < 1e-15 {
            return;
        }
        self.out.push(PulseEvent::hard(vec![q], phase.rem_euclid(2.0 * PI), angle));
    }

    /// Two π pulses: R_{θ/2}(π) · R₀(π) = −Rz(θ).
    fn rz(&mut self, q: usize, theta: f64) {
        let t = theta.rem_euclid(2.0 * PI);
        if t < 1e-15 || 2.0 * PI - t < 1e-15 {
            return;
        }
        self.rot(q, 0.0, PI);
        self.rot(q, theta / 2.0, PI);
    }

    fn cnot(&mut self, c: usize, t: usize) -> Result<()> {
        // C-Rx(π) is CNOT behind a controlled −i.
        self.controlled_rotation(c, t, Axis::X, PI)?;
        self.rz(c, FRAC_PI_2);
        Ok(())
    }

    fn controlled_h(&mut self, c: usize, t: usize) -> Result<()> {
        self.controlled_rotation(c, t, Axis::Y, FRAC_PI_2)?;
        self.controlled_rotation(c, t, Axis::X, PI)?;
        self.rz(c, FRAC_PI_2);
        Ok(())
    }

    fn controlled_rotation(&mut self, c: usize, t: usize, axis: Axis, theta: f64) -> Result<()> {
        if c == t {
            return Err(Error::InvalidParameter(format!("control and target are both {c}")));
        }
        let j = self.system.j(c, t);
        if j == 0.0 {
            return Err(Error::MissingCoupling(c.min(t), c.max(t)));
        }
        let s = theta / 4.0;
        if s == 0.0 {
            return Ok(());
        }
        let sigma = j.signum();
        let kappa = -sigma * s.signum();
        let strength = (ratio_of_pi(theta).map(|r| r / 4), s.abs());
        match axis {
            Axis::X => {
                self.rot(t, FRAC_PI_2, -kappa * FRAC_PI_2);
                self.zz(c, t, strength);
                self.rot(t, FRAC_PI_2, kappa * FRAC_PI_2);
                self.rot(t, 0.0, theta / 2.0);
            }
            Axis::Y => {
                self.rot(t, 0.0, kappa * FRAC_PI_2);
                self.zz(c, t, strength);
                self.rot(t, 0.0, -kappa * FRAC_PI_2);
                self.rot(t, FRAC_PI_2, theta / 2.0);
            }
            Axis::Z => {
                // The delay gives exp(−i sgn(J) |s| ZZ); flip it with π pulses when needed.
                let flip = sigma == s.signum();
                if flip {
                    self.rot(t, 0.0, -PI);
                }
                self.zz(c, t, strength);
                if flip {
                    self.rot(t, 0.0, PI);
                }
                self.rz(t, theta / 2.0);
            }
        }
        Ok(())
    }

    /// exp(−i sgn(J) γ Z_aZ_b) with γ = `strength`, refocusing any third spin.
    fn zz(&mut self, a: usize, b: usize, strength: (Option<Ratio<i64>>, f64)) {
        let pair = (a.min(b), a.max(b));
        let j = self.system.j(a, b);
        let (tau, echo) = match strength.0 {
            Some(r) => {
                let timing = EchoTiming { pair, tau: if r < Ratio::from_integer(0) { -r } else { r } };
                (timing.seconds(j), Some(timing))
            }
            None => (strength.1 / (PI * j.abs()), None),
        };
        let others: Vec<usize> = (0..self.system.n()).filter(|&k| k != a && k != b).collect();
        let delay = || PulseEvent::Delay { duration: tau, couplings: Couplings::All, echo };
        self.out.push(delay());
        for &k in &others {
            self.out.push(PulseEvent::hard(vec![k], 0.0, PI));
        }
        self.out.push(delay());
        for &k in &others {
            self.out.push(PulseEvent::hard(vec![k], PI, PI));
        }
    }

    fn shaped(&mut self, label: &str, target: &Matrix, params: &OptimizerParams) -> Result<()> {
        let entry = self.options.library.get_or_optimize(label, target, self.system, params)?;
        if !entry.converged {
            return Err(Error::OptimizerFailed { best: entry.fidelity, threshold: params.threshold });
        }
        self.out.push(PulseEvent::Shaped(entry.pulse));
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{build_eaqdc, intensities};
    use crate::nmr::Spin;
    use crate::quantum::{A, B, C};

    fn sys() -> SpinSystem {
        SpinSystem::diethyl_fluoromalonate()
    }

    fn fid(gate: &Gate, q: &[usize]) -> f64 {
        let s = sys();
        let frag = lower_gate(gate, q, &s, &CompileOptions::default()).unwrap();
        let want = embed(gate.matrix(), q, 3).unwrap();
        hs_fidelity(&want, &program_propagator(&frag, &s, &EvolveOptions::ideal()).unwrap()).unwrap()
    }

    #[test]
    fn every_gate_lowers_exactly() {
        let gates: Vec<(Gate, Vec<usize>)> = vec![
            (Gate::hadamard(), vec![A]),
            (Gate::x(), vec![B]),
            (Gate::rx(0.3), vec![C]),
            (Gate::ry(-1.2), vec![A]),
            (Gate::rz(2.5), vec![B]),
            (Gate::phase(1.1), vec![A]),
            (Gate::y_alpha(0.628), vec![C]),
            (Gate::cnot(), vec![B, C]),
            (Gate::cnot(), vec![C, A]),
            (Gate::controlled_h(), vec![B, A]),
            (Gate::controlled(&Gate::rx(0.7)).unwrap(), vec![A, C]),
            (Gate::controlled(&Gate::ry(-0.4)).unwrap(), vec![C, B]),
            (Gate::controlled(&Gate::rz(1.9)).unwrap(), vec![A, B]),
            (Gate::controlled(&Gate::rz(-1.9)).unwrap(), vec![A, B]),
            (Gate::swap(), vec![A, C]),
            (Gate::pair_prep(0.5).unwrap(), vec![B, C]),
            (Gate::pair_prep(0.2).unwrap(), vec![B, C]),
        ];
        for (g, q) in gates {
            let f = fid(&g, &q);
            assert!(f > 1.0 - 1e-9, "{} on {q:?}: {f}", g.name());
        }
    }

    #[test]
    fn rejects_custom_gate_and_missing_coupling() {
        let g = Gate::custom("U", Gate::rx(0.1).matrix().clone()).unwrap();
        assert!(matches!(lower_gate(&g, &[A], &sys(), &CompileOptions::default()), Err(Error::UnsupportedGate(_))));
        let loose = SpinSystem::new(vec![Spin::new("a", 1.0), Spin::new("b", 1.0)], vec![vec![0.0; 2]; 2]).unwrap();
        assert!(matches!(
            lower_gate(&Gate::cnot(), &[0, 1], &loose, &CompileOptions::default()),
            Err(Error::MissingCoupling(0, 1))
        ));
    }

    #[test]
    fn full_circuit_ideal_mode() {
        let s = sys();
        let circuit = build_eaqdc(0.6, 2.1, 0.5).unwrap();
        let report = compile(&circuit, &s, &CompileOptions::default()).unwrap();
        assert!(report.hs_fidelity_vs_ideal > 1.0 - 1e-9);
        assert!(report.intensity_error < 1e-9);
        let psi = StateVector::zero(3).unwrap().apply_unitary(&program_propagator(&report.program, &s, &EvolveOptions::ideal()).unwrap());
        let want = intensities(&circuit.simulate(&StateVector::zero(3).unwrap()).unwrap()).unwrap();
        let got = intensities(&psi).unwrap();
        assert!((want.i_c0 - got.i_c0).abs() < 1e-9 && (want.i_c1 - got.i_c1).abs() < 1e-9);
    }

    #[test]
    fn echo_blocks_carry_rational_timing() {
        let s = sys();
        let report = compile(&build_eaqdc(0.0, 0.0, 0.5).unwrap(), &s, &CompileOptions::default()).unwrap();
        let taus: Vec<_> = report.program.echo_timings().map(|(t, _)| (t.pair, t.tau)).collect();
        assert_eq!(
            taus,
            vec![
                ((1, 2), Ratio::new(1, 4)),
                ((1, 2), Ratio::new(1, 4)),
                ((0, 1), Ratio::new(1, 8)),
                ((0, 1), Ratio::new(1, 8)),
                ((0, 1), Ratio::new(1, 4)),
                ((0, 1), Ratio::new(1, 4)),
            ]
        );
    }

    #[test]
    fn ratio_of_pi_examples() {
        assert_eq!(ratio_of_pi(PI / 2.0), Some(Ratio::new(1, 2)));
        assert_eq!(ratio_of_pi(-3.0 * PI / 8.0), Some(Ratio::new(-3, 8)));
        assert_eq!(ratio_of_pi(1.0), None);
    }

    #[test]
    fn non_rational_angle_still_lowers() {
        assert!(fid(&Gate::controlled(&Gate::rx(1.0)).unwrap(), &[B, C]) > 1.0 - 1e-9);
    }
}
