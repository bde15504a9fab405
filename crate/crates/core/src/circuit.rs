// Copyright 2026 EAQDC Contributors
// SPDX-License-Identifier: Apache-2.0

//! The ideal three-qubit delayed-choice circuit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{embed, identity, Gate, Matrix, Populations, StateVector, A, B, C};

/// A gate placed on specific qubits, in the gate's own slot order.
#[derive(Clone, Debug, PartialEq)]
pub struct GateOp {
    pub gate: Gate,
    pub qubits: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitMeta {
    pub alpha: f64,
    pub phi: f64,
    pub eta: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    ops: Vec<GateOp>,
    meta: Option<CircuitMeta>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > crate::quantum::MAX_QUBITS {
            return Err(Error::Dimension(format!("register of {n_qubits} qubits")));
        }
        Ok(Self { n_qubits, ops: Vec::new(), meta: None })
    }

    /// Append a gate. Targets must be distinct and inside the register.
    pub fn push(&mut self, gate: Gate, qubits: &[usize]) -> Result<&mut Self> {
        if gate.arity() != qubits.len() {
            return Err(Error::Dimension(format!(
                "{} acts on {} qubits, given {:?}",
                gate.name(),
                gate.arity(),
                qubits
            )));
        }
        for (i, &q) in qubits.iter().enumerate() {
            if q >= self.n_qubits || qubits[..i].contains(&q) {
                return Err(Error::Dimension(format!("bad targets {qubits:?} for {}", gate.name())));
            }
        }
        self.ops.push(GateOp { gate, qubits: qubits.to_vec() });
        Ok(self)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn ops(&self) -> &[GateOp] {
        &self.ops
    }

    pub fn meta(&self) -> Option<CircuitMeta> {
        self.meta
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Full-register unitary, first gate applied first.
    pub fn unitary(&self) -> Result<Matrix> {
        let mut u = identity(1 << self.n_qubits);
        for op in &self.ops {
            u = embed(op.gate.matrix(), &op.qubits, self.n_qubits)? * u;
        }
        Ok(u)
    }

    /// Apply the gates one by one to `input`.
    pub fn simulate(&self, input: &StateVector) -> Result<StateVector> {
        if input.qubits() != self.n_qubits {
            return Err(Error::Dimension(format!(
                "{}-qubit state into {}-qubit circuit",
                input.qubits(),
                self.n_qubits
            )));
        }
        let mut psi = input.clone();
        for op in &self.ops {
            psi = psi.apply(&op.gate, &op.qubits)?;
        }
        Ok(psi)
    }

    /// Same circuit with every controlled-H replaced by a controlled
    /// Rx(π)·Ry(π/2), which is CH up to a controlled −i.
    pub fn with_decomposed_ch(&self) -> Result<Self> {
        let rxry = Gate::custom(
            "Rx(π)Ry(π/2)",
            Gate::rx(std::f64::consts::PI).matrix() * Gate::ry(std::f64::consts::FRAC_PI_2).matrix(),
        )?;
        let mut out = self.clone();
        for op in &mut out.ops {
            if matches!(op.gate.kind(), crate::quantum::GateKind::ControlledH) {
                op.gate = Gate::controlled(&rxry)?;
            }
        }
        Ok(out)
    }
}

/// Pair preparation on BC, then H, phase shifter and controlled-H on A
/// (control B), then Y(α) on C.
pub fn build_eaqdc(alpha: f64, phi: f64, eta: f64) -> Result<Circuit> {
    let mut c = Circuit::new(3)?;
    c.push(Gate::pair_prep(eta)?, &[B, C])?
        .push(Gate::hadamard(), &[A])?
        .push(Gate::phase(phi), &[A])?
        .push(Gate::controlled_h(), &[B, A])?
        .push(Gate::y_alpha(alpha), &[C])?;
    c.meta = Some(CircuitMeta { alpha, phi, eta });
    Ok(c)
}

/// Output of the balanced circuit on |000⟩.
pub fn final_state(alpha: f64, phi: f64) -> Result<StateVector> {
    build_eaqdc(alpha, phi, 0.5)?.simulate(&StateVector::zero(3)?)
}

/// Postselected work-qubit intensities I_{A|c=0} and I_{A|c=1}.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntensityPair {
    pub i_c0: f64,
    pub i_c1: f64,
}

impl IntensityPair {
    pub fn get(&self, c: crate::predictions::Outcome) -> f64 {
        match c {
            crate::predictions::Outcome::C0 => self.i_c0,
            crate::predictions::Outcome::C1 => self.i_c1,
        }
    }
}

/// Joint probabilities that A reads 0 and C reads c: diagonal entries
/// |0b0⟩ and |0b1⟩ summed over b.
pub fn intensities(state: &impl Populations) -> Result<IntensityPair> {
    if state.register_qubits() != 3 {
        return Err(Error::Dimension(format!(
            "intensities need three qubits, got {}",
            state.register_qubits()
        )));
    }
    let p = state.populations();
    Ok(IntensityPair { i_c0: p[0] + p[2], i_c1: p[1] + p[3] })
}
