// Copyright 2026 EAQDC Contributors
// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::FRAC_1_SQRT_2;

use super::{c, embed, identity, pauli_x, pauli_y, pauli_z, re, unitarity_deviation, Matrix, ONE, ZERO};
use crate::error::{Error, Result};

const UNITARY_TOL: f64 = 1e-12;

/// What a gate is, independent of where it is applied.
#[derive(Clone, Debug, PartialEq)]
pub enum GateKind {
    Hadamard,
    PauliX,
    /// e^{−iθσx/2}
    Rx(f64),
    /// e^{−iθσy/2}
    Ry(f64),
    /// e^{−iθσz/2}
    Rz(f64),
    /// diag(1, e^{iφ}), the interferometer phase shifter.
    Phase(f64),
    /// e^{iασy}, without the half-angle factor.
    YAlpha(f64),
    /// Control is the first slot.
    Cnot,
    /// Controlled Hadamard, control first.
    ControlledH,
    /// Arbitrary single-qubit gate behind a control in the first slot.
    Controlled(Box<Gate>),
    Swap,
    /// √η|00⟩ + √(1−η)|11⟩ preparation from |00⟩: a rotation on the first
    /// slot followed by a CNOT onto the second.
    PairPrep { eta: f64 },
    Custom(String),
}

/// A unitary on one or two qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    kind: GateKind,
    matrix: Matrix,
}

impl Gate {
    /// Wrap an arbitrary matrix. Rejects anything that is not unitary to 1e-12.
    pub fn custom(name: impl Into<String>, matrix: Matrix) -> Result<Self> {
        Self::checked(GateKind::Custom(name.into()), matrix)
    }

    fn checked(kind: GateKind, matrix: Matrix) -> Result<Self> {
        let dim = matrix.nrows();
        if matrix.ncols() != dim || !(dim == 2 || dim == 4) {
            return Err(Error::Dimension(format!(
                "gate matrix must be 2×2 or 4×4, got {:?}",
                matrix.shape()
            )));
        }
        let deviation = unitarity_deviation(&matrix);
        if deviation > UNITARY_TOL {
            return Err(Error::NonUnitary { name: kind.name(), deviation });
        }
        Ok(Self { kind, matrix })
    }

    fn known(kind: GateKind, matrix: Matrix) -> Self {
        debug_assert!(unitarity_deviation(&matrix) < UNITARY_TOL);
        Self { kind, matrix }
    }

    pub fn hadamard() -> Self {
        let h = re(FRAC_1_SQRT_2);
        Self::known(GateKind::Hadamard, Matrix::from_row_slice(2, 2, &[h, h, h, -h]))
    }

    pub fn x() -> Self {
        Self::known(GateKind::PauliX, pauli_x())
    }

    pub fn rx(theta: f64) -> Self {
        Self::known(GateKind::Rx(theta), half_angle_rotation(&pauli_x(), theta))
    }

    pub fn ry(theta: f64) -> Self {
        Self::known(GateKind::Ry(theta), half_angle_rotation(&pauli_y(), theta))
    }

    pub fn rz(theta: f64) -> Self {
        Self::known(GateKind::Rz(theta), half_angle_rotation(&pauli_z(), theta))
    }

    /// Rotation by `angle` about the in-plane axis at azimuth `phase`:
    /// e^{−iθ(cos φ σx + sin φ σy)/2}.
    pub fn xy_rotation(phase: f64, angle: f64) -> Matrix {
        let axis = pauli_x() * re(phase.cos()) + pauli_y() * re(phase.sin());
        half_angle_rotation(&axis, angle)
    }

    pub fn phase(phi: f64) -> Self {
        let m = Matrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, num_complex::Complex64::from_polar(1.0, phi)]);
        Self::known(GateKind::Phase(phi), m)
    }

    /// e^{iασy} = cos α I + i sin α σy.
    pub fn y_alpha(alpha: f64) -> Self {
        let (s, co) = alpha.sin_cos();
        let m = Matrix::from_row_slice(2, 2, &[re(co), re(s), re(-s), re(co)]);
        Self::known(GateKind::YAlpha(alpha), m)
    }

    pub fn cnot() -> Self {
        Self::known(GateKind::Cnot, controlled_matrix(&pauli_x()))
    }

    pub fn controlled_h() -> Self {
        Self::known(GateKind::ControlledH, controlled_matrix(Self::hadamard().matrix()))
    }

    /// |0⟩⟨0| ⊗ I + |1⟩⟨1| ⊗ U for a single-qubit `inner`.
    pub fn controlled(inner: &Gate) -> Result<Self> {
        if inner.arity() != 1 {
            return Err(Error::Dimension("only single-qubit gates can be controlled".into()));
        }
        Ok(Self::known(
            GateKind::Controlled(Box::new(inner.clone())),
            controlled_matrix(inner.matrix()),
        ))
    }

    pub fn swap() -> Self {
        let mut m = Matrix::zeros(4, 4);
        m[(0, 0)] = ONE;
        m[(1, 2)] = ONE;
        m[(2, 1)] = ONE;
        m[(3, 3)] = ONE;
        Self::known(GateKind::Swap, m)
    }

    /// Entangled-pair preparation. Errors unless `eta ∈ [0, 1]`.
    pub fn pair_prep(eta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::InvalidParameter(format!("eta = {eta} outside [0, 1]")));
        }
        let first = pair_prep_rotation(eta);
        let m = Self::cnot().matrix() * embed(first.matrix(), &[0], 2)?;
        Ok(Self::known(GateKind::PairPrep { eta }, m))
    }

    pub fn kind(&self) -> &GateKind {
        &self.kind
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn name(&self) -> String {
        self.kind.name()
    }

    /// Number of qubits the gate acts on.
    pub fn arity(&self) -> usize {
        if self.matrix.nrows() == 2 {
            1
        } else {
            2
        }
    }

    pub fn adjoint(&self) -> Result<Self> {
        Self::custom(format!("{}†", self.name()), self.matrix.adjoint())
    }
}

/// First gate of the pair preparation. The balanced pair uses the Hadamard,
/// everything else the real rotation Ry(2·arccos√η).
pub(crate) fn pair_prep_rotation(eta: f64) -> Gate {
    if eta == 0.5 {
        Gate::hadamard()
    } else {
        Gate::ry(2.0 * eta.sqrt().acos())
    }
}

impl GateKind {
    pub fn name(&self) -> String {
        match self {
            GateKind::Hadamard => "H".into(),
            GateKind::PauliX => "X".into(),
            GateKind::Rx(t) => format!("Rx({t})"),
            GateKind::Ry(t) => format!("Ry({t})"),
            GateKind::Rz(t) => format!("Rz({t})"),
            GateKind::Phase(p) => format!("Phase({p})"),
            GateKind::YAlpha(a) => format!("Y({a})"),
            GateKind::Cnot => "CNOT".into(),
            GateKind::ControlledH => "CH".into(),
            GateKind::Controlled(g) => format!("C-{}", g.name()),
            GateKind::Swap => "SWAP".into(),
            GateKind::PairPrep { eta } => format!("PairPrep({eta})"),
            GateKind::Custom(n) => n.clone(),
        }
    }
}

fn half_angle_rotation(axis: &Matrix, theta: f64) -> Matrix {
    let (s, co) = (theta / 2.0).sin_cos();
    identity(2) * re(co) + axis * c(0.0, -s)
}

fn controlled_matrix(u: &Matrix) -> Matrix {
    let mut m = Matrix::identity(4, 4);
    for r in 0..2 {
        for col in 0..2 {
            m[(2 + r, 2 + col)] = u[(r, col)];
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{hs_fidelity, max_abs_diff, I};
    use std::f64::consts::PI;

    #[test]
    fn library_is_unitary() {
        let gates = [
            Gate::hadamard(),
            Gate::x(),
            Gate::rx(0.3),
            Gate::ry(-1.1),
            Gate::rz(2.0),
            Gate::phase(0.7),
            Gate::y_alpha(0.4),
            Gate::cnot(),
            Gate::controlled_h(),
            Gate::swap(),
            Gate::pair_prep(0.3).unwrap(),
        ];
        for g in gates {
            assert!(unitarity_deviation(g.matrix()) < 1e-12, "{}", g.name());
        }
    }

    #[test]
    fn non_unitary_rejected() {
        let m = Matrix::from_row_slice(2, 2, &[ONE, ONE, ZERO, ONE]);
        assert!(matches!(Gate::custom("shear", m), Err(Error::NonUnitary { .. })));
        assert!(Gate::custom("odd", identity(3)).is_err());
    }

    #[test]
    fn y_alpha_quarter_turn_flips_to_minus_one() {
        let y = Gate::y_alpha(PI / 2.0);
        // e^{iπσy/2} = iσy: |0⟩ ↦ −|1⟩.
        assert!((y.matrix()[(0, 0)]).norm() < 1e-15);
        assert!((y.matrix()[(1, 0)] - re(-1.0)).norm() < 1e-15);
        let isy = pauli_y() * I;
        assert!(max_abs_diff(y.matrix(), &isy) < 1e-15);
    }

    #[test]
    fn y_alpha_is_negative_double_angle_ry() {
        let a = 0.37;
        assert!(max_abs_diff(Gate::y_alpha(a).matrix(), Gate::ry(-2.0 * a).matrix()) < 1e-15);
    }

    #[test]
    fn xy_rotation_axes() {
        assert!(max_abs_diff(&Gate::xy_rotation(0.0, 0.8), Gate::rx(0.8).matrix()) < 1e-15);
        assert!(max_abs_diff(&Gate::xy_rotation(PI / 2.0, 0.8), Gate::ry(0.8).matrix()) < 1e-15);
    }

    #[test]
    fn pair_prep_rejects_eta_out_of_range() {
        assert!(Gate::pair_prep(1.5).is_err());
        assert!(Gate::pair_prep(-0.1).is_err());
    }

    #[test]
    fn controlled_decomposition_differs_by_controlled_phase() {
        let inner = Gate::custom("RxRy", Gate::rx(PI).matrix() * Gate::ry(PI / 2.0).matrix()).unwrap();
        let cu = Gate::controlled(&inner).unwrap();
        let ch = Gate::controlled_h();
        // Controlled −i: |Tr| = |2 − 2i| / 4.
        let f = hs_fidelity(ch.matrix(), cu.matrix()).unwrap();
        assert!((f - 0.5f64.sqrt()).abs() < 1e-14);
    }
}
