// Copyright 2026 EAQDC Contributors
// SPDX-License-Identifier: Apache-2.0

use nalgebra::SymmetricEigen;
use num_complex::Complex64;

use super::{embed, hermiticity_deviation, qubits_for_dim, Gate, Matrix, Vector, ONE, ZERO};
use crate::error::{Error, Result};

const NORM_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-12;
const HERMITIAN_TOL: f64 = 1e-12;
const POSITIVITY_TOL: f64 = 1e-10;

/// Pure state of 1–3 qubits, qubit A in the most significant slot.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amplitudes: Vector,
    qubits: usize,
}

impl StateVector {
    /// Validates a power-of-two length and unit norm (1e-12).
    pub fn new(amplitudes: Vector) -> Result<Self> {
        let qubits = qubits_for_dim(amplitudes.len())?;
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!("norm {norm} is not 1")));
        }
        Ok(Self { amplitudes, qubits })
    }

    pub fn from_slice(amplitudes: &[Complex64]) -> Result<Self> {
        Self::new(Vector::from_column_slice(amplitudes))
    }

    /// Computational basis state `|index⟩` on `qubits` qubits.
    pub fn basis(qubits: usize, index: usize) -> Result<Self> {
        let dim = 1usize << qubits;
        qubits_for_dim(dim)?;
        if index >= dim {
            return Err(Error::Dimension(format!("basis index {index} ≥ {dim}")));
        }
        let mut amplitudes = Vector::zeros(dim);
        amplitudes[index] = ONE;
        Ok(Self { amplitudes, qubits })
    }

    pub fn zero(qubits: usize) -> Result<Self> {
        Self::basis(qubits, 0)
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &Vector {
        &self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amplitudes[index]
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// Apply `gate` to the listed target qubits (control first for
    /// controlled gates).
    pub fn apply(&self, gate: &Gate, targets: &[usize]) -> Result<Self> {
        let full = embed(gate.matrix(), targets, self.qubits)?;
        Ok(self.apply_unitary(&full))
    }

    /// Apply a full-register unitary. The caller guarantees unitarity.
    pub fn apply_unitary(&self, u: &Matrix) -> Self {
        Self { amplitudes: u * &self.amplitudes, qubits: self.qubits }
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    /// |⟨self|other⟩|, the overlap insensitive to global phase.
    pub fn overlap(&self, other: &StateVector) -> f64 {
        self.inner(other).norm()
    }

    pub fn to_density(&self) -> DensityMatrix {
        let m = &self.amplitudes * self.amplitudes.adjoint();
        DensityMatrix { entries: m, qubits: self.qubits, deviation: false }
    }
}

/// Density operator on 1–3 qubits.
///
/// Two flavours exist: physical states (unit trace, positive) and traceless
/// deviation matrices, the NMR convention where the unobservable identity
/// background has been dropped.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    entries: Matrix,
    qubits: usize,
    deviation: bool,
}

impl DensityMatrix {
    /// A physical state: Hermitian, unit trace and positive semidefinite.
    pub fn new(entries: Matrix) -> Result<Self> {
        let qubits = Self::check_shape(&entries)?;
        let trace = entries.trace();
        if (trace - ONE).norm() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {trace} is not 1")));
        }
        let eig = SymmetricEigen::new(entries.clone());
        let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        if min < -POSITIVITY_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min}")));
        }
        Ok(Self { entries, qubits, deviation: false })
    }

    /// A traceless deviation matrix.
    pub fn deviation(entries: Matrix) -> Result<Self> {
        let qubits = Self::check_shape(&entries)?;
        let trace = entries.trace();
        if trace.norm() > TRACE_TOL * entries.nrows() as f64 {
            return Err(Error::InvalidState(format!("deviation matrix has trace {trace}")));
        }
        Ok(Self { entries, qubits, deviation: true })
    }

    fn check_shape(entries: &Matrix) -> Result<usize> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::Dimension("density matrix must be square".into()));
        }
        let qubits = qubits_for_dim(entries.nrows())?;
        let h = hermiticity_deviation(entries);
        if h > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {h:.3e})")));
        }
        Ok(qubits)
    }

    /// Skip validation; used by evolution code whose updates preserve the
    /// invariants up to rounding.
    pub(crate) fn from_parts(entries: Matrix, deviation: bool) -> Self {
        let qubits = entries.nrows().trailing_zeros() as usize;
        Self { entries, qubits, deviation }
    }

    pub fn maximally_mixed(qubits: usize) -> Result<Self> {
        let dim = 1usize << qubits;
        qubits_for_dim(dim)?;
        Ok(Self {
            entries: Matrix::identity(dim, dim) / Complex64::new(dim as f64, 0.0),
            qubits,
            deviation: false,
        })
    }

    pub fn from_diagonal(diag: &[f64], deviation: bool) -> Result<Self> {
        let m = Matrix::from_diagonal(&Vector::from_iterator(
            diag.len(),
            diag.iter().map(|&d| Complex64::new(d, 0.0)),
        ));
        if deviation {
            Self::deviation(m)
        } else {
            Self::new(m)
        }
    }

    pub fn entries(&self) -> &Matrix {
        &self.entries
    }

    pub fn into_entries(self) -> Matrix {
        self.entries
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn is_deviation(&self) -> bool {
        self.deviation
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.trace()
    }

    /// Real diagonal (populations for a physical state).
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.entries[(i, i)].re).collect()
    }

    /// U ρ U† with a full-register unitary.
    pub fn conjugate(&self, u: &Matrix) -> Self {
        let entries = u * &self.entries * u.adjoint();
        Self { entries, qubits: self.qubits, deviation: self.deviation }
    }

    pub fn apply(&self, gate: &Gate, targets: &[usize]) -> Result<Self> {
        let full = embed(gate.matrix(), targets, self.qubits)?;
        Ok(self.conjugate(&full))
    }

    /// Zero every off-diagonal entry (ideal pulsed-field-gradient crush).
    pub fn dephased(&self) -> Self {
        let mut entries = self.entries.clone();
        for r in 0..self.dim() {
            for col in 0..self.dim() {
                if r != col {
                    entries[(r, col)] = ZERO;
                }
            }
        }
        Self { entries, qubits: self.qubits, deviation: self.deviation }
    }

    /// Reduced state on the `keep` qubits, listed in register order.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        let n = self.qubits;
        if keep.is_empty() {
            return Err(Error::InvalidParameter("partial trace must keep at least one qubit".into()));
        }
        let mut keep: Vec<usize> = keep.to_vec();
        keep.sort_unstable();
        keep.dedup();
        if keep.iter().any(|&q| q >= n) {
            return Err(Error::Dimension(format!("keep set {keep:?} outside {n}-qubit register")));
        }
        let traced: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
        let compose = |kept: usize, env: usize| {
            let mut index = 0usize;
            for (i, &q) in keep.iter().enumerate() {
                let b = (kept >> (keep.len() - 1 - i)) & 1;
                index |= b << (n - 1 - q);
            }
            for (i, &q) in traced.iter().enumerate() {
                let b = (env >> (traced.len() - 1 - i)) & 1;
                index |= b << (n - 1 - q);
            }
            index
        };
        let kd = 1usize << keep.len();
        let ed = 1usize << traced.len();
        let reduced = Matrix::from_fn(kd, kd, |r, col| {
            (0..ed)
                .map(|e| self.entries[(compose(r, e), compose(col, e))])
                .sum()
        });
        Ok(Self { entries: reduced, qubits: keep.len(), deviation: self.deviation })
    }

    /// Tr(ρ·o).
    pub fn expectation(&self, observable: &Matrix) -> Complex64 {
        (&self.entries * observable).trace()
    }

    /// Identity-restored pseudo-pure state from a deviation matrix whose
    /// diagonal is proportional to (2^n − 1, −1, …, −1): I/d + Δ/(d·p),
    /// with p the polarization read off the first two populations.
    pub fn restore_identity(&self) -> Result<Self> {
        if !self.deviation {
            return Err(Error::InvalidState("state already carries its identity part".into()));
        }
        let d = self.dim() as f64;
        let p = (self.entries[(0, 0)].re - self.entries[(1, 1)].re) / d;
        if p.abs() < 1e-300 {
            return Err(Error::InvalidState("deviation matrix carries no polarization".into()));
        }
        let entries = Matrix::identity(self.dim(), self.dim()) / Complex64::new(d, 0.0)
            + &self.entries / Complex64::new(d * p, 0.0);
        Ok(Self { entries, qubits: self.qubits, deviation: false })
    }
}

/// Anything with computational-basis populations.
pub trait Populations {
    fn populations(&self) -> Vec<f64>;
    fn register_qubits(&self) -> usize;
}

impl Populations for StateVector {
    fn populations(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    fn register_qubits(&self) -> usize {
        self.qubits
    }
}

impl Populations for DensityMatrix {
    fn populations(&self) -> Vec<f64> {
        self.diagonal()
    }

    fn register_qubits(&self) -> usize {
        self.qubits
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{max_abs_diff, re, A, B, C};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn bell_bc() -> StateVector {
        let h = re(FRAC_1_SQRT_2);
        // |0⟩(|00⟩+|11⟩)/√2 on three qubits.
        StateVector::from_slice(&[h, ZERO, ZERO, h, ZERO, ZERO, ZERO, ZERO]).unwrap()
    }

    #[test]
    fn norm_and_length_validated() {
        assert!(StateVector::from_slice(&[ONE, ONE]).is_err());
        assert!(StateVector::from_slice(&[ONE, ZERO, ZERO]).is_err());
        assert!(StateVector::basis(2, 4).is_err());
    }

    #[test]
    fn hadamard_on_zero() {
        let s = StateVector::zero(1).unwrap().apply(&Gate::hadamard(), &[0]).unwrap();
        assert!((s.amplitude(0).re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((s.amplitude(1).re - FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn cnot_builds_epr_on_bc() {
        // |0⟩(|00⟩+|10⟩)/√2 → |0⟩(|00⟩+|11⟩)/√2.
        let h = re(FRAC_1_SQRT_2);
        let s = StateVector::from_slice(&[h, ZERO, h, ZERO, ZERO, ZERO, ZERO, ZERO]).unwrap();
        let out = s.apply(&Gate::cnot(), &[B, C]).unwrap();
        assert!((out.overlap(&bell_bc()) - 1.0).abs() < 1e-15);
        assert!((out.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn partial_trace_examples() {
        let rho = StateVector::zero(3).unwrap().to_density();
        let ra = rho.partial_trace(&[A]).unwrap();
        assert!(max_abs_diff(ra.entries(), &Matrix::from_diagonal(&Vector::from_vec(vec![ONE, ZERO]))) < 1e-15);

        let h = re(FRAC_1_SQRT_2);
        let bell = StateVector::from_slice(&[h, ZERO, ZERO, h]).unwrap().to_density();
        let rb = bell.partial_trace(&[0]).unwrap();
        assert!(max_abs_diff(rb.entries(), &(Matrix::identity(2, 2) * re(0.5))) < 1e-15);
        assert!(rho.partial_trace(&[]).is_err());
        assert!(rho.partial_trace(&[3]).is_err());
    }

    #[test]
    fn partial_trace_keeps_order_and_trace() {
        let s = StateVector::basis(3, 0b011).unwrap().to_density();
        // Keeping {C, A} is the same as keeping {A, C}: register order.
        let r = s.partial_trace(&[C, A]).unwrap();
        assert!((r.entries()[(1, 1)] - ONE).norm() < 1e-15);
        assert!((r.trace() - ONE).norm() < 1e-15);
    }

    #[test]
    fn density_validation() {
        let bad = Matrix::from_diagonal(&Vector::from_vec(vec![re(1.5), re(-0.5)]));
        assert!(DensityMatrix::new(bad).is_err());
        let dev = Matrix::from_diagonal(&Vector::from_vec(vec![re(0.5), re(-0.5)]));
        assert!(DensityMatrix::deviation(dev.clone()).is_ok());
        assert!(DensityMatrix::new(dev).is_err());
        let nonherm = Matrix::from_row_slice(2, 2, &[re(0.5), ONE, ZERO, re(0.5)]);
        assert!(DensityMatrix::new(nonherm).is_err());
    }

    #[test]
    fn crush_of_bell_keeps_populations() {
        let h = re(FRAC_1_SQRT_2);
        let bell = StateVector::from_slice(&[h, ZERO, ZERO, h]).unwrap().to_density();
        let crushed = bell.dephased();
        let expect = Matrix::from_diagonal(&Vector::from_vec(vec![re(0.5), ZERO, ZERO, re(0.5)]));
        assert!(max_abs_diff(crushed.entries(), &expect) < 1e-15);
        assert_eq!(crushed.dephased(), crushed);
    }

    #[test]
    fn restore_identity_recovers_pure_state() {
        let mut diag = vec![-1.0; 8];
        diag[0] = 7.0;
        let scaled: Vec<f64> = diag.iter().map(|d| 0.03 * d).collect();
        let dev = DensityMatrix::from_diagonal(&scaled, true).unwrap();
        let rho = dev.restore_identity().unwrap();
        assert!((rho.entries()[(0, 0)].re - 1.0).abs() < 1e-14);
        assert!(DensityMatrix::new(rho.into_entries()).is_ok());
    }
}
