// Copyright 2026 EAQDC Contributors
// SPDX-License-Identifier: Apache-2.0

//! Dense complex linear algebra for registers of up to three qubits.
//!
//! Qubits are labelled A, B, C and A is the most significant tensor slot:
//! basis index `4a + 2b + c`. Everything here is dense; the largest operator
//! is 8 × 8.

pub(crate) mod gate;
mod pauli;
mod state;

pub use gate::{Gate, GateKind};
pub use pauli::{PauliCoefficients, DIAGONAL_STRINGS};
pub use state::{DensityMatrix, Populations, StateVector};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Matrix = DMatrix<Complex64>;
pub type Vector = DVector<Complex64>;

/// Largest register this crate handles.
pub const MAX_QUBITS: usize = 3;

pub const A: usize = 0;
pub const B: usize = 1;
pub const C: usize = 2;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

pub fn identity(dim: usize) -> Matrix {
    Matrix::identity(dim, dim)
}

pub fn pauli_x() -> Matrix {
    Matrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn pauli_y() -> Matrix {
    Matrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
}

pub fn pauli_z() -> Matrix {
    Matrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
}

/// σ₀..σ₃ = I, X, Y, Z.
pub fn pauli(index: usize) -> Matrix {
    match index {
        0 => identity(2),
        1 => pauli_x(),
        2 => pauli_y(),
        3 => pauli_z(),
        _ => panic!("pauli index {index} out of range"),
    }
}

/// Number of qubits for a power-of-two dimension.
pub fn qubits_for_dim(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::Dimension(format!("{dim} is not a power of two")));
    }
    let n = dim.trailing_zeros() as usize;
    if n > MAX_QUBITS {
        return Err(Error::Dimension(format!(
            "{n} qubits exceeds the {MAX_QUBITS}-qubit register"
        )));
    }
    Ok(n)
}

/// Kronecker product `a ⊗ b` of two operators, in declared qubit order.
pub fn tensor(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    qubits_for_dim(a.nrows())?;
    qubits_for_dim(b.nrows())?;
    qubits_for_dim(a.ncols())?;
    qubits_for_dim(b.ncols())?;
    // A product is a valid register only if its own dimension is.
    qubits_for_dim(a.nrows() * b.nrows())?;
    qubits_for_dim(a.ncols() * b.ncols())?;
    Ok(a.kronecker(b))
}

/// Kronecker product of a sequence of operators.
pub fn tensor_all<'a>(factors: impl IntoIterator<Item = &'a Matrix>) -> Result<Matrix> {
    let mut out = identity(1);
    for f in factors {
        out = tensor(&out, f)?;
    }
    Ok(out)
}

/// Lift a k-qubit operator acting on `targets` (in the operator's own
/// slot order) into the full `n`-qubit register.
pub fn embed(op: &Matrix, targets: &[usize], n: usize) -> Result<Matrix> {
    let k = qubits_for_dim(op.nrows())?;
    if op.nrows() != op.ncols() {
        return Err(Error::Dimension("operator is not square".into()));
    }
    if k != targets.len() {
        return Err(Error::Dimension(format!(
            "{k}-qubit operator given {} targets",
            targets.len()
        )));
    }
    if n > MAX_QUBITS {
        return Err(Error::Dimension(format!("{n} qubits exceeds register")));
    }
    for (i, &t) in targets.iter().enumerate() {
        if t >= n {
            return Err(Error::Dimension(format!("target {t} outside {n}-qubit register")));
        }
        if targets[..i].contains(&t) {
            return Err(Error::Dimension(format!("target {t} repeated")));
        }
    }
    let dim = 1usize << n;
    let bit = |index: usize, q: usize| (index >> (n - 1 - q)) & 1;
    let local = |index: usize| {
        targets
            .iter()
            .fold(0usize, |acc, &q| (acc << 1) | bit(index, q))
    };
    let rest_mask: usize = (0..n)
        .filter(|q| !targets.contains(q))
        .map(|q| 1usize << (n - 1 - q))
        .sum();
    Ok(Matrix::from_fn(dim, dim, |row, col| {
        if row & rest_mask != col & rest_mask {
            ZERO
        } else {
            op[(local(row), local(col))]
        }
    }))
}

/// exp(−i·h·t) for Hermitian `h`, via its eigendecomposition.
pub fn expm_hermitian(h: &Matrix, t: f64) -> Matrix {
    let eig = SymmetricEigen::new(h.clone());
    let v = &eig.eigenvectors;
    let mut scaled = v.clone();
    for (j, &l) in eig.eigenvalues.iter().enumerate() {
        let mut col = scaled.column_mut(j);
        col *= Complex64::from_polar(1.0, -l * t);
    }
    scaled * v.adjoint()
}

/// Hilbert–Schmidt fidelity |Tr(u†v)| / d, insensitive to global phase.
pub fn hs_fidelity(u: &Matrix, v: &Matrix) -> Result<f64> {
    if u.shape() != v.shape() || u.nrows() != u.ncols() {
        return Err(Error::Dimension(format!(
            "fidelity between {:?} and {:?}",
            u.shape(),
            v.shape()
        )));
    }
    let d = u.nrows() as f64;
    let tr: Complex64 = u
        .iter()
        .zip(v.iter())
        .map(|(a, b)| a.conj() * b)
        .sum();
    Ok((tr.norm() / d).min(1.0))
}

/// Largest entry of |u†u − I|.
pub fn unitarity_deviation(u: &Matrix) -> f64 {
    let p = u.adjoint() * u;
    let id = identity(u.nrows());
    (p - id).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest entry of |m − m†|.
pub fn hermiticity_deviation(m: &Matrix) -> f64 {
    (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest entrywise distance between two matrices.
pub fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}
