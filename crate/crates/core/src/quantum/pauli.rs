// Copyright 2026 EAQDC Contributors
// SPDX-License-Identifier: Apache-2.0

use super::{hermiticity_deviation, pauli, re, tensor_all, DensityMatrix, Matrix};
use crate::error::{Error, Result};

/// The Z-type strings spanning the diagonal, in the order c₀..c₇:
/// III, ZII, IZI, IIZ, ZZI, IZZ, ZIZ, ZZZ.
pub const DIAGONAL_STRINGS: [(usize, usize, usize); 8] = [
    (0, 0, 0),
    (3, 0, 0),
    (0, 3, 0),
    (0, 0, 3),
    (3, 3, 0),
    (0, 3, 3),
    (3, 0, 3),
    (3, 3, 3),
];

/// Real coefficients of ρ = Σ c_ijk σᵢ ⊗ σⱼ ⊗ σₖ on three qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliCoefficients {
    c: [f64; 64],
}

fn slot(i: usize, j: usize, k: usize) -> usize {
    16 * i + 4 * j + k
}

fn string(i: usize, j: usize, k: usize) -> Matrix {
    tensor_all([&pauli(i), &pauli(j), &pauli(k)]).expect("three Pauli factors fit the register")
}

impl PauliCoefficients {
    /// c_ijk = Tr(ρ σᵢ⊗σⱼ⊗σₖ) / 8 for an 8 × 8 Hermitian matrix.
    pub fn decompose(rho: &Matrix) -> Result<Self> {
        if rho.shape() != (8, 8) {
            return Err(Error::Dimension(format!(
                "Pauli decomposition needs an 8×8 matrix, got {:?}",
                rho.shape()
            )));
        }
        let h = hermiticity_deviation(rho);
        if h > 1e-12 {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {h:.3e})")));
        }
        let mut c = [0.0; 64];
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    let s = string(i, j, k);
                    c[slot(i, j, k)] = (rho * s).trace().re / 8.0;
                }
            }
        }
        Ok(Self { c })
    }

    pub fn of(rho: &DensityMatrix) -> Result<Self> {
        Self::decompose(rho.entries())
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.c[slot(i, j, k)]
    }

    /// c₀..c₇ over the Z-type strings.
    pub fn diagonal(&self) -> [f64; 8] {
        DIAGONAL_STRINGS.map(|(i, j, k)| self.get(i, j, k))
    }

    /// Σ c_ijk σᵢ⊗σⱼ⊗σₖ.
    pub fn reconstruct(&self) -> Matrix {
        let mut m = Matrix::zeros(8, 8);
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    let coef = self.c[slot(i, j, k)];
                    if coef != 0.0 {
                        m += string(i, j, k) * re(coef);
                    }
                }
            }
        }
        m
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.c
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{max_abs_diff, StateVector};

    #[test]
    fn ground_state_has_all_z_strings() {
        let rho = StateVector::zero(3).unwrap().to_density();
        let p = PauliCoefficients::of(&rho).unwrap();
        for c in p.diagonal() {
            assert!((c - 0.125).abs() < 1e-15);
        }
        let off: f64 = p.as_slice().iter().map(|c| c.abs()).sum::<f64>() - 1.0;
        assert!(off.abs() < 1e-14);
    }

    #[test]
    fn maximally_mixed_is_pure_identity() {
        let rho = DensityMatrix::maximally_mixed(3).unwrap();
        let p = PauliCoefficients::of(&rho).unwrap();
        assert!((p.get(0, 0, 0) - 0.125).abs() < 1e-15);
        assert!(p.as_slice()[1..].iter().all(|c| c.abs() < 1e-15));
    }

    #[test]
    fn basis_011_signs_follow_parity() {
        let rho = StateVector::basis(3, 0b011).unwrap().to_density();
        let d = PauliCoefficients::of(&rho).unwrap().diagonal();
        let expect = [1.0, 1.0, -1.0, -1.0, -1.0, 1.0, -1.0, 1.0].map(|s: f64| s / 8.0);
        for (got, want) in d.iter().zip(expect) {
            assert!((got - want).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_wrong_shape() {
        assert!(PauliCoefficients::decompose(&Matrix::identity(4, 4)).is_err());
    }

    #[test]
    fn reconstruct_round_trip() {
        let rho = StateVector::basis(3, 5).unwrap().to_density();
        let p = PauliCoefficients::of(&rho).unwrap();
        assert!(max_abs_diff(&p.reconstruct(), rho.entries()) < 1e-14);
    }
}
