// Copyright 2026 EAQDC Contributors
// SPDX-License-Identifier: Apache-2.0

//! Detection of one spin's four-line multiplet and extraction of the
//! product-operator coefficients behind the interferometer intensities.

use serde::{Deserialize, Serialize};

use crate::circuit::IntensityPair;
use crate::error::{Error, Result};
use crate::nmr::{prepare_pps, SpinSystem};
use crate::quantum::{embed, Gate, Matrix, PauliCoefficients};

/// Peak order of one spin's multiplet, lowest line frequency first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeakMap {
    pub observed: usize,
    /// The two passive spins, in register order.
    pub others: [usize; 2],
    /// (bit of others[0], bit of others[1]) for each peak.
    pub labels: [(u8, u8); 4],
    /// Line positions relative to the observed spin's centre, Hz.
    pub frequencies: [f64; 4],
}

impl PeakMap {
    /// Derive the order from the J couplings of the observed spin. A line
    /// sits at Σₖ J_ok·mₖ with m = +½ for |0⟩.
    pub fn for_spin(system: &SpinSystem, observed: usize) -> Result<Self> {
        if system.n() != 3 {
            return Err(Error::Dimension(format!("peak maps need 3 spins, got {}", system.n())));
        }
        system.check_spin(observed)?;
        let others: Vec<usize> = (0..3).filter(|&k| k != observed).collect();
        let others = [others[0], others[1]];
        let m = |bit: u8| if bit == 0 { 0.5 } else { -0.5 };
        let mut lines: Vec<((u8, u8), f64)> = [(0, 0), (0, 1), (1, 0), (1, 1)]
            .into_iter()
            .map(|(x, y)| ((x, y), system.j(observed, others[0]) * m(x) + system.j(observed, others[1]) * m(y)))
            .collect();
        lines.sort_by(|a, b| a.1.total_cmp(&b.1));
        for w in lines.windows(2) {
            if (w[1].1 - w[0].1).abs() < 1e-9 {
                return Err(Error::PeakMap(format!("lines {:?} and {:?} overlap", w[0].0, w[1].0)));
            }
        }
        let map = Self {
            observed,
            others,
            labels: [lines[0].0, lines[1].0, lines[2].0, lines[3].0],
            frequencies: [lines[0].1, lines[1].1, lines[2].1, lines[3].1],
        };
        map.validate()?;
        Ok(map)
    }

    /// Peaks 1, 2 must carry the second passive spin in |0⟩ and peaks 3, 4
    /// in |1⟩, or the difference formula picks up the wrong product
    /// operator. Checked against a direct decomposition.
    pub fn validate(&self) -> Result<()> {
        let mut seen = [false; 4];
        for &(x, y) in &self.labels {
            if x > 1 || y > 1 || seen[(2 * x + y) as usize] {
                return Err(Error::PeakMap(format!("labels {:?} are not a bijection", self.labels)));
            }
            seen[(2 * x + y) as usize] = true;
        }
        let z = |q: usize| (0..3).map(|k| if k == q || k == self.observed { 3 } else { 0 }).collect::<Vec<_>>();
        // Diagonal test state with distinct populations.
        let pops = [0.31, 0.02, 0.17, 0.05, 0.11, 0.13, 0.08, 0.13];
        let rho = crate::quantum::DensityMatrix::from_diagonal(&pops, false)?;
        let pc = PauliCoefficients::of(&rho)?;
        let peaks = peaks_of(rho.entries(), self, 1.0)?;
        let zo: Vec<usize> = (0..3).map(|k| if k == self.observed { 3 } else { 0 }).collect();
        let sum = pc.get(zo[0], zo[1], zo[2]);
        let pair = z(self.others[1]);
        let diff = pc.get(pair[0], pair[1], pair[2]);
        let (s, d) = sum_and_difference(&peaks);
        if (s - sum).abs() > 1e-12 || (d - diff).abs() > 1e-12 {
            return Err(Error::PeakMap(format!(
                "map {:?} gives ({s}, {d}), decomposition gives ({sum}, {diff})",
                self.labels
            )));
        }
        Ok(())
    }
}

/// Four integrals, left to right, relative to the pseudo-pure reference.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeakSet {
    pub f: [f64; 4],
    pub reference: f64,
    pub map: PeakMap,
}

fn sum_and_difference(f: &[f64; 4]) -> (f64, f64) {
    ((f[0] + f[1] + f[2] + f[3]) / 8.0, (f[0] + f[1] - f[2] - f[3]) / 8.0)
}

/// 2 Re ρ'(0xy, 1xy) after a π/2 y pulse on the observed spin, which is the
/// population difference for a diagonal ρ.
fn peaks_of(rho: &Matrix, map: &PeakMap, reference: f64) -> Result<[f64; 4]> {
    let detect = embed(Gate::ry(std::f64::consts::FRAC_PI_2).matrix(), &[map.observed], 3)?;
    let after = &detect * rho * detect.adjoint();
    let bit = |q: usize, v: u8| (v as usize) << (2 - q);
    let mut f = [0.0; 4];
    for (k, &(x, y)) in map.labels.iter().enumerate() {
        let base = bit(map.others[0], x) | bit(map.others[1], y);
        let (lo, hi) = (base, base | bit(map.observed, 1));
        f[k] = 2.0 * after[(lo, hi)].re / reference;
    }
    Ok(f)
}

/// Peak integral of the pseudo-pure state on `observed`. A deviation
/// matrix is referenced to the prepared pseudo-pure deviation, a full
/// density matrix to |000⟩.
pub fn pps_reference(system: &SpinSystem, map: &PeakMap, deviation: bool) -> Result<f64> {
    if !deviation {
        return Ok(1.0);
    }
    let pps = prepare_pps(system)?;
    let f = peaks_of(pps.entries(), map, 1.0)?;
    let r: f64 = f.iter().sum();
    if !(r > 0.0) {
        return Err(Error::InvalidState(format!("pseudo-pure reference {r} is not positive")));
    }
    Ok(r)
}

pub fn measure_peaks_with(rho: &crate::quantum::DensityMatrix, map: &PeakMap, reference: f64) -> Result<PeakSet> {
    if rho.qubits() != 3 {
        return Err(Error::Dimension(format!("readout needs 3 qubits, got {}", rho.qubits())));
    }
    if !(reference > 0.0) {
        return Err(Error::InvalidParameter(format!("reference {reference} must be positive")));
    }
    Ok(PeakSet { f: peaks_of(rho.entries(), map, reference)?, reference, map: map.clone() })
}

/// Detect `observed` with the order derived from the system's couplings.
pub fn measure_peaks(rho: &crate::quantum::DensityMatrix, system: &SpinSystem, observed: usize) -> Result<PeakSet> {
    let map = PeakMap::for_spin(system, observed)?;
    let reference = pps_reference(system, &map, rho.is_deviation())?;
    measure_peaks_with(rho, &map, reference)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    Direct,
    SwapAssisted,
    Combined,
}

/// c₁ (ZII), c₃ (IIZ), c₆ (ZIZ); c₀ is 1/8 by normalization.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientEstimate {
    pub c1: Option<f64>,
    pub c3: Option<f64>,
    pub c6: Option<f64>,
    /// The second, swap-assisted c₆ when both paths were measured.
    pub c6_swapped: Option<f64>,
    pub provenance: Provenance,
}

pub const C0: f64 = 0.125;

pub fn extract_direct(peaks: &PeakSet) -> CoefficientEstimate {
    let (c1, c6) = sum_and_difference(&peaks.f);
    CoefficientEstimate { c1: Some(c1), c3: None, c6: Some(c6), c6_swapped: None, provenance: Provenance::Direct }
}

pub fn extract_swapped(peaks: &PeakSet) -> CoefficientEstimate {
    let (c3, c6) = sum_and_difference(&peaks.f);
    CoefficientEstimate { c1: None, c3: Some(c3), c6: None, c6_swapped: Some(c6), provenance: Provenance::SwapAssisted }
}

impl CoefficientEstimate {
    /// Union of two partial estimates. A directly measured c₆ wins.
    pub fn merge(&self, other: &Self) -> Self {
        Self {
            c1: self.c1.or(other.c1),
            c3: self.c3.or(other.c3),
            c6: self.c6.or(other.c6),
            c6_swapped: self.c6_swapped.or(other.c6_swapped),
            provenance: Provenance::Combined,
        }
    }

    /// c₆ from whichever path measured it, direct first.
    pub fn best_c6(&self) -> Option<f64> {
        self.c6.or(self.c6_swapped)
    }
}

/// I_{A|0} = 2(c₀+c₁+c₃+c₆), I_{A|1} = 2(c₀+c₁−c₃−c₆).
pub fn intensities_from_coefficients(est: &CoefficientEstimate) -> Result<IntensityPair> {
    let c1 = est.c1.ok_or(Error::MissingCoefficient("c1"))?;
    let c3 = est.c3.ok_or(Error::MissingCoefficient("c3"))?;
    let c6 = est.best_c6().ok_or(Error::MissingCoefficient("c6"))?;
    Ok(IntensityPair { i_c0: 2.0 * (C0 + c1 + c3 + c6), i_c1: 2.0 * (C0 + c1 - c3 - c6) })
}

/// Lorentzian multiplet of `peaks`, each line with integral fᵢ and full
/// width 1/(πT₂), sampled at `points` frequencies spanning the lines.
pub fn spectrum(peaks: &PeakSet, t2: f64, points: usize) -> Vec<(f64, f64)> {
    let hwhm = if t2.is_finite() && t2 > 0.0 { 1.0 / (2.0 * std::f64::consts::PI * t2) } else { 0.5 };
    let lo = peaks.map.frequencies[0];
    let hi = peaks.map.frequencies[3];
    let pad = 0.25 * (hi - lo) + 10.0 * hwhm;
    let (start, stop) = (lo - pad, hi + pad);
    (0..points)
        .map(|k| {
            let nu = if points > 1 { start + (stop - start) * k as f64 / (points - 1) as f64 } else { 0.5 * (start + stop) };
            let a = peaks
                .f
                .iter()
                .zip(&peaks.map.frequencies)
                .map(|(f, nu0)| f * hwhm / (std::f64::consts::PI * ((nu - nu0).powi(2) + hwhm * hwhm)))
                .sum();
            (nu, a)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{DensityMatrix, StateVector, A, C};

    fn sys() -> SpinSystem {
        SpinSystem::diethyl_fluoromalonate()
    }

    #[test]
    fn default_order_follows_coupling_signs() {
        let map = PeakMap::for_spin(&sys(), A).unwrap();
        assert_eq!(map.labels, [(1, 0), (0, 0), (1, 1), (0, 1)]);
        assert!(map.frequencies.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn ground_state_lights_one_peak() {
        let rho = StateVector::zero(3).unwrap().to_density();
        let p = measure_peaks(&rho, &sys(), A).unwrap();
        assert_eq!(p.f.iter().filter(|x| x.abs() > 1e-12).count(), 1);
        let k = p.map.labels.iter().position(|&l| l == (0, 0)).unwrap();
        assert!((p.f[k] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mixed_state_is_silent() {
        let p = measure_peaks(&DensityMatrix::maximally_mixed(3).unwrap(), &sys(), A).unwrap();
        assert!(p.f.iter().all(|x| x.abs() < 1e-15));
    }

    #[test]
    fn basis_011_gives_minus_one_at_11() {
        let rho = StateVector::basis(3, 0b011).unwrap().to_density();
        let p = measure_peaks(&rho, &sys(), A).unwrap();
        for (k, &l) in p.map.labels.iter().enumerate() {
            let want = if l == (1, 1) { 1.0 } else { 0.0 };
            assert!((p.f[k] - want).abs() < 1e-12, "{l:?}: {}", p.f[k]);
        }
        // A is |0⟩ here, so the difference is +1; |111⟩ gives −1.
        let rho = StateVector::basis(3, 0b111).unwrap().to_density();
        let p = measure_peaks(&rho, &sys(), A).unwrap();
        let k = p.map.labels.iter().position(|&l| l == (1, 1)).unwrap();
        assert!((p.f[k] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn pseudo_pure_reference_normalizes_to_one() {
        let pps = prepare_pps(&sys()).unwrap();
        let p = measure_peaks(&pps, &sys(), A).unwrap();
        let est = extract_direct(&p);
        assert!((est.c1.unwrap() - 0.125).abs() < 1e-12);
        assert!((est.c6.unwrap() - 0.125).abs() < 1e-12);
    }

    #[test]
    fn bad_map_rejected() {
        let mut map = PeakMap::for_spin(&sys(), A).unwrap();
        map.labels.swap(1, 2);
        assert!(matches!(map.validate(), Err(Error::PeakMap(_))));
        map.labels = [(0, 0), (0, 0), (1, 1), (0, 1)];
        assert!(map.validate().is_err());
    }

    #[test]
    fn coefficient_intensities() {
        let full = CoefficientEstimate { c1: Some(0.125), c3: Some(0.125), c6: Some(0.125), c6_swapped: None, provenance: Provenance::Combined };
        assert_eq!(intensities_from_coefficients(&full).unwrap(), IntensityPair { i_c0: 1.0, i_c1: 0.0 });
        let zero = CoefficientEstimate { c1: Some(0.0), c3: Some(0.0), c6: Some(0.0), ..full };
        assert_eq!(intensities_from_coefficients(&zero).unwrap(), IntensityPair { i_c0: 0.25, i_c1: 0.25 });
        let partial = CoefficientEstimate { c3: None, ..full };
        assert!(matches!(intensities_from_coefficients(&partial), Err(Error::MissingCoefficient("c3"))));
    }

    #[test]
    fn swapped_path_sees_c3() {
        let rho = StateVector::zero(3).unwrap().to_density();
        let swap = embed(Gate::swap().matrix(), &[A, C], 3).unwrap();
        let p = measure_peaks(&rho.conjugate(&swap), &sys(), A).unwrap();
        assert!((extract_swapped(&p).c3.unwrap() - 0.125).abs() < 1e-12);
    }

    #[test]
    fn spectrum_integrates_to_peak_sum() {
        let rho = StateVector::zero(3).unwrap().to_density();
        let p = measure_peaks(&rho, &sys(), A).unwrap();
        let s = spectrum(&p, 0.8, 20001);
        let step = s[1].0 - s[0].0;
        let area: f64 = s.iter().map(|x| x.1).sum::<f64>() * step;
        assert!((area - 1.0).abs() < 0.02, "{area}");
    }
}
