// Copyright 2026 EAQDC Contributors
// SPDX-License-Identifier: Apache-2.0

//! Thermal equilibrium and spatial-averaging pseudo-pure preparation.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use super::evolve::{evolve, EvolveOptions};
use super::program::{Couplings, PulseEvent, PulseProgram};
use super::system::SpinSystem;
use crate::error::{Error, Result};
use crate::quantum::DensityMatrix;

/// Deviation matrix Σ wᵢ σzᵢ / 2.
pub fn thermal_state(system: &SpinSystem) -> DensityMatrix {
    let n = system.n();
    let diag: Vec<f64> = (0..system.dim())
        .map(|x| {
            (0..n)
                .map(|i| {
                    let bit = (x >> (n - 1 - i)) & 1;
                    let z = if bit == 0 { 0.5 } else { -0.5 };
                    system.spins()[i].weight * z
                })
                .sum()
        })
        .collect();
    DensityMatrix::from_diagonal(&diag, true).expect("a sum of σz terms is traceless")
}

/// Rx(θ1) on `i`, free evolution under J_ij alone for 1/(2|J_ij|),
/// Ry(θ2) on `i`, crush.
fn mixing_block(system: &SpinSystem, i: usize, j: usize, theta1: f64, theta2: f64) -> Result<Vec<PulseEvent>> {
    let jij = system.j(i, j);
    if jij == 0.0 {
        return Err(Error::MissingCoupling(i, j));
    }
    Ok(vec![
        PulseEvent::hard(vec![i], 0.0, theta1),
        PulseEvent::delay(1.0 / (2.0 * jij.abs()), Couplings::Only(vec![(i, j)])),
        PulseEvent::hard(vec![i], FRAC_PI_2, theta2),
        PulseEvent::Crush,
    ])
}

/// Three-crush spatial-averaging sequence that turns the thermal deviation
/// into one proportional to diag(7, −1, …, −1).
///
/// Each mixing block on spin i with partner j sends Zᵢ·M to
/// cos θ1 cos θ2 Zᵢ·M − sgn(J) sin θ1 sin θ2 ZᵢZⱼ·M. The first crush also
/// scales the bare polarizations of spins 1 and 2 down to a common level.
pub fn pps_program(system: &SpinSystem) -> Result<PulseProgram> {
    if system.n() != 3 {
        return Err(Error::Dimension(format!("pseudo-pure preparation needs 3 spins, got {}", system.n())));
    }
    let w: Vec<f64> = system.spins().iter().map(|s| s.weight).collect();
    let t = (w[0] / 4.0).min(w[1] / 2.0).min(w[2]);
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!("polarization weights {w:?} must all be positive")));
    }
    let sigma = |i: usize, j: usize| system.j(i, j).signum();

    let mut prog = PulseProgram::new();
    prog.push(PulseEvent::hard(vec![1], 0.0, (2.0 * t / w[1]).acos()));
    prog.push(PulseEvent::hard(vec![2], 0.0, (t / w[2]).acos()));
    let theta1 = (4.0 * t / w[0]).asin() / 2.0;
    for e in mixing_block(system, 0, 1, theta1, -sigma(0, 1) * (FRAC_PI_2 - theta1))? {
        prog.push(e);
    }
    for e in mixing_block(system, 0, 2, FRAC_PI_4, -sigma(0, 2) * FRAC_PI_4)? {
        prog.push(e);
    }
    for e in mixing_block(system, 1, 2, FRAC_PI_4, -sigma(1, 2) * FRAC_PI_4)? {
        prog.push(e);
    }
    Ok(prog)
}

/// Run [`pps_program`] on the thermal state and check the outcome.
pub fn prepare_pps(system: &SpinSystem) -> Result<DensityMatrix> {
    let rho = evolve(&thermal_state(system), &pps_program(system)?, system, &EvolveOptions::ideal())?;
    check_pps(&rho)?;
    Ok(rho)
}

/// Accept only a diagonal deviation ∝ diag(7, −1, …, −1).
pub fn check_pps(rho: &DensityMatrix) -> Result<()> {
    let d = rho.dim();
    let diag = rho.diagonal();
    let fail = || Error::PpsFailed { diagonal: diag.clone() };
    let scale = (diag[0] - diag[1]) / d as f64;
    if !(scale > 0.0) {
        return Err(fail());
    }
    let m = rho.entries();
    for r in 0..d {
        for c in 0..d {
            if r != c && m[(r, c)].norm() > 1e-12 {
                return Err(fail());
            }
        }
    }
    for (k, &x) in diag.iter().enumerate() {
        let want = if k == 0 { (d - 1) as f64 } else { -1.0 } * scale;
        if (x - want).abs() > 1e-9 * scale {
            return Err(fail());
        }
    }
    Ok(())
}
