// Copyright 2026 EAQDC Contributors
// SPDX-License-Identifier: Apache-2.0

//! Simulated liquid-state NMR spectrometer: spin system, pulse programs and
//! rotating-frame evolution.

mod evolve;
mod pps;
mod program;
mod system;

pub use evolve::{
    control_hamiltonian, drift_hamiltonian, event_propagator, evolve, program_propagator, relax, shaped_propagator,
    EvolveOptions, Relaxation,
};
pub use pps::{check_pps, pps_program, prepare_pps, thermal_state};
pub use program::{
    Control, Couplings, EchoTiming, PulseEvent, PulseProgram, Segment, ShapedPulse, HARD_PULSE_NUTATION_HZ,
};
pub use system::{Spin, SpinSystem};
pub(crate) use system::config_error;
