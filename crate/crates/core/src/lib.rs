// Copyright 2026 EAQDC Contributors
// SPDX-License-Identifier: Apache-2.0

//! Simulation, pulse compilation and readout for an NMR realization of the
//! entanglement-assisted quantum delayed-choice experiment.

pub mod circuit;
pub mod compiler;
pub mod error;
pub mod harness;
pub mod nmr;
pub mod optimizer;
pub mod predictions;
pub mod quantum;
pub mod readout;

pub use error::{Error, Result};
