// Copyright 2026 EAQDC Contributors
// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use eaqdc_core::circuit::build_eaqdc;
use eaqdc_core::compiler::{compile, CompileOptions};
use eaqdc_core::nmr::{pps_program, SpinSystem};

fn check(name: &str, actual: &str) {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(actual, expected, "{name} changed; rerun with UPDATE_GOLDEN=1 if intended");
}

#[test]
fn ideal_sequence_dump() {
    let system = SpinSystem::diethyl_fluoromalonate();
    let circuit = build_eaqdc(0.6283185307179586, 1.0471975511965976, 0.5).unwrap();
    let report = compile(&circuit, &system, &CompileOptions::default()).unwrap();
    check("eaqdc_ideal.txt", &report.program.dump());
}

#[test]
fn pps_sequence_dump() {
    let system = SpinSystem::diethyl_fluoromalonate();
    check("pps.txt", &pps_program(&system).unwrap().dump());
}
