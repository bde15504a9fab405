// Copyright 2026 EAQDC Contributors
// SPDX-License-Identifier: Apache-2.0

use eaqdc_core::harness::{export, from_json, rows_csv, run_sweep, to_json, Format, Mode, NoiseConfig, SweepSpec};

fn max_gap(a: &eaqdc_core::harness::SweepResult, ma: Mode, mb: Mode) -> f64 {
    let pick = |m: Mode| a.rows.iter().filter(move |r| r.mode == m);
    pick(ma)
        .zip(pick(mb))
        .map(|(x, y)| {
            assert_eq!((x.alpha, x.phi, x.repeat), (y.alpha, y.phi, y.repeat));
            (x.i_c0.unwrap() - y.i_c0.unwrap()).abs().max((x.i_c1.unwrap() - y.i_c1.unwrap()).abs())
        })
        .fold(0.0, f64::max)
}

#[test]
fn mode_agreement() {
    let spec = SweepSpec {
        modes: vec![Mode::AnalyticQm, Mode::Circuit, Mode::PulseIdeal],
        repeats: 1,
        ..Default::default()
    };
    let r = run_sweep(&spec).unwrap();
    assert_eq!(r.flagged().count(), 0);
    assert!(max_gap(&r, Mode::AnalyticQm, Mode::Circuit) < 1e-10);
    let g = max_gap(&r, Mode::Circuit, Mode::PulseIdeal);
    assert!(g < 1e-6, "circuit vs pulse-ideal {g}");
}

#[test]
fn hv_constant_across_alpha() {
    let spec = SweepSpec { modes: vec![Mode::AnalyticHv], repeats: 1, ..Default::default() };
    let r = run_sweep(&spec).unwrap();
    for v in &r.visibility {
        assert_eq!(v.v_c0, Some(0.5));
        assert_eq!(v.v_c1, Some(0.5));
    }
}

#[test]
fn row_count_and_determinism() {
    let spec = SweepSpec { modes: vec![Mode::AnalyticQm, Mode::Circuit], repeats: 3, seed: 9, ..Default::default() };
    let a = run_sweep(&spec).unwrap();
    let b = run_sweep(&spec).unwrap();
    assert_eq!(a.rows.len(), 2 * 6 * 13 * 3);
    assert_eq!(rows_csv(&a).unwrap(), rows_csv(&b).unwrap());
    let csv = rows_csv(&a).unwrap();
    assert_eq!(csv.lines().count(), 1 + a.rows.len());
}

#[test]
fn json_round_trip_is_byte_identical() {
    let spec = SweepSpec { modes: vec![Mode::AnalyticQm, Mode::AnalyticHv], repeats: 2, ..Default::default() };
    let r = run_sweep(&spec).unwrap();
    let text = to_json(&r).unwrap();
    let back = from_json(&text).unwrap();
    assert_eq!(back, r);
    assert_eq!(to_json(&back).unwrap(), text);
}

#[test]
fn export_writes_tables() {
    let dir = tempfile::tempdir().unwrap();
    let spec = SweepSpec { modes: vec![Mode::Circuit], repeats: 1, ..Default::default() };
    let r = run_sweep(&spec).unwrap();
    let written = export(&r, Format::Csv, &dir.path().join("sweep.csv")).unwrap();
    assert_eq!(written.len(), 3);
    let vis = std::fs::read_to_string(dir.path().join("sweep_visibility.csv")).unwrap();
    assert_eq!(vis.lines().count(), 1 + 6);
    let json = dir.path().join("sweep.json");
    export(&r, Format::Json, &json).unwrap();
    assert_eq!(from_json(&std::fs::read_to_string(json).unwrap()).unwrap(), r);
}

#[test]
fn noisy_mode_seeded() {
    let spec = SweepSpec {
        alphas: vec![std::f64::consts::PI / 5.0],
        phis: vec![0.0, std::f64::consts::PI],
        modes: vec![Mode::PulseNoisy],
        repeats: 3,
        noise: NoiseConfig { flip_sigma: 0.0, ..NoiseConfig::calibrated() },
        seed: 5,
        ..Default::default()
    };
    let a = run_sweep(&spec).unwrap();
    let b = run_sweep(&spec).unwrap();
    assert_eq!(a, b);
    let c = run_sweep(&SweepSpec { seed: 6, ..spec.clone() }).unwrap();
    assert_ne!(a.rows, c.rows);
    assert!(a.max_spread(Mode::PulseNoisy) > 0.0);
}
