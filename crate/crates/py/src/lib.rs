// Copyright 2026 EAQDC Contributors
// SPDX-License-Identifier: Apache-2.0

//! Python module `eaqdc`.

use std::path::PathBuf;

use eaqdc_core::circuit::{build_eaqdc, intensities};
use eaqdc_core::harness::{self, ExperimentConfig, Mode, NoiseConfig, PulseContext};
use eaqdc_core::nmr;
use eaqdc_core::optimizer::{export_segments, optimize};
use eaqdc_core::predictions::{self, Outcome};
use eaqdc_core::quantum::{embed, Gate, StateVector, A, C};
use eaqdc_core::readout::{extract_direct, extract_swapped, intensities_from_coefficients};
use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use rand::SeedableRng;

fn err(e: eaqdc_core::Error) -> PyErr {
    use eaqdc_core::Error as E;
    match e {
        E::OptimizerFailed { .. } | E::PpsFailed { .. } | E::Io(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn outcome(c: u8) -> PyResult<Outcome> {
    match c {
        0 => Ok(Outcome::C0),
        1 => Ok(Outcome::C1),
        _ => Err(PyValueError::new_err(format!("outcome must be 0 or 1, got {c}"))),
    }
}

fn mode(name: &str) -> PyResult<Mode> {
    name.parse().map_err(err)
}

#[pyfunction]
fn qm_intensity(alpha: f64, phi: f64, c: u8) -> PyResult<f64> {
    Ok(predictions::qm_intensity(alpha, phi, outcome(c)?))
}

#[pyfunction]
fn hv_intensity(phi: f64) -> f64 {
    predictions::hv_intensity(phi)
}

#[pyfunction]
fn qm_visibility(alpha: f64, c: u8) -> PyResult<f64> {
    Ok(predictions::qm_visibility(alpha, outcome(c)?))
}

#[pyfunction]
fn visibility_from_curve(curve: Vec<(f64, f64)>) -> PyResult<f64> {
    predictions::visibility_from_curve(&curve).map_err(err)
}

#[pyfunction]
fn default_alpha_grid() -> Vec<f64> {
    predictions::default_alpha_grid()
}

#[pyfunction]
fn default_phi_grid() -> Vec<f64> {
    predictions::default_phi_grid()
}

/// Amplitudes of the circuit's output state, index 4a + 2b + c.
#[pyfunction]
#[pyo3(signature = (alpha, phi, eta = 0.5))]
fn final_state(alpha: f64, phi: f64, eta: f64) -> PyResult<Vec<Complex64>> {
    let psi = build_eaqdc(alpha, phi, eta).and_then(|c| c.simulate(&StateVector::zero(3)?)).map_err(err)?;
    Ok(psi.amplitudes().iter().copied().collect())
}

/// (I_{c=0}, I_{c=1}) of the ideal circuit.
#[pyfunction]
#[pyo3(signature = (alpha, phi, eta = 0.5))]
fn circuit_intensities(alpha: f64, phi: f64, eta: f64) -> PyResult<(f64, f64)> {
    let psi = build_eaqdc(alpha, phi, eta).and_then(|c| c.simulate(&StateVector::zero(3)?)).map_err(err)?;
    let i = intensities(&psi).map_err(err)?;
    Ok((i.i_c0, i.i_c1))
}

#[pyclass(name = "SpinSystem", frozen, from_py_object)]
#[derive(Clone)]
struct PySpinSystem {
    inner: nmr::SpinSystem,
}

#[pymethods]
impl PySpinSystem {
    /// ¹³C, ¹H, ¹⁹F of diethyl fluoromalonate.
    #[staticmethod]
    fn diethyl_fluoromalonate() -> Self {
        Self { inner: nmr::SpinSystem::diethyl_fluoromalonate() }
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Self { inner: nmr::SpinSystem::load(path).map_err(err)? })
    }

    #[getter]
    fn names(&self) -> Vec<String> {
        self.inner.spins().iter().map(|s| s.name.clone()).collect()
    }

    fn j(&self, a: usize, b: usize) -> PyResult<f64> {
        self.inner.check_spin(a).and_then(|_| self.inner.check_spin(b)).map_err(err)?;
        Ok(self.inner.j(a, b))
    }

    /// Deviation density matrix of the pseudo-pure state, row by row.
    fn prepare_pps(&self) -> PyResult<Vec<Vec<Complex64>>> {
        let rho = nmr::prepare_pps(&self.inner).map_err(err)?;
        let m = rho.entries();
        Ok((0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect())
    }

    fn __repr__(&self) -> String {
        format!("SpinSystem({})", self.names().join(", "))
    }
}

#[pyclass(name = "Simulation", frozen, get_all)]
struct PySimulation {
    i_c0: f64,
    i_c1: f64,
    peaks_direct: [f64; 4],
    peaks_swapped: [f64; 4],
    pulse_count: usize,
    duration: f64,
    fidelity: f64,
    program: String,
}

/// One cell through the pulse pipeline (`pulse-ideal`, `pulse-shaped`,
/// `pulse-noisy`).
#[pyfunction]
#[pyo3(signature = (alpha, phi, mode = "pulse-ideal", seed = 0, system = None))]
fn simulate(alpha: f64, phi: f64, mode: &str, seed: u64, system: Option<PySpinSystem>) -> PyResult<PySimulation> {
    let m = self::mode(mode)?;
    if !matches!(m, Mode::PulseIdeal | Mode::PulseShaped | Mode::PulseNoisy) {
        return Err(PyValueError::new_err(format!("`{mode}` is not a pulse mode")));
    }
    let mut spec = harness::SweepSpec::default();
    if let Some(s) = system {
        spec.system = s.inner;
    }
    let ctx = PulseContext::new(&spec.system).map_err(err)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let noise = (m == Mode::PulseNoisy).then_some((&spec.noise, &mut rng));
    let (d, s, report) =
        harness::pulse_peaks(&ctx, alpha, phi, spec.eta, &spec.compile_options(m), noise).map_err(err)?;
    let i = intensities_from_coefficients(&extract_direct(&d).merge(&extract_swapped(&s))).map_err(err)?;
    Ok(PySimulation {
        i_c0: i.i_c0,
        i_c1: i.i_c1,
        peaks_direct: d.f,
        peaks_swapped: s.f,
        pulse_count: report.pulse_count,
        duration: report.total_duration,
        fidelity: report.hs_fidelity_vs_ideal,
        program: report.program.dump(),
    })
}

#[pyclass(name = "Pulse", frozen, get_all)]
struct PyPulse {
    fidelity: f64,
    converged: bool,
    duration: f64,
    segments: String,
}

/// Optimize a shaped pulse for `gate` in {"phase", "y", "swap"}.
#[pyfunction]
#[pyo3(signature = (gate, angle = 0.0, segments = None, dt = None, seed = None))]
fn optimize_pulse(gate: &str, angle: f64, segments: Option<usize>, dt: Option<f64>, seed: Option<u64>) -> PyResult<PyPulse> {
    let system = nmr::SpinSystem::diethyl_fluoromalonate();
    let spec = harness::SweepSpec::default();
    let (target, mut params) = match gate {
        "phase" => (embed(Gate::phase(angle).matrix(), &[A], 3), spec.optimizer),
        "y" => (embed(Gate::y_alpha(angle).matrix(), &[C], 3), spec.optimizer),
        "swap" => (embed(Gate::swap().matrix(), &[A, C], 3), spec.swap_optimizer),
        g => return Err(PyValueError::new_err(format!("unknown gate `{g}`"))),
    };
    let target = target.map_err(err)?;
    params.segments = segments.unwrap_or(params.segments);
    params.dt = dt.unwrap_or(params.dt);
    params.seed = seed.unwrap_or(params.seed);
    let run = optimize(&target, &system, &params).map_err(err)?;
    Ok(PyPulse {
        fidelity: run.fidelity,
        converged: run.converged,
        duration: run.pulse.duration(),
        segments: export_segments(&run.pulse),
    })
}

#[pyclass(name = "SweepResult", frozen)]
struct PySweepResult {
    inner: harness::SweepResult,
}

#[pymethods]
impl PySweepResult {
    /// (mode, alpha, phi, repeat, i_c0, i_c1, flag) tuples.
    #[getter]
    #[allow(clippy::type_complexity)]
    fn rows(&self) -> Vec<(String, f64, f64, usize, Option<f64>, Option<f64>, Option<String>)> {
        self.inner
            .rows
            .iter()
            .map(|r| (r.mode.to_string(), r.alpha, r.phi, r.repeat, r.i_c0, r.i_c1, r.flag.clone()))
            .collect()
    }

    /// (mode, alpha, v_c0, v_c1) tuples.
    #[getter]
    fn visibility(&self) -> Vec<(String, f64, Option<f64>, Option<f64>)> {
        self.inner.visibility.iter().map(|v| (v.mode.to_string(), v.alpha, v.v_c0, v.v_c1)).collect()
    }

    fn max_spread(&self, mode: &str) -> PyResult<f64> {
        Ok(self.inner.max_spread(self::mode(mode)?))
    }

    #[getter]
    fn flagged(&self) -> usize {
        self.inner.flagged().count()
    }

    fn to_json(&self) -> PyResult<String> {
        harness::to_json(&self.inner).map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self { inner: harness::from_json(text).map_err(err)? })
    }

    fn to_csv(&self) -> PyResult<String> {
        harness::rows_csv(&self.inner).map_err(err)
    }

    fn export(&self, path: PathBuf, format: &str) -> PyResult<Vec<PathBuf>> {
        let f: harness::Format = format.parse().map_err(err)?;
        harness::export(&self.inner, f, &path).map_err(err)
    }

    fn __len__(&self) -> usize {
        self.inner.rows.len()
    }
}

/// Run a sweep. Unset arguments come from `config`, then from the defaults.
#[pyfunction]
#[pyo3(signature = (modes = None, alphas = None, phis = None, repeats = None, seed = None, config = None, noise = None))]
#[allow(clippy::too_many_arguments)]
fn run_sweep(
    py: Python<'_>,
    modes: Option<Vec<String>>,
    alphas: Option<Vec<f64>>,
    phis: Option<Vec<f64>>,
    repeats: Option<usize>,
    seed: Option<u64>,
    config: Option<PathBuf>,
    noise: Option<&str>,
) -> PyResult<PySweepResult> {
    let mut spec = harness::SweepSpec::default();
    if let Some(path) = config {
        spec = ExperimentConfig::load(path).map_err(err)?.apply(spec);
    }
    if let Some(m) = modes {
        spec.modes = m.iter().map(|s| mode(s)).collect::<PyResult<_>>()?;
    }
    spec.alphas = alphas.unwrap_or(spec.alphas);
    spec.phis = phis.unwrap_or(spec.phis);
    spec.repeats = repeats.unwrap_or(spec.repeats);
    spec.seed = seed.unwrap_or(spec.seed);
    match noise {
        None => {}
        Some("calibrated") => spec.noise = NoiseConfig::calibrated(),
        Some("none") => spec.noise = NoiseConfig::default(),
        Some(other) => return Err(PyValueError::new_err(format!("noise must be `calibrated` or `none`, got `{other}`"))),
    }
    let result = py.detach(|| harness::run_sweep(&spec)).map_err(err)?;
    Ok(PySweepResult { inner: result })
}

#[pymodule]
fn eaqdc(m: &Bound<'_, PyModule>) -> PyResult<()> {
    register(m)
}

/// Add every function and class to `m`.
pub fn register(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(qm_intensity, m)?)?;
    m.add_function(wrap_pyfunction!(hv_intensity, m)?)?;
    m.add_function(wrap_pyfunction!(qm_visibility, m)?)?;
    m.add_function(wrap_pyfunction!(visibility_from_curve, m)?)?;
    m.add_function(wrap_pyfunction!(default_alpha_grid, m)?)?;
    m.add_function(wrap_pyfunction!(default_phi_grid, m)?)?;
    m.add_function(wrap_pyfunction!(final_state, m)?)?;
    m.add_function(wrap_pyfunction!(circuit_intensities, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(optimize_pulse, m)?)?;
    m.add_function(wrap_pyfunction!(run_sweep, m)?)?;
    m.add_class::<PySpinSystem>()?;
    m.add_class::<PySimulation>()?;
    m.add_class::<PyPulse>()?;
    m.add_class::<PySweepResult>()?;
    Ok(())
}
