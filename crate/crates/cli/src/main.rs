// Copyright 2026 EAQDC Contributors
// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use eaqdc_core::circuit::{build_eaqdc, intensities};
use eaqdc_core::compiler::CompileOptions;
use eaqdc_core::harness::{
    export, pulse_peaks, run_sweep, ExperimentConfig, Format, Mode, NoiseConfig, PulseContext, SweepSpec,
};
use eaqdc_core::optimizer::{export_segments, optimize};
use eaqdc_core::predictions::{hv_intensity, hv_visibility, qm_intensity, qm_visibility, Outcome};
use eaqdc_core::quantum::{embed, Gate, StateVector, A, C};
use eaqdc_core::readout::{extract_direct, extract_swapped, intensities_from_coefficients, spectrum};
use eaqdc_core::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Simulate the entanglement-assisted quantum delayed-choice experiment on
/// a three-spin NMR processor.
#[derive(Parser)]
#[command(name = "eaqdc", version)]
struct Cli {
    /// Experiment file (grids, sweep, noise, optimizer, molecule).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form intensities and visibilities on the grid.
    Predict {
        #[command(flatten)]
        grid: GridArgs,
    },
    /// One (α, φ) cell in one mode.
    Simulate {
        #[arg(long, value_parser = parse_angle)]
        alpha: f64,
        #[arg(long, value_parser = parse_angle)]
        phi: f64,
        #[arg(long, default_value = "pulse-ideal", value_parser = parse_mode)]
        mode: Mode,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        noise: NoiseArgs,
        /// Print the compiled pulse program.
        #[arg(long)]
        dump: bool,
    },
    /// Optimize one shaped pulse and write its segment table.
    OptimizePulse {
        #[arg(long, value_enum)]
        gate: PulseGate,
        /// φ for `phase`, α for `y`; ignored for `swap`.
        #[arg(long, value_parser = parse_angle, default_value = "0")]
        angle: f64,
        #[arg(long)]
        segments: Option<usize>,
        /// Seconds per segment.
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run the full (mode, α, φ, repeat) sweep and export it.
    Sweep {
        #[command(flatten)]
        grid: GridArgs,
        /// Comma-separated modes.
        #[arg(long, value_delimiter = ',', value_parser = parse_mode)]
        modes: Option<Vec<Mode>>,
        #[arg(long)]
        repeats: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        noise: NoiseArgs,
        #[arg(long, value_enum, default_value = "csv")]
        format: OutputFormat,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// ¹³C spectrum of one cell as CSV (frequency_hz, amplitude).
    ExportSpectrum {
        #[arg(long, value_parser = parse_angle)]
        alpha: f64,
        #[arg(long, value_parser = parse_angle)]
        phi: f64,
        #[arg(long, default_value = "pulse-ideal", value_parser = parse_mode)]
        mode: Mode,
        /// Observe after the readout SWAP.
        #[arg(long)]
        swapped: bool,
        #[arg(long, default_value_t = 2048)]
        points: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        noise: NoiseArgs,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Args)]
struct GridArgs {
    /// Comma-separated α values; `pi`, `pi/5`, `3pi/10` are accepted.
    #[arg(long, value_delimiter = ',', value_parser = parse_angle)]
    alpha: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', value_parser = parse_angle)]
    phi: Option<Vec<f64>>,
}

#[derive(Args)]
struct NoiseArgs {
    /// Turn every noise source off before applying the options below.
    #[arg(long)]
    no_noise: bool,
    #[arg(long)]
    t1_scale: Option<f64>,
    #[arg(long)]
    t2_scale: Option<f64>,
    #[arg(long)]
    flip_sigma: Option<f64>,
    #[arg(long)]
    readout_sigma: Option<f64>,
    #[arg(long)]
    crosstalk: Option<f64>,
}

impl NoiseArgs {
    fn apply(&self, mut n: NoiseConfig) -> NoiseConfig {
        if self.no_noise {
            n = NoiseConfig::default();
        }
        for (slot, v) in [
            (&mut n.t1_scale, self.t1_scale),
            (&mut n.t2_scale, self.t2_scale),
            (&mut n.flip_sigma, self.flip_sigma),
            (&mut n.readout_sigma, self.readout_sigma),
            (&mut n.crosstalk, self.crosstalk),
        ] {
            if let Some(v) = v {
                *slot = v;
            }
        }
        n
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PulseGate {
    Phase,
    Y,
    Swap,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.trim().parse().map_err(|e: Error| e.to_string())
}

/// `1.2`, `pi`, `-pi/2`, `3pi/10`, `0.5*pi`.
fn parse_angle(s: &str) -> Result<f64, String> {
    let t = s.trim().to_ascii_lowercase().replace('*', "");
    let bad = || format!("cannot read `{s}` as an angle");
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n.to_string(), d.parse::<f64>().map_err(|_| bad())?),
        None => (t.clone(), 1.0),
    };
    let value = match num.strip_suffix("pi") {
        Some(k) => {
            let k = match k {
                "" | "+" => 1.0,
                "-" => -1.0,
                k => k.parse::<f64>().map_err(|_| bad())?,
            };
            k * PI
        }
        None => num.parse::<f64>().map_err(|_| bad())?,
    };
    let v = value / den;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad())
    }
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure { code: 1, message: e.to_string() }
    }
}

fn base_spec(config: &Option<PathBuf>) -> Result<SweepSpec, Failure> {
    let spec = SweepSpec::default();
    Ok(match config {
        Some(p) => ExperimentConfig::load(p)?.apply(spec),
        None => spec,
    })
}

fn apply_grid(spec: &mut SweepSpec, grid: &GridArgs) {
    if let Some(a) = &grid.alpha {
        spec.alphas = a.clone();
    }
    if let Some(p) = &grid.phi {
        spec.phis = p.clone();
    }
}

fn write_or_print(output: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    match output {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure { code: 1, message: format!("{}: {e}", p.display()) }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let mut spec = base_spec(&cli.config)?;
    match cli.command {
        Command::Predict { grid } => {
            apply_grid(&mut spec, &grid);
            spec.validate()?;
            let mut out = String::from("alpha,phi,qm_c0,qm_c1,hv\n");
            for &a in &spec.alphas {
                for &p in &spec.phis {
                    let _ = writeln!(
                        out,
                        "{a},{p},{},{},{}",
                        qm_intensity(a, p, Outcome::C0),
                        qm_intensity(a, p, Outcome::C1),
                        hv_intensity(p)
                    );
                }
            }
            out.push_str("\nalpha,v_qm_c0,v_qm_c1,v_hv\n");
            for &a in &spec.alphas {
                let _ = writeln!(
                    out,
                    "{a},{},{},{}",
                    qm_visibility(a, Outcome::C0),
                    qm_visibility(a, Outcome::C1),
                    hv_visibility()
                );
            }
            print!("{out}");
        }
        Command::Simulate { alpha, phi, mode, seed, noise, dump } => {
            spec.noise = noise.apply(spec.noise);
            spec.noise.validate()?;
            let seed = seed.unwrap_or(spec.seed);
            match mode {
                Mode::AnalyticQm | Mode::AnalyticHv => {
                    let (c0, c1) = if mode == Mode::AnalyticQm {
                        (qm_intensity(alpha, phi, Outcome::C0), qm_intensity(alpha, phi, Outcome::C1))
                    } else {
                        (hv_intensity(phi), hv_intensity(phi))
                    };
                    println!("i_c0 = {c0}\ni_c1 = {c1}");
                }
                Mode::Circuit => {
                    let psi = build_eaqdc(alpha, phi, spec.eta)?.simulate(&StateVector::zero(3)?)?;
                    let i = intensities(&psi)?;
                    println!("i_c0 = {}\ni_c1 = {}", i.i_c0, i.i_c1);
                }
                _ => {
                    let (direct, swapped, report) = cell_peaks(&spec, mode, alpha, phi, seed)?;
                    let est = extract_direct(&direct).merge(&extract_swapped(&swapped));
                    let i = intensities_from_coefficients(&est)?;
                    println!("i_c0 = {}\ni_c1 = {}", i.i_c0, i.i_c1);
                    println!("peaks direct  = {:?}\npeaks swapped = {:?}", direct.f, swapped.f);
                    println!(
                        "pulses = {}\nduration_s = {}\nfidelity = {}",
                        report.pulse_count, report.total_duration, report.hs_fidelity_vs_ideal
                    );
                    if dump {
                        print!("{}", report.program.dump());
                    }
                }
            }
        }
        Command::OptimizePulse { gate, angle, segments, dt, seed, output } => {
            let (target, mut params) = match gate {
                PulseGate::Phase => (embed(Gate::phase(angle).matrix(), &[A], 3)?, spec.optimizer.clone()),
                PulseGate::Y => (embed(Gate::y_alpha(angle).matrix(), &[C], 3)?, spec.optimizer.clone()),
                PulseGate::Swap => (embed(Gate::swap().matrix(), &[A, C], 3)?, spec.swap_optimizer.clone()),
            };
            if let Some(s) = segments {
                params.segments = s;
            }
            if let Some(d) = dt {
                params.dt = d;
            }
            if let Some(s) = seed {
                params.seed = s;
            }
            let run = optimize(&target, &spec.system, &params)?;
            eprintln!(
                "fidelity {:.6} after {} iterations ({} × {} s)",
                run.fidelity, run.iterations, run.segments, run.dt
            );
            let converged = run.converged;
            let fidelity = run.fidelity;
            write_or_print(&output, &export_segments(&run.pulse))?;
            if !converged {
                return Err(Failure {
                    code: 2,
                    message: format!("fidelity {fidelity:.6} below threshold {}", params.threshold),
                });
            }
        }
        Command::Sweep { grid, modes, repeats, seed, noise, format, output } => {
            apply_grid(&mut spec, &grid);
            if let Some(m) = modes {
                spec.modes = m;
            }
            if let Some(r) = repeats {
                spec.repeats = r;
            }
            if let Some(s) = seed {
                spec.seed = s;
            }
            spec.noise = noise.apply(spec.noise);
            let result = run_sweep(&spec)?;
            let format = match format {
                OutputFormat::Csv => Format::Csv,
                OutputFormat::Json => Format::Json,
            };
            for p in export(&result, format, &output)? {
                eprintln!("wrote {}", p.display());
            }
            let flagged: Vec<_> = result.flagged().collect();
            if !flagged.is_empty() {
                for r in flagged.iter().take(5) {
                    eprintln!("flagged: {} α={} φ={} repeat={}: {}", r.mode, r.alpha, r.phi, r.repeat, r.flag.as_deref().unwrap_or(""));
                }
                return Err(Failure { code: 2, message: format!("{} flagged rows", flagged.len()) });
            }
        }
        Command::ExportSpectrum { alpha, phi, mode, swapped, points, seed, noise, output } => {
            if !matches!(mode, Mode::PulseIdeal | Mode::PulseShaped | Mode::PulseNoisy) {
                return Err(Failure { code: 1, message: format!("spectra need a pulse mode, got {mode}") });
            }
            spec.noise = noise.apply(spec.noise);
            spec.noise.validate()?;
            let (direct, after_swap, _) = cell_peaks(&spec, mode, alpha, phi, seed.unwrap_or(spec.seed))?;
            let peaks = if swapped { after_swap } else { direct };
            let t2 = spec.system.spin(A).map(|s| s.t2).unwrap_or(f64::INFINITY);
            let mut out = String::from("frequency_hz,amplitude\n");
            for (nu, a) in spectrum(&peaks, t2, points) {
                let _ = writeln!(out, "{nu},{a}");
            }
            write_or_print(&Some(output), &out)?;
        }
    }
    Ok(())
}

fn cell_peaks(
    spec: &SweepSpec,
    mode: Mode,
    alpha: f64,
    phi: f64,
    seed: u64,
) -> Result<(eaqdc_core::readout::PeakSet, eaqdc_core::readout::PeakSet, eaqdc_core::compiler::CompilationReport), Failure> {
    let ctx = PulseContext::new(&spec.system)?;
    let options: CompileOptions = spec.compile_options(mode);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = (mode == Mode::PulseNoisy).then_some((&spec.noise, &mut rng));
    Ok(pulse_peaks(&ctx, alpha, phi, spec.eta, &options, noise)?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angles() {
        assert_eq!(parse_angle("pi").unwrap(), PI);
        assert_eq!(parse_angle("3pi/10").unwrap(), 3.0 * PI / 10.0);
        assert_eq!(parse_angle("-pi/2").unwrap(), -PI / 2.0);
        assert_eq!(parse_angle("0.5*pi").unwrap(), 0.5 * PI);
        assert_eq!(parse_angle("1.25").unwrap(), 1.25);
        assert!(parse_angle("tau").is_err());
    }
}
