// Copyright 2026 EAQDC Contributors
// SPDX-License-Identifier: Apache-2.0

use std::fmt::Write as _;
use std::sync::Arc;

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::quantum::Matrix;

/// Which couplings evolve during a delay.
#[derive(Clone, Debug, PartialEq)]
pub enum Couplings {
    All,
    Only(Vec<(usize, usize)>),
    None,
}

/// One rf channel inside a segment: amplitude in Hz, phase in rad.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Control {
    pub amplitude: f64,
    pub phase: f64,
}

impl Control {
    pub const OFF: Control = Control { amplitude: 0.0, phase: 0.0 };

    /// (ux, uy) Cartesian amplitudes in Hz.
    pub fn xy(&self) -> (f64, f64) {
        (self.amplitude * self.phase.cos(), self.amplitude * self.phase.sin())
    }

    pub fn from_xy(ux: f64, uy: f64) -> Self {
        Self { amplitude: ux.hypot(uy), phase: uy.atan2(ux) }
    }
}

/// Piecewise-constant interval: one control per channel.
#[derive(Clone, Debug, PartialEq)]
pub struct Segment {
    pub dt: f64,
    pub controls: Vec<Control>,
}

/// A numerically shaped pulse on one or more channels.
#[derive(Clone, Debug)]
pub struct ShapedPulse {
    pub label: String,
    pub channels: Vec<usize>,
    pub segments: Vec<Segment>,
    cache: Option<Arc<(u64, Matrix)>>,
}

impl PartialEq for ShapedPulse {
    fn eq(&self, other: &Self) -> bool {
        self.label == other.label && self.channels == other.channels && self.segments == other.segments
    }
}

impl ShapedPulse {
    pub fn new(label: impl Into<String>, channels: Vec<usize>, segments: Vec<Segment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::InvalidParameter("shaped pulse needs at least one segment".into()));
        }
        if channels.is_empty() {
            return Err(Error::InvalidParameter("shaped pulse needs at least one channel".into()));
        }
        for s in &segments {
            if s.dt < 0.0 || !s.dt.is_finite() {
                return Err(Error::NegativeDuration(s.dt));
            }
            if s.controls.len() != channels.len() {
                return Err(Error::Dimension(format!(
                    "segment has {} controls for {} channels",
                    s.controls.len(),
                    channels.len()
                )));
            }
        }
        Ok(Self { label: label.into(), channels, segments, cache: None })
    }

    pub fn duration(&self) -> f64 {
        self.segments.iter().map(|s| s.dt).sum()
    }

    /// Remember the propagator computed for the system with `fingerprint`.
    pub fn with_propagator(mut self, fingerprint: u64, u: Matrix) -> Self {
        self.cache = Some(Arc::new((fingerprint, u)));
        self
    }

    pub(crate) fn cached_propagator(&self, fingerprint: u64) -> Option<&Matrix> {
        self.cache.as_ref().filter(|c| c.0 == fingerprint).map(|c| &c.1)
    }
}

/// Rational timing of a refocused delay, τ = `tau` / |J| for the pair
/// whose coupling the echo keeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EchoTiming {
    pub pair: (usize, usize),
    pub tau: Ratio<i64>,
}

impl EchoTiming {
    /// Exponent γ/π of e^{−iγ σzσz} realized by two delays of τ.
    pub fn angle_over_pi(&self) -> Ratio<i64> {
        self.tau
    }

    pub fn seconds(&self, j_hz: f64) -> f64 {
        *self.tau.numer() as f64 / (*self.tau.denom() as f64 * j_hz.abs())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PulseEvent {
    /// Rotation about the in-plane axis at `phase` by `angle`, on every
    /// target at once. `duration` is nominal.
    Hard { targets: Vec<usize>, phase: f64, angle: f64, duration: f64 },
    Shaped(ShapedPulse),
    Delay { duration: f64, couplings: Couplings, echo: Option<EchoTiming> },
    /// Gradient crush: erases every coherence.
    Crush,
}

/// Nutation rate assumed for nominal hard-pulse lengths, Hz.
pub const HARD_PULSE_NUTATION_HZ: f64 = 25_000.0;

impl PulseEvent {
    pub fn hard(targets: Vec<usize>, phase: f64, angle: f64) -> Self {
        let duration = angle.abs() / (2.0 * std::f64::consts::PI * HARD_PULSE_NUTATION_HZ);
        PulseEvent::Hard { targets, phase, angle, duration }
    }

    pub fn delay(duration: f64, couplings: Couplings) -> Self {
        PulseEvent::Delay { duration, couplings, echo: None }
    }

    pub fn duration(&self) -> f64 {
        match self {
            PulseEvent::Hard { duration, .. } => *duration,
            PulseEvent::Shaped(p) => p.duration(),
            PulseEvent::Delay { duration, .. } => *duration,
            PulseEvent::Crush => 0.0,
        }
    }

    pub fn is_rf_pulse(&self) -> bool {
        matches!(self, PulseEvent::Hard { .. } | PulseEvent::Shaped(_))
    }

    /// Reject negative times and spins outside an `n`-spin system.
    pub fn validate(&self, n: usize) -> Result<()> {
        let spin = |i: usize| if i < n { Ok(()) } else { Err(Error::UnknownSpin(i.to_string())) };
        match self {
            PulseEvent::Hard { targets, duration, angle, phase } => {
                if *duration < 0.0 || !duration.is_finite() {
                    return Err(Error::NegativeDuration(*duration));
                }
                if !angle.is_finite() || !phase.is_finite() {
                    return Err(Error::InvalidParameter("non-finite hard pulse".into()));
                }
                targets.iter().try_for_each(|&t| spin(t))
            }
            PulseEvent::Shaped(p) => {
                p.channels.iter().try_for_each(|&t| spin(t))?;
                for s in &p.segments {
                    if s.dt < 0.0 {
                        return Err(Error::NegativeDuration(s.dt));
                    }
                }
                Ok(())
            }
            PulseEvent::Delay { duration, couplings, .. } => {
                if *duration < 0.0 || !duration.is_finite() {
                    return Err(Error::NegativeDuration(*duration));
                }
                if let Couplings::Only(pairs) = couplings {
                    for &(a, b) in pairs {
                        spin(a)?;
                        spin(b)?;
                    }
                }
                Ok(())
            }
            PulseEvent::Crush => Ok(()),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PulseProgram {
    events: Vec<PulseEvent>,
}

impl PulseProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, event: PulseEvent) {
        self.events.push(event);
    }

    pub fn extend(&mut self, other: PulseProgram) {
        self.events.extend(other.events);
    }

    pub fn events(&self) -> &[PulseEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.events.iter().map(PulseEvent::duration).sum()
    }

    /// Hard and shaped pulses.
    pub fn pulse_count(&self) -> usize {
        self.events.iter().filter(|e| e.is_rf_pulse()).count()
    }

    pub fn echo_timings(&self) -> impl Iterator<Item = (EchoTiming, f64)> + '_ {
        self.events.iter().filter_map(|e| match e {
            PulseEvent::Delay { echo: Some(t), duration, .. } => Some((*t, *duration)),
            _ => None,
        })
    }

    /// One line per event, stable enough to diff against golden files.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (k, e) in self.events.iter().enumerate() {
            let _ = match e {
                PulseEvent::Hard { targets, phase, angle, duration } => writeln!(
                    out,
                    "{k} hard targets={} phase={phase} angle={angle} duration={duration}",
                    join(targets)
                ),
                PulseEvent::Shaped(p) => writeln!(
                    out,
                    "{k} shaped label={} channels={} segments={} duration={}",
                    p.label,
                    join(&p.channels),
                    p.segments.len(),
                    p.duration()
                ),
                PulseEvent::Delay { duration, couplings, echo } => {
                    let c = match couplings {
                        Couplings::All => "all".to_string(),
                        Couplings::None => "none".to_string(),
                        Couplings::Only(pairs) => {
                            pairs.iter().map(|(a, b)| format!("{a}-{b}")).collect::<Vec<_>>().join(",")
                        }
                    };
                    match echo {
                        Some(t) => writeln!(
                            out,
                            "{k} delay duration={duration} couplings={c} echo={}-{}:{}",
                            t.pair.0, t.pair.1, t.tau
                        ),
                        None => writeln!(out, "{k} delay duration={duration} couplings={c}"),
                    }
                }
                PulseEvent::Crush => writeln!(out, "{k} crush"),
            };
        }
        out
    }
}

fn join(v: &[usize]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl FromIterator<PulseEvent> for PulseProgram {
    fn from_iter<T: IntoIterator<Item = PulseEvent>>(iter: T) -> Self {
        Self { events: iter.into_iter().collect() }
    }
}
