// Copyright 2026 EAQDC Contributors
// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;
use std::hash::{Hash, Hasher};
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::quantum::{embed, pauli_z, re, Matrix, MAX_QUBITS};

/// One nuclear spin of the register.
#[derive(Clone, Debug, PartialEq)]
pub struct Spin {
    pub name: String,
    /// Rotating-frame offset, Hz.
    pub offset: f64,
    /// Relative thermal polarization.
    pub weight: f64,
    /// Seconds. Infinite means no relaxation.
    pub t1: f64,
    pub t2: f64,
    /// Informational only; the rotating frame removes it.
    pub larmor_mhz: Option<f64>,
}

impl Spin {
    pub fn new(name: impl Into<String>, weight: f64) -> Self {
        Self {
            name: name.into(),
            offset: 0.0,
            weight,
            t1: f64::INFINITY,
            t2: f64::INFINITY,
            larmor_mhz: None,
        }
    }

    pub fn with_relaxation(mut self, t1: f64, t2: f64) -> Self {
        self.t1 = t1;
        self.t2 = t2;
        self
    }
}

/// Spins plus their scalar couplings (Hz).
#[derive(Clone, Debug, PartialEq)]
pub struct SpinSystem {
    spins: Vec<Spin>,
    j: Vec<Vec<f64>>,
}

impl SpinSystem {
    pub fn new(spins: Vec<Spin>, j: Vec<Vec<f64>>) -> Result<Self> {
        let n = spins.len();
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::Dimension(format!("{n} spins")));
        }
        if j.len() != n || j.iter().any(|row| row.len() != n) {
            return Err(Error::Dimension(format!("coupling matrix must be {n}×{n}")));
        }
        for a in 0..n {
            if j[a][a] != 0.0 {
                return Err(Error::InvalidParameter(format!("J[{a}][{a}] = {} must be zero", j[a][a])));
            }
            for b in 0..a {
                if j[a][b] != j[b][a] {
                    return Err(Error::InvalidParameter(format!("J not symmetric at ({a}, {b})")));
                }
                if !j[a][b].is_finite() {
                    return Err(Error::InvalidParameter(format!("J[{a}][{b}] not finite")));
                }
            }
        }
        for (k, s) in spins.iter().enumerate() {
            if spins[..k].iter().any(|o| o.name == s.name) {
                return Err(Error::InvalidParameter(format!("duplicate spin name `{}`", s.name)));
            }
            if !(s.t2 > 0.0 && s.t1 >= s.t2) {
                return Err(Error::InvalidParameter(format!(
                    "spin {}: need t1 >= t2 > 0, got t1 = {}, t2 = {}",
                    s.name, s.t1, s.t2
                )));
            }
            if !s.weight.is_finite() || !s.offset.is_finite() {
                return Err(Error::InvalidParameter(format!("spin {}: non-finite weight or offset", s.name)));
            }
        }
        Ok(Self { spins, j })
    }

    /// ¹³C, ¹H, ¹⁹F of diethyl fluoromalonate as qubits A, B, C.
    ///
    /// Relaxation times and polarization weights are placeholder values,
    /// not measured ones.
    pub fn diethyl_fluoromalonate() -> Self {
        let mut spins = vec![
            Spin::new("C", 1.0).with_relaxation(3.5, 0.8),
            Spin::new("H", 3.977).with_relaxation(4.0, 1.0),
            Spin::new("F", 3.741).with_relaxation(4.6, 0.6),
        ];
        for (s, mhz) in spins.iter_mut().zip([101.0, 63.0, 376.0]) {
            s.larmor_mhz = Some(mhz);
        }
        let (ch, hf, cf) = (160.8, 47.6, -192.48);
        let j = vec![vec![0.0, ch, cf], vec![ch, 0.0, hf], vec![cf, hf, 0.0]];
        Self::new(spins, j).expect("built-in molecule is valid")
    }

    pub fn n(&self) -> usize {
        self.spins.len()
    }

    pub fn dim(&self) -> usize {
        1 << self.n()
    }

    pub fn spins(&self) -> &[Spin] {
        &self.spins
    }

    pub fn spin(&self, i: usize) -> Result<&Spin> {
        self.spins.get(i).ok_or_else(|| Error::UnknownSpin(i.to_string()))
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.spins
            .iter()
            .position(|s| s.name == name)
            .ok_or_else(|| Error::UnknownSpin(name.to_string()))
    }

    pub fn j(&self, a: usize, b: usize) -> f64 {
        self.j[a][b]
    }

    pub fn j_matrix(&self) -> &[Vec<f64>] {
        &self.j
    }

    pub fn check_spin(&self, i: usize) -> Result<()> {
        self.spin(i).map(|_| ())
    }

    /// All coupled pairs (a < b).
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let n = self.n();
        let mut out = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                if self.j[a][b] != 0.0 {
                    out.push((a, b));
                }
            }
        }
        out
    }

    /// Σ (πJ/2) σzσz over the given pairs, rad/s.
    pub fn coupling_hamiltonian(&self, pairs: &[(usize, usize)]) -> Result<Matrix> {
        let n = self.n();
        let mut h = Matrix::zeros(self.dim(), self.dim());
        for &(a, b) in pairs {
            self.check_spin(a)?;
            self.check_spin(b)?;
            if a == b {
                return Err(Error::InvalidParameter(format!("coupling of spin {a} with itself")));
            }
            let zz = embed(&pauli_z().kronecker(&pauli_z()), &[a, b], n)?;
            h += zz * re(std::f64::consts::PI * self.j[a][b] / 2.0);
        }
        Ok(h)
    }

    /// Σ π νᵢ σzᵢ, rad/s.
    pub fn offset_hamiltonian(&self) -> Matrix {
        let n = self.n();
        let mut h = Matrix::zeros(self.dim(), self.dim());
        for (i, s) in self.spins.iter().enumerate() {
            if s.offset != 0.0 {
                h += embed(&pauli_z(), &[i], n).expect("spin index in range") * re(std::f64::consts::PI * s.offset);
            }
        }
        h
    }

    /// Fingerprint of everything that shapes coherent evolution.
    pub fn fingerprint(&self) -> u64 {
        let mut hasher = std::collections::hash_map::DefaultHasher::new();
        self.n().hash(&mut hasher);
        for row in &self.j {
            for v in row {
                v.to_bits().hash(&mut hasher);
            }
        }
        for s in &self.spins {
            s.offset.to_bits().hash(&mut hasher);
        }
        hasher.finish()
    }

    pub fn from_toml_str(text: &str, origin: &Path) -> Result<Self> {
        let raw: RawSystem = toml::from_str(text).map_err(|e| config_error(origin, text, &e))?;
        raw.build().map_err(|e| Error::Config { path: origin.to_path_buf(), message: e.to_string() })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config { path: path.to_path_buf(), message: e.to_string() })?;
        Self::from_toml_str(&text, path)
    }
}

pub(crate) fn config_error(path: &Path, text: &str, e: &toml::de::Error) -> Error {
    let message = match e.span() {
        Some(span) => {
            let line = text[..span.start.min(text.len())].matches('\n').count() + 1;
            format!("line {line}: {}", e.message())
        }
        None => e.message().to_string(),
    };
    Error::Config { path: path.to_path_buf(), message }
}

/// File layout:
///
/// ```toml
/// [[spin]]
/// name = "C"
/// weight = 1.0
/// t1 = 3.5        # optional, seconds
/// t2 = 0.8        # optional
/// offset_hz = 0.0 # optional
/// larmor_mhz = 101.0
///
/// [coupling]
/// "C-H" = 160.8
/// ```
#[derive(Deserialize)]
struct RawSystem {
    spin: Vec<RawSpin>,
    #[serde(default)]
    coupling: BTreeMap<String, f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpin {
    name: String,
    #[serde(default = "one")]
    weight: f64,
    #[serde(default)]
    offset_hz: f64,
    t1: Option<f64>,
    t2: Option<f64>,
    larmor_mhz: Option<f64>,
}

fn one() -> f64 {
    1.0
}

impl RawSystem {
    fn build(self) -> Result<SpinSystem> {
        let spins: Vec<Spin> = self
            .spin
            .into_iter()
            .map(|r| Spin {
                name: r.name,
                offset: r.offset_hz,
                weight: r.weight,
                t1: r.t1.unwrap_or(f64::INFINITY),
                t2: r.t2.unwrap_or(f64::INFINITY),
                larmor_mhz: r.larmor_mhz,
            })
            .collect();
        let n = spins.len();
        let mut j = vec![vec![0.0; n]; n];
        for (key, value) in self.coupling {
            let (a, b) = key
                .split_once('-')
                .ok_or_else(|| Error::InvalidParameter(format!("coupling key `{key}` is not `X-Y`")))?;
            let find = |name: &str| {
                spins
                    .iter()
                    .position(|s| s.name == name.trim())
                    .ok_or_else(|| Error::UnknownSpin(name.trim().to_string()))
            };
            let (a, b) = (find(a)?, find(b)?);
            if a == b {
                return Err(Error::InvalidParameter(format!("coupling key `{key}` pairs a spin with itself")));
            }
            if j[a][b] != 0.0 {
                return Err(Error::InvalidParameter(format!("coupling `{key}` given twice")));
            }
            j[a][b] = value;
            j[b][a] = value;
        }
        SpinSystem::new(spins, j)
    }
}
