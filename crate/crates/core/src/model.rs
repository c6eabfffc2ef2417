//! System, bath and coupling data model, and the spectrum of the coupled
//! universe.
//!
//! The coupling `sum_{j,n} lambda_n |n><n| (g_j a_j^+ + h.c.)` commutes with
//! the system Hamiltonian, so every system level `n` carries its own displaced
//! bath ladder. The universe eigenvalues are
//! `eps_n(kappa) + sum_j n_j omega_j` with `eps_n(kappa) = eps_n - kappa lambda_n^2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance used when checking that a frequency is an integer
/// multiple of the quantum unit.
pub const COMMENSURATE_TOL: f64 = 1e-12;

/// An `M`-level system with bare energies and coupling weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    energies: Vec<f64>,
    couplings: Vec<f64>,
}

impl SystemSpec {
    pub fn new(energies: Vec<f64>, couplings: Vec<f64>) -> Result<Self> {
        if energies.is_empty() {
            return Err(Error::InvalidParameter(
                "system needs at least one level".into(),
            ));
        }
        if couplings.len() != energies.len() {
            return Err(Error::DimensionMismatch {
                what: "couplings",
                got: couplings.len(),
                expected: energies.len(),
            });
        }
        if energies.iter().chain(&couplings).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "system energies and couplings must be finite".into(),
            ));
        }
        if energies.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidParameter(
                "system energies must be non-decreasing".into(),
            ));
        }
        Ok(Self {
            energies,
            couplings,
        })
    }

    /// Harmonic oscillator truncated to `levels` levels: `eps_n = n omega`, `lambda_n = n`.
    pub fn harmonic(omega: f64, levels: usize) -> Result<Self> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "oscillator frequency {omega} must be positive"
            )));
        }
        let energies = (0..levels).map(|n| n as f64 * omega).collect();
        let couplings = (0..levels).map(|n| n as f64).collect();
        Self::new(energies, couplings)
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }
}

/// `N` bath oscillators with frequencies `omega_j` and coupling strengths `g_j`.
///
/// `quantum_unit` is only consulted by exact counting, which needs every
/// frequency to sit on a common integer grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BathSpec {
    frequencies: Vec<f64>,
    strengths: Vec<f64>,
    quantum_unit: f64,
}

impl BathSpec {
    pub fn new(frequencies: Vec<f64>, strengths: Vec<f64>, quantum_unit: f64) -> Result<Self> {
        if frequencies.is_empty() {
            return Err(Error::InvalidParameter(
                "bath needs at least one mode".into(),
            ));
        }
        if strengths.len() != frequencies.len() {
            return Err(Error::DimensionMismatch {
                what: "strengths",
                got: strengths.len(),
                expected: frequencies.len(),
            });
        }
        if frequencies.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::InvalidParameter(
                "bath frequencies must be positive".into(),
            ));
        }
        if strengths.iter().any(|g| !g.is_finite()) {
            return Err(Error::InvalidParameter(
                "bath strengths must be finite".into(),
            ));
        }
        if !(quantum_unit.is_finite() && quantum_unit > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "quantum unit {quantum_unit} must be positive"
            )));
        }
        Ok(Self {
            frequencies,
            strengths,
            quantum_unit,
        })
    }

    /// `modes` identical oscillators of frequency `omega`, quantized in units of `omega`.
    pub fn degenerate(modes: usize, omega: f64, strength: f64) -> Result<Self> {
        Self::new(vec![omega; modes], vec![strength; modes], omega)
    }

    pub fn modes(&self) -> usize {
        self.frequencies.len()
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn strengths(&self) -> &[f64] {
        &self.strengths
    }

    pub fn quantum_unit(&self) -> f64 {
        self.quantum_unit
    }

    /// Integer weights `k_j = omega_j / u`; fails if any frequency is off the grid.
    pub fn integer_weights(&self) -> Result<Vec<u64>> {
        self.frequencies
            .iter()
            .map(|&w| {
                let ratio = w / self.quantum_unit;
                let k = ratio.round();
                if k < 1.0 || (ratio - k).abs() > COMMENSURATE_TOL * ratio.max(1.0) {
                    Err(Error::Incommensurate {
                        frequency: w,
                        unit: self.quantum_unit,
                    })
                } else {
                    Ok(k as u64)
                }
            })
            .collect()
    }

    /// Same bath with every `g_j` multiplied by `factor`.
    pub fn scaled_strengths(&self, factor: f64) -> Self {
        Self {
            frequencies: self.frequencies.clone(),
            strengths: self.strengths.iter().map(|g| g * factor).collect(),
            quantum_unit: self.quantum_unit,
        }
    }

    /// Rescale the strengths uniformly so that `kappa` hits `target`.
    ///
    /// An uncoupled bath has no direction to scale along, so it gets equal
    /// strengths on every mode instead.
    pub fn with_kappa(&self, target: f64) -> Result<Self> {
        if !(target.is_finite() && target >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "kappa target {target} must be non-negative"
            )));
        }
        let current = kappa(self);
        if current > 0.0 {
            return Ok(self.scaled_strengths((target / current).sqrt()));
        }
        let inv_sum: f64 = self.frequencies.iter().map(|w| 1.0 / (4.0 * w)).sum();
        let g = (target / inv_sum).sqrt();
        Self::new(
            self.frequencies.clone(),
            vec![g; self.modes()],
            self.quantum_unit,
        )
    }
}

/// `kappa = sum_j g_j^2 / (4 omega_j)`.
pub fn kappa(bath: &BathSpec) -> f64 {
    bath.frequencies
        .iter()
        .zip(&bath.strengths)
        .map(|(w, g)| g * g / (4.0 * w))
        .sum()
}

/// Coupling constants derived from a system/bath pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingSummary {
    pub kappa: f64,
    /// `displacements[n][j] = alpha_jn = -lambda_n g_j / (2 omega_j)`.
    pub displacements: Vec<Vec<f64>>,
}

impl CouplingSummary {
    /// Per-mode relative displacement `alpha_jn - alpha_jm`.
    pub fn relative_displacement(&self, n: usize, m: usize, mode: usize) -> f64 {
        self.displacements[n][mode] - self.displacements[m][mode]
    }
}

pub fn coupling_summary(system: &SystemSpec, bath: &BathSpec) -> CouplingSummary {
    let displacements = system
        .couplings
        .iter()
        .map(|&lambda| {
            bath.frequencies
                .iter()
                .zip(&bath.strengths)
                .map(|(w, g)| -lambda * g / (2.0 * w))
                .collect()
        })
        .collect();
    CouplingSummary {
        kappa: kappa(bath),
        displacements,
    }
}

/// Per-mode relative displacement between the bath ladders of levels `n` and `m`.
pub fn relative_displacements(
    system: &SystemSpec,
    bath: &BathSpec,
    n: usize,
    m: usize,
) -> Vec<f64> {
    let dl = system.couplings[n] - system.couplings[m];
    bath.frequencies
        .iter()
        .zip(&bath.strengths)
        .map(|(w, g)| -g * dl / (2.0 * w))
        .collect()
}

/// Renormalized system levels `eps_n(kappa)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeformedSpectrum {
    pub levels: Vec<f64>,
}

pub fn deformed_spectrum(system: &SystemSpec, kappa: f64) -> Result<DeformedSpectrum> {
    if !(kappa.is_finite() && kappa >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "kappa {kappa} must be non-negative"
        )));
    }
    let levels = system
        .energies
        .iter()
        .zip(&system.couplings)
        .map(|(e, l)| e - kappa * l * l)
        .collect();
    Ok(DeformedSpectrum { levels })
}

/// `eps_{n+1}(kappa) - eps_n(kappa)`; may be negative for strong coupling.
pub fn level_spacing_effective(system: &SystemSpec, kappa: f64, n: usize) -> Result<f64> {
    if n + 1 >= system.len() {
        return Err(Error::IndexOutOfRange {
            index: n,
            len: system.len(),
        });
    }
    let (e, l) = (&system.energies, &system.couplings);
    Ok(e[n + 1] - e[n] - kappa * (l[n + 1] * l[n + 1] - l[n] * l[n]))
}

/// Total-energy window `[E, E + delta]` of the constrained universe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShellWindow {
    energy: f64,
    delta: f64,
}

impl ShellWindow {
    pub fn new(energy: f64, delta: f64) -> Result<Self> {
        if !(energy.is_finite() && energy >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "shell energy {energy} must be non-negative"
            )));
        }
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "shell thickness {delta} must be positive"
            )));
        }
        Ok(Self { energy, delta })
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}
