//! Experiment configuration: strict JSON, unknown keys rejected.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thermalize::{Abscissa, BathSpec, CountMode, FitWindow, LevelCut, ShellWindow, SystemSpec};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<SystemConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bath: Option<BathConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shell: Option<ShellConfig>,
    #[serde(default)]
    pub run: RunConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub two_level: Option<TwoLevelConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SystemConfig {
    Harmonic {
        omega: f64,
        #[serde(rename = "M")]
        levels: usize,
    },
    Explicit {
        energies: Vec<f64>,
        couplings: Vec<f64>,
    },
}

/// A single value broadcast over all modes, or one value per mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerMode {
    Uniform(f64),
    List(Vec<f64>),
}

impl PerMode {
    fn expand(&self, modes: usize, what: &str) -> Result<Vec<f64>> {
        match self {
            PerMode::Uniform(v) => Ok(vec![*v; modes]),
            PerMode::List(v) if v.len() == modes => Ok(v.clone()),
            PerMode::List(v) => Err(CliError::Config(format!(
                "bath.{what} has {} entries for N = {modes}",
                v.len()
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathConfig {
    #[serde(rename = "N")]
    pub modes: usize,
    pub frequency: PerMode,
    #[serde(default = "zero_strength")]
    pub strength: PerMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quantum_unit: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa_target: Option<f64>,
}

fn zero_strength() -> PerMode {
    PerMode::Uniform(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShellConfig {
    #[serde(rename = "E")]
    pub energy: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_mode")]
    pub mode: CountMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_window: Option<String>,
    #[serde(default)]
    pub abscissa: Abscissa,
    #[serde(default)]
    pub level_cut: LevelCut,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappas: Option<Vec<f64>>,
    #[serde(default = "default_cap")]
    pub cap: u64,
}

fn default_samples() -> usize {
    100
}

fn default_mode() -> CountMode {
    CountMode::Analytic
}

fn default_cap() -> u64 {
    thermalize::sampler::DEFAULT_CAP
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            samples: default_samples(),
            mode: default_mode(),
            fit_window: None,
            abscissa: Abscissa::default(),
            level_cut: LevelCut::default(),
            kappas: None,
            cap: default_cap(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoLevelConfig {
    pub beta: f64,
    pub gap: f64,
    /// Grid of `|F|` values.
    pub coherences: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub format: OutputFormat,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

/// A parsed config together with its source text, for line-numbered diagnostics.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: ExperimentConfig,
    source: String,
    origin: String,
}

impl LoadedConfig {
    pub fn parse(source: &str, origin: &str) -> Result<Self> {
        let config: ExperimentConfig = serde_json::from_str(source)
            .map_err(|e| CliError::Config(format!("{origin}:{}: {e}", e.line())))?;
        let loaded = Self {
            config,
            source: source.to_owned(),
            origin: origin.to_owned(),
        };
        loaded.validate()?;
        Ok(loaded)
    }

    pub fn from_config(config: ExperimentConfig) -> Result<Self> {
        let source = serde_json::to_string_pretty(&config).expect("config serializes");
        Self::parse(&source, "<config>")
    }

    /// Error pointing at the first line that mentions `key`.
    pub fn error(&self, key: &str, msg: impl std::fmt::Display) -> CliError {
        let leaf = key.rsplit('.').next().unwrap_or(key);
        let needle = format!("\"{leaf}\"");
        let line = self
            .source
            .lines()
            .position(|l| l.contains(&needle))
            .map_or(0, |i| i + 1);
        CliError::Config(format!("{}:{line}: {key}: {msg}", self.origin))
    }

    fn validate(&self) -> Result<()> {
        if let Some(shell) = &self.config.shell {
            if !(shell.energy.is_finite() && shell.energy >= 0.0) {
                return Err(self.error("shell.E", "must be a non-negative number"));
            }
            if !(shell.delta.is_finite() && shell.delta > 0.0) {
                return Err(self.error("shell.delta", "must be positive"));
            }
        }
        if let Some(w) = &self.config.run.fit_window {
            w.parse::<FitWindow>()
                .map_err(|e| self.error("run.fit_window", e))?;
        }
        if let Some(b) = &self.config.bath {
            if b.modes == 0 {
                return Err(self.error("bath.N", "must be at least 1"));
            }
            if let Some(k) = b.kappa_target {
                if !(k.is_finite() && k >= 0.0) {
                    return Err(self.error("bath.kappa_target", "must be non-negative"));
                }
            }
        }
        if let Some(t) = &self.config.two_level {
            if t.coherences.iter().any(|f| !(f.is_finite() && *f >= 0.0)) {
                return Err(self.error("two_level.coherences", "entries must be non-negative"));
            }
        }
        if let Some(SystemConfig::Harmonic { levels: 0, .. }) = &self.config.system {
            return Err(self.error("system.M", "must be at least 1"));
        }
        Ok(())
    }

    pub fn system(&self) -> Result<SystemSpec> {
        let sys = self
            .config
            .system
            .as_ref()
            .ok_or_else(|| self.error("system", "section is required"))?;
        match sys {
            SystemConfig::Harmonic { omega, levels } => {
                SystemSpec::harmonic(*omega, *levels).map_err(|e| self.error("system.omega", e))
            }
            SystemConfig::Explicit {
                energies,
                couplings,
            } => SystemSpec::new(energies.clone(), couplings.clone())
                .map_err(|e| self.error("system.energies", e)),
        }
    }

    /// Bath with `kappa_target` applied.
    pub fn bath(&self) -> Result<BathSpec> {
        let b = self
            .config
            .bath
            .as_ref()
            .ok_or_else(|| self.error("bath", "section is required"))?;
        let freqs = b
            .frequency
            .expand(b.modes, "frequency")
            .map_err(|e| self.error("bath.frequency", e))?;
        let strengths = b
            .strength
            .expand(b.modes, "strength")
            .map_err(|e| self.error("bath.strength", e))?;
        let unit = b
            .quantum_unit
            .unwrap_or_else(|| freqs.iter().copied().fold(f64::INFINITY, f64::min));
        let bath =
            BathSpec::new(freqs, strengths, unit).map_err(|e| self.error("bath.frequency", e))?;
        match b.kappa_target {
            Some(k) => bath
                .with_kappa(k)
                .map_err(|e| self.error("bath.kappa_target", e)),
            None => Ok(bath),
        }
    }

    pub fn shell(&self) -> Result<ShellWindow> {
        let s = self
            .config
            .shell
            .as_ref()
            .ok_or_else(|| self.error("shell", "section is required"))?;
        ShellWindow::new(s.energy, s.delta).map_err(|e| self.error("shell.delta", e))
    }

    pub fn fit_window(&self) -> Result<FitWindow> {
        let w = self.config.run.fit_window.as_deref().ok_or_else(|| {
            self.error(
                "run.fit_window",
                "is required for fitting (or pass --fit-window a:b)",
            )
        })?;
        w.parse().map_err(|e| self.error("run.fit_window", e))
    }

    /// SHA-256 of the canonical JSON serialization.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(&self.config).expect("config serializes");
        hex::encode(Sha256::digest(&canonical))
    }
}
