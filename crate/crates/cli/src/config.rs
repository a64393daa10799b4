//! JSON run configuration: strict parsing, flag overrides, self-description.

use anyhow::{bail, Context};
use honeylatt::geometry::Detuning;
use honeylatt::BeamConfig64;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// The full run configuration. Unknown keys are rejected so a config file
/// cannot silently misspell a knob; the resolved struct is echoed into every
/// output sidecar.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub beams: BeamsConfig,
    pub bands: BandsConfig,
    pub pot: PotConfig,
    pub dos: DosConfig,
    pub dirac: DiracConfig,
    pub t0: T0Config,
    pub sweep: SweepConfig,
    pub phase: PhaseConfig,
    pub output: OutputConfig,
    /// Seed for randomized utilities (echoed into outputs; the deterministic
    /// commands ignore it).
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BeamsConfig {
    pub strengths: [f64; 3],
    pub theta2: f64,
    pub theta3: f64,
    pub phi: f64,
    pub v0_over_er: f64,
    /// "blue" or "red".
    pub detuning: String,
}

impl Default for BeamsConfig {
    fn default() -> Self {
        Self {
            strengths: [1.0, 1.0, 1.0],
            theta2: 0.0,
            theta3: 0.0,
            phi: 0.0,
            v0_over_er: 32.0,
            detuning: "blue".into(),
        }
    }
}

impl BeamsConfig {
    pub fn to_core(&self) -> anyhow::Result<BeamConfig64> {
        let detuning = match self.detuning.as_str() {
            "blue" => Detuning::Blue,
            "red" => Detuning::Red,
            other => bail!("unknown detuning '{other}' (expected 'blue' or 'red')"),
        };
        Ok(BeamConfig64 {
            strengths: self.strengths,
            theta2: self.theta2,
            theta3: self.theta3,
            phi: self.phi,
            v0_over_er: self.v0_over_er,
            detuning,
        })
    }

    pub fn is_red(&self) -> bool {
        self.detuning == "red"
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BandsConfig {
    /// "K2-Kp3" or "G-K-M-G".
    pub path: String,
    pub samples_per_segment: usize,
    pub n_bands: usize,
    pub cutoff: Option<usize>,
}

impl Default for BandsConfig {
    fn default() -> Self {
        Self {
            path: "K2-Kp3".into(),
            samples_per_segment: 50,
            n_bands: 2,
            cutoff: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PotConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl Default for PotConfig {
    fn default() -> Self {
        // One primitive cell of the nominal lattice, generously framed.
        Self {
            x_min: 0.0,
            x_max: 7.5,
            y_min: -2.2,
            y_max: 2.2,
            nx: 150,
            ny: 90,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DosConfig {
    pub grid: usize,
    pub bins: usize,
    /// Hopping imbalance `t1 = gamma t0` used for the histogram.
    pub gamma: f64,
    pub epsilon: f64,
}

impl Default for DosConfig {
    fn default() -> Self {
        Self {
            grid: 2000,
            bins: 400,
            gamma: 1.0,
            epsilon: 0.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiracConfig {
    pub gammas: Vec<f64>,
}

impl Default for DiracConfig {
    fn default() -> Self {
        Self {
            gammas: vec![0.25, 0.5, 1.0, 1.5, 2.0, 2.5],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct T0Config {
    pub v0_list: Vec<f64>,
}

impl Default for T0Config {
    fn default() -> Self {
        Self {
            v0_list: vec![20.0, 32.0, 50.0],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub hbar_e: Vec<f64>,
    pub rel_tol: f64,
    pub bracket_hi: Option<f64>,
    pub line_samples: usize,
    pub cutoff: Option<usize>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            hbar_e: vec![0.15, 0.2, 0.25, 0.3, 0.35],
            rel_tol: 1e-3,
            bracket_hi: None,
            line_samples: 22,
            cutoff: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhaseConfig {
    /// Scan endpoint in radians.
    pub phi_max: f64,
    pub steps: usize,
    pub cutoff: Option<usize>,
}

impl Default for PhaseConfig {
    fn default() -> Self {
        Self {
            phi_max: std::f64::consts::PI / 48.0,
            steps: 7,
            cutoff: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: String,
    pub prefix: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: ".".into(),
            prefix: "honeylatt".into(),
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("reading config {}", p.display()))?;
                let cfg: RunConfig = serde_json::from_str(&text)
                    .with_context(|| format!("parsing config {}", p.display()))?;
                Ok(cfg)
            }
        }
    }
}
