//! Run configuration file.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::model::{make_system, CavitySpec, DriveProfile, InitialState, MechanicalSpec, SystemConfig};
use crate::oracle::Scenario;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum ScenarioKind {
    WallTrajectory,
    PhotonNumber,
    PhononNumber,
    ResonanceScan,
    ForceSweep,
    OracleCompare,
    CriticalLength,
}

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::WallTrajectory => "wall_trajectory",
            ScenarioKind::PhotonNumber => "photon_number",
            ScenarioKind::PhononNumber => "phonon_number",
            ScenarioKind::ResonanceScan => "resonance_scan",
            ScenarioKind::ForceSweep => "force_sweep",
            ScenarioKind::OracleCompare => "oracle_compare",
            ScenarioKind::CriticalLength => "critical_length",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemBlock {
    pub cavity: CavitySpec,
    pub mechanics: MechanicalSpec,
    #[serde(default)]
    pub state: InitialState,
    #[serde(default)]
    pub drives: Vec<DriveProfile>,
}

impl SystemBlock {
    pub fn build(&self) -> Result<SystemConfig> {
        make_system(self.cavity.clone(), self.mechanics.clone(), self.state.clone(), self.drives.clone())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    #[default]
    Linear,
    Log,
}

/// Sweep over the scenario's primary variable: t̃ for trajectories and
/// oracle comparisons, ω̃ for resonance scans, L/L₀ for force sweeps and
/// |β|² for critical lengths.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    #[serde(default)]
    pub scale: Scale,
}

impl Grid {
    pub fn values(&self) -> Result<Vec<f64>> {
        if self.points < 2 {
            return Err(Error::Parse("grid.points must be ≥ 2".into()));
        }
        if !(self.start.is_finite() && self.stop.is_finite()) {
            return Err(Error::Parse("grid.start and grid.stop must be finite".into()));
        }
        let n = self.points - 1;
        match self.scale {
            Scale::Linear => Ok((0..=n).map(|i| self.start + (self.stop - self.start) * i as f64 / n as f64).collect()),
            Scale::Log => {
                if !(self.start > 0.0 && self.stop > 0.0) {
                    return Err(Error::Parse("grid.start and grid.stop must be positive for a log grid".into()));
                }
                let (a, b) = (self.start.ln(), self.stop.ln());
                Ok((0..=n).map(|i| (a + (b - a) * i as f64 / n as f64).exp()).collect())
            }
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ApproximationOpt {
    #[default]
    Full,
    Resonant,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrequencyModeOpt {
    #[default]
    Retuned,
    Fixed,
}

fn is_default<T: Default + PartialEq>(v: &T) -> bool {
    *v == T::default()
}

/// Scenario-specific knobs; every field is optional.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Options {
    /// Cavity mode observed (defaults to state.k, or 1 for resonance scans).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_order: Option<usize>,
    #[serde(skip_serializing_if = "is_default")]
    pub approximation: ApproximationOpt,
    /// t̃ values for resonance scans; τ in seconds for force sweeps and
    /// critical lengths.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub times: Vec<f64>,
    /// |β|² values for force sweeps and critical lengths.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub beta2: Vec<f64>,
    #[serde(skip_serializing_if = "is_default")]
    pub frequency_mode: FrequencyModeOpt,
    /// Couplings ε for oracle comparisons.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub epsilons: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub observable: Option<Scenario>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_max: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: ScenarioKind,
    /// Output directory; overridden by --out.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    /// Accepted for reproducibility records; every scenario is deterministic.
    #[serde(default, skip_serializing_if = "is_default")]
    pub seed: u64,
    pub system: SystemBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Grid>,
    #[serde(default, skip_serializing_if = "is_default")]
    pub options: Options,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn grid_values(&self) -> Result<Vec<f64>> {
        self.grid
            .as_ref()
            .ok_or_else(|| Error::Parse(format!("grid is required for {}", self.scenario.name())))?
            .values()
    }
}
