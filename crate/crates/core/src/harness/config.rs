//! TOML experiment description. Angles are in degrees, SNR in dB, powers linear.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::array::ArrayGeometry;
use crate::estimator::{Grid, InnerSolverConfig, Method, SearchConfig};
use crate::sources::{AngularDistribution, Scenario, SourceSpec};
use crate::{deg, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrayConfig {
    #[serde(default = "default_sensors")]
    pub sensors: usize,
    /// Inter-sensor spacing in wavelengths.
    #[serde(default = "default_spacing")]
    pub spacing: f64,
    /// Explicit sensor positions in wavelengths; overrides `sensors`/`spacing`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positions: Option<Vec<[f64; 2]>>,
}

fn default_sensors() -> usize {
    6
}

fn default_spacing() -> f64 {
    0.5
}

impl Default for ArrayConfig {
    fn default() -> Self {
        Self {
            sensors: default_sensors(),
            spacing: default_spacing(),
            positions: None,
        }
    }
}

impl ArrayConfig {
    pub fn geometry(&self) -> Result<ArrayGeometry> {
        match &self.positions {
            Some(p) if p.len() < 2 => Err(Error::Config("at least two sensor positions required".into())),
            Some(p) => Ok(ArrayGeometry::planar(p.iter().map(|&[x, y]| (x, y)).collect())),
            None if self.sensors < 2 => Err(Error::Config("at least two sensors required".into())),
            None if !(self.spacing > 0.0) => Err(Error::Config("spacing must be positive".into())),
            None => Ok(ArrayGeometry::ula(self.sensors, self.spacing)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceConfig {
    pub dist: AngularDistribution,
    pub doa_deg: f64,
    pub spread_deg: f64,
    #[serde(default = "one")]
    pub nc_rate: f64,
    #[serde(default)]
    pub nc_phase_deg: f64,
    /// Linear power; when absent the scenario SNR sets it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power: Option<f64>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub array: ArrayConfig,
    pub sources: Vec<SourceConfig>,
    #[serde(default)]
    pub snr_db: f64,
    #[serde(default = "one")]
    pub noise_variance: f64,
    pub snapshots: usize,
}

/// The swept experiment axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Sweep {
    Snapshots { values: Vec<usize> },
    Snr { values_db: Vec<f64> },
    /// Central DOA of the second source, degrees.
    Separation { theta2_values: Vec<f64> },
    /// Noncircularity rate applied to every source.
    Gamma { values: Vec<f64> },
    /// `φ₂ − φ₁`, degrees.
    PhaseSep { values: Vec<f64> },
}

impl Sweep {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Sweep::Snapshots { values } => values.iter().map(|&v| v as f64).collect(),
            Sweep::Snr { values_db: v }
            | Sweep::Separation { theta2_values: v }
            | Sweep::Gamma { values: v }
            | Sweep::PhaseSep { values: v } => v.clone(),
        }
    }

    /// CSV name of the swept column.
    pub fn column(&self) -> &'static str {
        match self {
            Sweep::Snapshots { .. } => "snapshots",
            Sweep::Snr { .. } => "snr_db",
            Sweep::Separation { .. } => "theta2_deg",
            Sweep::Gamma { .. } => "gamma",
            Sweep::PhaseSep { .. } => "phase_sep_deg",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Synthesizer {
    #[default]
    Gaussian,
    Rays,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchSection {
    pub theta_min_deg: f64,
    pub theta_max_deg: f64,
    pub theta_step_deg: f64,
    pub sigma_min_deg: f64,
    pub sigma_max_deg: f64,
    pub sigma_step_deg: f64,
    pub min_separation_deg: f64,
    pub inner_solver: InnerSolverConfig,
}

impl Default for SearchSection {
    fn default() -> Self {
        Self {
            theta_min_deg: -60.0,
            theta_max_deg: 60.0,
            theta_step_deg: 0.5,
            sigma_min_deg: 0.1,
            sigma_max_deg: 8.0,
            sigma_step_deg: 0.1,
            min_separation_deg: 2.0,
            inner_solver: InnerSolverConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    pub csv: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: String,
    pub scenario: ScenarioConfig,
    pub sweep: Sweep,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_method")]
    pub estimator: Method,
    #[serde(default = "default_dist")]
    pub dist_model_for_spread: AngularDistribution,
    #[serde(default)]
    pub synthesizer: Synthesizer,
    #[serde(default = "default_rays")]
    pub rays_per_source: usize,
    /// Attach the analytical RMSE prediction to each row.
    #[serde(default)]
    pub analytical: bool,
    #[serde(default)]
    pub search: SearchSection,
    pub outputs: Outputs,
}

fn default_trials() -> usize {
    200
}

fn default_method() -> Method {
    Method::Robust
}

fn default_dist() -> AngularDistribution {
    AngularDistribution::Gaussian
}

fn default_rays() -> usize {
    100
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be >= 1".into()));
        }
        let values = self.sweep.values();
        if values.is_empty() {
            return Err(Error::Config("sweep values must be nonempty".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("sweep values must be finite".into()));
        }
        if values.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Config("sweep values must be sorted ascending".into()));
        }
        if self.scenario.sources.is_empty() {
            return Err(Error::Config("at least one source required".into()));
        }
        let needs_two = matches!(self.sweep, Sweep::Separation { .. } | Sweep::PhaseSep { .. });
        if needs_two && self.scenario.sources.len() < 2 {
            return Err(Error::Config("separation sweeps need at least two sources".into()));
        }
        if self.synthesizer == Synthesizer::Rays && self.rays_per_source == 0 {
            return Err(Error::Config("rays_per_source must be >= 1".into()));
        }
        self.scenario.array.geometry()?;
        for v in values {
            self.scenario_at(v).map_err(|e| match e {
                Error::InvalidSpec(m) => Error::Config(m),
                other => other,
            })?;
        }
        self.search_config()?;
        Ok(())
    }

    /// Scenario with the sweep axis set to `value`.
    pub fn scenario_at(&self, value: f64) -> Result<Scenario> {
        let sc = &self.scenario;
        let mut snr_db = sc.snr_db;
        let mut snapshots = sc.snapshots;
        let mut srcs = sc.sources.clone();
        match self.sweep {
            Sweep::Snapshots { .. } => snapshots = value as usize,
            Sweep::Snr { .. } => {
                snr_db = value;
                for s in &mut srcs {
                    s.power = None;
                }
            }
            Sweep::Separation { .. } => srcs[1].doa_deg = value,
            Sweep::Gamma { .. } => srcs.iter_mut().for_each(|s| s.nc_rate = value),
            Sweep::PhaseSep { .. } => srcs[1].nc_phase_deg = srcs[0].nc_phase_deg + value,
        }
        let snr_power = sc.noise_variance * 10f64.powf(snr_db / 10.0);
        let scenario = Scenario {
            geometry: sc.array.geometry()?,
            sources: srcs
                .iter()
                .map(|s| SourceSpec {
                    dist: s.dist,
                    central_doa: deg(s.doa_deg),
                    spread: deg(s.spread_deg),
                    power: s.power.unwrap_or(snr_power),
                    nc_rate: s.nc_rate,
                    nc_phase: deg(s.nc_phase_deg),
                })
                .collect(),
            noise_variance: sc.noise_variance,
            snapshots,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn search_config(&self) -> Result<SearchConfig> {
        let s = &self.search;
        let cfg = SearchConfig {
            theta_grid: Grid::new(deg(s.theta_min_deg), deg(s.theta_max_deg), deg(s.theta_step_deg)),
            sigma_grid: Grid::new(deg(s.sigma_min_deg), deg(s.sigma_max_deg), deg(s.sigma_step_deg)),
            sources: self.scenario.sources.len(),
            min_separation: deg(s.min_separation_deg),
            inner_solver: s.inner_solver,
            parallel: false,
        };
        cfg.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(cfg)
    }

    /// Re-root relative output paths under `dir`.
    pub fn with_out_dir(mut self, dir: &Path) -> Self {
        let root = |p: PathBuf| if p.is_absolute() { p } else { dir.join(p) };
        self.outputs.plot = self.outputs.plot.map(root);
        self.outputs.csv = root(self.outputs.csv);
        self
    }
}
