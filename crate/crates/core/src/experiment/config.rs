//! Sweep configuration: a TOML file with strict key checking. Every field
//! has a default, so an empty file describes the standard protocol.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::hubbard::{FieldSchedule, LatticeSpec};
use crate::meanfield::ScfOptions;
use crate::sim::NoiseModel;
use crate::solve::{Algorithm, GradientMode, Measurement, Method, OptimizerConfig, SolveConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LatticeConfig {
    pub nx: usize,
    pub ny: usize,
    pub t: f64,
    pub periodic: bool,
}

impl Default for LatticeConfig {
    fn default() -> Self {
        Self {
            nx: 3,
            ny: 2,
            t: -1.0,
            periodic: true,
        }
    }
}

impl LatticeConfig {
    pub fn plaquette() -> Self {
        Self {
            nx: 2,
            ny: 2,
            ..Self::default()
        }
    }

    /// Lattice at interaction `u` with fields from `schedule`.
    pub fn spec(&self, u: f64, schedule: FieldSchedule) -> LatticeSpec {
        let mut spec = LatticeSpec::new(self.nx, self.ny, self.t, u);
        if !self.periodic {
            spec = spec.open();
        }
        spec.with_schedule(schedule)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerSection {
    /// `quasi-newton` or `cobyla`; unset picks by objective.
    pub method: Option<Method>,
    pub gradient: GradientMode,
    pub restarts: usize,
    pub seed: u64,
    pub max_evals: usize,
    pub fd_step: f64,
    pub cobyla_rho_begin: f64,
    pub cobyla_rho_end: f64,
    /// Half-width of the box random restarts draw ansatz angles from.
    pub start_angle_range: f64,
}

impl Default for OptimizerSection {
    fn default() -> Self {
        let d = OptimizerConfig::default();
        Self {
            method: d.method,
            gradient: d.gradient,
            restarts: d.restarts,
            seed: d.seed,
            max_evals: d.max_evals,
            fd_step: d.fd_step,
            cobyla_rho_begin: d.cobyla_rho_begin,
            cobyla_rho_end: d.cobyla_rho_end,
            start_angle_range: d.start_angle_range,
        }
    }
}

impl OptimizerSection {
    pub fn to_optimizer(&self) -> OptimizerConfig {
        OptimizerConfig {
            method: self.method,
            gradient: self.gradient,
            restarts: self.restarts,
            seed: self.seed,
            max_evals: self.max_evals,
            fd_step: self.fd_step,
            cobyla_rho_begin: self.cobyla_rho_begin,
            cobyla_rho_end: self.cobyla_rho_end,
            start_angle_range: self.start_angle_range,
            ..OptimizerConfig::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseSection {
    /// Interaction of the noise sweep.
    pub u: f64,
    pub lattice: LatticeConfig,
    pub gate_time_over_t2: Vec<f64>,
    pub idle_dephasing: bool,
    pub stretches: Vec<f64>,
    pub mitigate_in_loop: bool,
    /// Optimizer used at every grid point of the noise sweep.
    pub method: Method,
    /// Start each noisy optimization from the noiseless optimum with a
    /// single start instead of a full multi-start.
    pub warm_start: bool,
    /// Evaluation budget of each noisy optimization.
    pub max_evals: usize,
}

impl Default for NoiseSection {
    fn default() -> Self {
        Self {
            u: -3.0,
            lattice: LatticeConfig::plaquette(),
            gate_time_over_t2: vec![0.0, 1e-5, 2e-5, 4e-5, 7e-5, 1e-4],
            idle_dephasing: false,
            stretches: vec![1.0, 1.5],
            mitigate_in_loop: false,
            method: Method::Cobyla,
            warm_start: true,
            max_evals: 600,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum MeasurementMode {
    #[default]
    Exact,
    Shots,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeasurementSection {
    pub mode: MeasurementMode,
    /// Samples per Pauli product in `shots` mode.
    pub shots: usize,
}

impl Default for MeasurementSection {
    fn default() -> Self {
        Self {
            mode: MeasurementMode::Exact,
            shots: 25_000,
        }
    }
}

impl MeasurementSection {
    pub fn to_measurement(&self) -> Measurement {
        match self.mode {
            MeasurementMode::Exact => Measurement::Exact,
            MeasurementMode::Shots => Measurement::Shots(self.shots),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub lattice: LatticeConfig,
    pub u_grid: Vec<f64>,
    pub algorithms: Vec<Algorithm>,
    pub reps: usize,
    pub field_schedule: FieldSchedule,
    pub optimizer: OptimizerSection,
    pub noise: NoiseSection,
    pub measurement: MeasurementSection,
    pub output: String,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            lattice: LatticeConfig::default(),
            u_grid: (0..17).map(|k| -4.0 + 0.5 * k as f64).collect(),
            algorithms: Algorithm::ALL.to_vec(),
            reps: 4,
            field_schedule: FieldSchedule::Abs,
            optimizer: OptimizerSection::default(),
            noise: NoiseSection::default(),
            measurement: MeasurementSection::default(),
            output: "results".into(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.u_grid.is_empty() {
            return Err(Error::Config("u_grid must not be empty".into()));
        }
        if self.u_grid.iter().chain([&self.noise.u]).any(|u| !u.is_finite()) {
            return Err(Error::Config("interaction values must be finite".into()));
        }
        if self.algorithms.is_empty() {
            return Err(Error::Config("no algorithms selected".into()));
        }
        if self.noise.gate_time_over_t2.is_empty() {
            return Err(Error::Config("noise grid must not be empty".into()));
        }
        if self.measurement.mode == MeasurementMode::Shots && self.measurement.shots == 0 {
            return Err(Error::Config("shots must be at least 1".into()));
        }
        if self.noise.max_evals == 0 {
            return Err(Error::Config("noise.max_evals must be at least 1".into()));
        }
        for lattice in [&self.lattice, &self.noise.lattice] {
            lattice.spec(0.0, self.field_schedule).validate()?;
        }
        self.solve_config().validate()?;
        Ok(())
    }

    /// Noiseless solver settings of the interaction sweep.
    pub fn solve_config(&self) -> SolveConfig {
        SolveConfig {
            optimizer: self.optimizer.to_optimizer(),
            reps: self.reps,
            noise: NoiseModel::ideal(),
            measurement: self.measurement.to_measurement(),
            mitigate_in_loop: self.noise.mitigate_in_loop,
            stretches: self.noise.stretches.clone(),
            scf: ScfOptions::default(),
        }
    }

    /// Solver settings at one point of the noise grid.
    pub fn noisy_solve_config(&self, gate_time_over_t2: f64) -> SolveConfig {
        let mut config = self.solve_config();
        config.noise = NoiseModel {
            idle_dephasing: self.noise.idle_dephasing,
            ..NoiseModel::new(gate_time_over_t2)
        };
        config.optimizer.method = Some(self.noise.method);
        config.optimizer.max_evals = self.noise.max_evals;
        config
    }

    /// First 16 hex digits of the SHA-256 of the canonical serialization.
    pub fn hash(&self) -> Result<String> {
        let digest = Sha256::digest(self.to_toml()?.as_bytes());
        Ok(digest.iter().take(8).map(|b| format!("{b:02x}")).collect())
    }
}
