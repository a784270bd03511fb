//! Parameter sweeps over the interaction and the dephasing rate, their CSV
//! tables and SVG figures.

pub mod config;
pub mod plot;
pub mod selftest;
mod table;

use rayon::prelude::*;

pub use config::{ExperimentConfig, LatticeConfig, MeasurementMode, NoiseSection};
pub use table::{Row, SweepTable};

use crate::error::Result;
use crate::hubbard::LatticeSpec;
use crate::reference::mitigate;
use crate::solve::{refine, run_algorithm, run_ed, Algorithm, Measurement, RunResult, SolveConfig};

/// Version tag written into every row.
pub const VERSION: &str = concat!("v", env!("CARGO_PKG_VERSION"));

/// A finished sweep. Failed runs appear as rows with a non-empty error.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepOutcome {
    pub table: SweepTable,
    pub failures: usize,
}

impl SweepOutcome {
    fn from_rows(rows: Vec<Row>) -> Self {
        let failures = rows.iter().filter(|r| !r.error.is_empty()).count();
        Self {
            table: SweepTable { rows },
            failures,
        }
    }
}

/// Shared per-row metadata.
struct Stamp {
    hash: String,
    seed: u64,
    shots: usize,
}

impl Stamp {
    fn new(config: &ExperimentConfig) -> Result<Self> {
        let shots = match config.measurement.to_measurement() {
            Measurement::Exact => 0,
            Measurement::Shots(n) => n,
        };
        Ok(Self {
            hash: config.hash()?,
            seed: config.optimizer.seed,
            shots,
        })
    }

    fn row(&self, u: f64, algorithm: Algorithm, ed_energy: f64, gate_time_over_t2: f64) -> Row {
        Row {
            u,
            algorithm: algorithm.label().to_string(),
            energy: None,
            ed_energy,
            rel_err: None,
            m_af: None,
            delta_s: None,
            gate_time_over_t2,
            mitigated: false,
            shots: self.shots,
            seed: self.seed,
            restart_index: None,
            gate_count: None,
            circuit_duration: None,
            n_evals: None,
            error: String::new(),
            restart_energies: String::new(),
            config_hash: self.hash.clone(),
            version: VERSION.to_string(),
        }
    }

    fn result_row(&self, u: f64, gate_time_over_t2: f64, ed_energy: f64, result: &RunResult) -> Row {
        let energies: Vec<String> = result.restart_energies.iter().map(|e| e.to_string()).collect();
        Row {
            energy: Some(result.energy),
            rel_err: Some(relative_error(result.energy, ed_energy)),
            m_af: Some(result.m_af),
            delta_s: Some(result.delta_s),
            restart_index: (result.algorithm != Algorithm::Ed).then_some(result.selected_restart),
            gate_count: Some(result.gate_count),
            circuit_duration: Some(result.circuit_duration),
            n_evals: Some(result.n_evals),
            restart_energies: energies.join(";"),
            ..self.row(u, result.algorithm, ed_energy, gate_time_over_t2)
        }
    }

    fn failed_row(&self, u: f64, algorithm: Algorithm, ed_energy: f64, gate_time_over_t2: f64, err: &crate::Error) -> Row {
        log::warn!("{algorithm} at U = {u}, gate time / T2 = {gate_time_over_t2} failed: {err}");
        Row {
            error: err.to_string(),
            ..self.row(u, algorithm, ed_energy, gate_time_over_t2)
        }
    }
}

pub fn relative_error(energy: f64, reference: f64) -> f64 {
    (energy - reference).abs() / reference.abs()
}

/// Order in which algorithms are run and tabulated at each point.
fn ordered(algorithms: &[Algorithm]) -> Vec<Algorithm> {
    Algorithm::ALL.into_iter().filter(|a| algorithms.contains(a)).collect()
}

/// All selected algorithms at one interaction. The mixed ansatz starts
/// from the plain optimum when both are selected.
fn sweep_point(spec: &LatticeSpec, algorithms: &[Algorithm], solve: &SolveConfig, stamp: &Stamp) -> Result<Vec<Row>> {
    let u = spec.u;
    let ed = run_ed(spec)?;
    let mut rows = Vec::new();
    let mut plain = None;
    for algorithm in ordered(algorithms) {
        let warm = if algorithm == Algorithm::Vmfha { plain.as_ref() } else { None };
        match run_algorithm(algorithm, spec, solve, warm) {
            Ok(result) => {
                rows.push(stamp.result_row(u, 0.0, ed.energy, &result));
                if algorithm == Algorithm::VhaPs {
                    plain = Some(result);
                }
            }
            Err(err) => rows.push(stamp.failed_row(u, algorithm, ed.energy, 0.0, &err)),
        }
    }
    Ok(rows)
}

/// Noiseless sweep of every selected algorithm over the interaction grid.
pub fn run_u_sweep(config: &ExperimentConfig) -> Result<SweepOutcome> {
    config.validate()?;
    let stamp = Stamp::new(config)?;
    let solve = config.solve_config();
    let points: Vec<Vec<Row>> = config
        .u_grid
        .par_iter()
        .map(|&u| sweep_point(&config.lattice.spec(u, config.field_schedule), &config.algorithms, &solve, &stamp))
        .collect::<Result<_>>()?;
    Ok(SweepOutcome::from_rows(points.into_iter().flatten().collect()))
}

/// Raw and mitigated rows of one algorithm at one noise level.
fn noise_point(
    config: &ExperimentConfig,
    spec: &LatticeSpec,
    clean: &RunResult,
    gate_time_over_t2: f64,
    ed_energy: f64,
    stamp: &Stamp,
) -> Vec<Row> {
    let solve = config.noisy_solve_config(gate_time_over_t2);
    let result = if config.noise.warm_start {
        refine(clean, spec, &solve)
    } else {
        run_algorithm(clean.algorithm, spec, &solve, None)
    };
    let u = spec.u;
    let outcome = result.and_then(|raw| {
        let mitigated = mitigate(&raw, spec, &solve.noise, &solve.stretches)?;
        Ok((raw, mitigated))
    });
    match outcome {
        Ok((raw, mitigated)) => {
            let raw_row = stamp.result_row(u, gate_time_over_t2, ed_energy, &raw);
            let mitigated_row = Row {
                energy: Some(mitigated.energy),
                rel_err: Some(relative_error(mitigated.energy, ed_energy)),
                m_af: Some(mitigated.m_af),
                delta_s: Some(mitigated.delta_s),
                mitigated: true,
                ..raw_row.clone()
            };
            vec![raw_row, mitigated_row]
        }
        Err(err) => vec![stamp.failed_row(u, clean.algorithm, ed_energy, gate_time_over_t2, &err)],
    }
}

/// Sweep over the dephasing rate at the fixed interaction of the noise
/// section. Each algorithm is optimized once without noise; every noisy
/// point then re-optimizes from that optimum (or from scratch when warm
/// starts are off) with the derivative-free method.
pub fn run_noise_sweep(config: &ExperimentConfig) -> Result<SweepOutcome> {
    config.validate()?;
    let stamp = Stamp::new(config)?;
    let spec = config.noise.lattice.spec(config.noise.u, config.field_schedule);
    let ed = run_ed(&spec)?;
    let grid = &config.noise.gate_time_over_t2;
    let mut rows = Vec::new();
    let mut plain = None;
    for algorithm in ordered(&config.algorithms) {
        if algorithm == Algorithm::Ed {
            rows.extend(grid.iter().map(|&g| stamp.result_row(spec.u, g, ed.energy, &ed)));
            continue;
        }
        let warm = if algorithm == Algorithm::Vmfha { plain.as_ref() } else { None };
        let clean = match run_algorithm(algorithm, &spec, &config.solve_config(), warm) {
            Ok(clean) => clean,
            Err(err) => {
                rows.extend(grid.iter().map(|&g| stamp.failed_row(spec.u, algorithm, ed.energy, g, &err)));
                continue;
            }
        };
        let points: Vec<Vec<Row>> = grid
            .par_iter()
            .map(|&g| noise_point(config, &spec, &clean, g, ed.energy, &stamp))
            .collect();
        rows.extend(points.into_iter().flatten());
        if algorithm == Algorithm::VhaPs {
            plain = Some(clean);
        }
    }
    Ok(SweepOutcome::from_rows(rows))
}
