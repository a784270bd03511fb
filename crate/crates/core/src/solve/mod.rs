//! Energy minimization of trial circuits and the end-to-end drivers:
//! mean field, the plain ansatz post-selected over mean-field orders, the
//! extended ansatz from the vacuum and the ansatz with co-optimized
//! mean-field initialization.

mod optimize;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use optimize::{
    minimize_energy, multistart_postselect, uniform_starts, FnObjective, GradientMode, Method, MinimizeOutcome,
    MultiStartOutcome, Objective, OptimizerConfig,
};

use crate::ansatz::AnsatzSpec;
use crate::error::{Error, Result};
use crate::fermion::jordan_wigner;
use crate::hubbard::{build_hamiltonian, BreakingCombo, LatticeSpec};
use crate::meanfield::{
    build_mf_hamiltonian, gaussian_prep_program, self_consistent_loop, MeanFieldKind, MeanFieldParams, ScfOptions,
};
use crate::pauli::{QubitOperator, SparsePauliSum};
use crate::reference::{exact_ground_state, richardson_extrapolate, ObservableValues, Observables};
use crate::sim::{
    sample_pauli_expectation, Circuit, DensityMatrix, LoweredProgram, MeasuredState, NoiseModel, Program, QuantumState,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "ED")]
    Ed,
    #[serde(rename = "MF")]
    Mf,
    #[serde(rename = "VHA-PS")]
    VhaPs,
    #[serde(rename = "VEHA")]
    Veha,
    #[serde(rename = "VMFHA")]
    Vmfha,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [Algorithm::Ed, Algorithm::Mf, Algorithm::VhaPs, Algorithm::Veha, Algorithm::Vmfha];

    pub fn label(self) -> &'static str {
        match self {
            Algorithm::Ed => "ED",
            Algorithm::Mf => "MF",
            Algorithm::VhaPs => "VHA-PS",
            Algorithm::Veha => "VEHA",
            Algorithm::Vmfha => "VMFHA",
        }
    }

    fn tag(self) -> u64 {
        self as u64 + 1
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown algorithm {s:?}")))
    }
}

/// How energies are read out of a simulated state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Measurement {
    /// Exact expectation values.
    #[default]
    Exact,
    /// Each Pauli product of the Hamiltonian sampled this many times.
    Shots(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveConfig {
    pub optimizer: OptimizerConfig,
    /// Ansatz repetitions.
    pub reps: usize,
    pub noise: NoiseModel,
    pub measurement: Measurement,
    /// Optimize the extrapolated energy instead of the base-noise one.
    pub mitigate_in_loop: bool,
    pub stretches: Vec<f64>,
    pub scf: ScfOptions,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            optimizer: OptimizerConfig::default(),
            reps: 4,
            noise: NoiseModel::ideal(),
            measurement: Measurement::Exact,
            mitigate_in_loop: false,
            stretches: vec![1.0, 1.5],
            scf: ScfOptions::default(),
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        self.optimizer.validate()?;
        if self.reps == 0 {
            return Err(Error::Config("reps must be at least 1".into()));
        }
        if self.measurement == Measurement::Shots(0) {
            return Err(Error::Config("shots must be at least 1".into()));
        }
        if !(self.noise.gate_time_over_t2 >= 0.0 && self.noise.gate_time_over_t2.is_finite()) {
            return Err(Error::Config("gate_time_over_t2 must be finite and non-negative".into()));
        }
        if self.mitigate_in_loop && self.distinct_stretches() < 2 {
            return Err(Error::DegenerateStretches);
        }
        if self.stretches.iter().any(|s| !(*s > 0.0)) {
            return Err(Error::Config("stretches must be positive".into()));
        }
        Ok(())
    }

    fn distinct_stretches(&self) -> usize {
        let mut s = self.stretches.clone();
        s.sort_by(f64::total_cmp);
        s.dedup();
        s.len()
    }

    /// Quasi-Newton for exact noiseless objectives, COBYLA otherwise, unless
    /// a method is set explicitly.
    pub fn method(&self) -> Method {
        self.optimizer.method.unwrap_or(if self.is_noisy() || self.measurement != Measurement::Exact {
            Method::Cobyla
        } else {
            Method::QuasiNewton
        })
    }

    pub fn is_noisy(&self) -> bool {
        !self.noise.is_ideal()
    }

    /// Stretch factors the objective itself evaluates.
    fn loop_stretches(&self) -> Vec<f64> {
        if self.mitigate_in_loop && self.is_noisy() {
            self.stretches.clone()
        } else {
            vec![1.0]
        }
    }
}

/// The lattice Hamiltonian (with external fields) and order-parameter
/// observables in qubit form.
#[derive(Clone, Debug)]
pub struct EnergyModel {
    spec: LatticeSpec,
    hamiltonian: QubitOperator,
    compiled: SparsePauliSum,
    observables: Observables,
}

impl EnergyModel {
    pub fn new(spec: &LatticeSpec) -> Result<Self> {
        let hamiltonian = jordan_wigner(&build_hamiltonian(spec)?)?;
        Ok(Self {
            spec: *spec,
            compiled: hamiltonian.compile(),
            hamiltonian,
            observables: Observables::new(spec)?,
        })
    }

    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    pub fn hamiltonian(&self) -> &QubitOperator {
        &self.hamiltonian
    }

    pub fn energy<S: MeasuredState>(&self, state: &S) -> f64 {
        state.expectation_compiled(&self.compiled).re
    }

    pub fn measured_energy<S: MeasuredState>(&self, state: &S, measurement: Measurement, seed: u64) -> Result<f64> {
        match measurement {
            Measurement::Exact => Ok(self.energy(state)),
            Measurement::Shots(shots) => sample_pauli_expectation(state, &self.hamiltonian, shots, seed),
        }
    }

    pub fn observables<S: MeasuredState>(&self, state: &S) -> ObservableValues {
        self.observables.measure(state)
    }
}

/// SplitMix64 finalizer over a sequence of words.
fn derive_seed(base: u64, words: &[u64]) -> u64 {
    let mut z = base;
    for &w in words {
        z = z.wrapping_add(w).wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^= z >> 31;
    }
    z
}

enum Preparation {
    /// Fixed initial circuit with its output cached per loop stretch.
    Fixed {
        program: Program,
        circuit: Circuit,
        pure: Option<QuantumState>,
        mixed: Vec<DensityMatrix>,
    },
    /// Gaussian state of the mean-field Hamiltonian at the trailing
    /// parameters, rebuilt on every evaluation.
    MeanField,
}

/// A trial-state family: initial preparation followed by a parameterized
/// evolution whose angles come first in the parameter vector.
struct Trial<'a> {
    model: &'a EnergyModel,
    config: &'a SolveConfig,
    prep: Preparation,
    evolution: Program,
    lowered: LoweredProgram,
}

impl<'a> Trial<'a> {
    fn new(model: &'a EnergyModel, config: &'a SolveConfig, prep: Option<Program>, evolution: Program) -> Result<Self> {
        let lowered = evolution.lower();
        let prep = match prep {
            None => Preparation::MeanField,
            Some(program) => {
                let circuit = program.lower().bind(&[])?;
                let n = program.qubit_count();
                let (pure, mixed) = if config.is_noisy() {
                    let mixed = config
                        .loop_stretches()
                        .iter()
                        .map(|&s| {
                            let mut rho = DensityMatrix::zero(n);
                            rho.apply_circuit(&circuit, &config.noise.stretched(s)).map(|_| rho)
                        })
                        .collect::<Result<_>>()?;
                    (None, mixed)
                } else {
                    let mut psi = QuantumState::zero(n);
                    program.apply(&[], &mut psi)?;
                    (Some(psi), Vec::new())
                };
                Preparation::Fixed {
                    program,
                    circuit,
                    pure,
                    mixed,
                }
            }
        };
        Ok(Self {
            model,
            config,
            prep,
            evolution,
            lowered,
        })
    }

    fn param_count(&self) -> usize {
        self.evolution.param_count()
            + match self.prep {
                Preparation::Fixed { .. } => 0,
                Preparation::MeanField => 3,
            }
    }

    fn mean_field_params(&self, x: &[f64]) -> Result<Option<MeanFieldParams>> {
        match self.prep {
            Preparation::Fixed { .. } => Ok(None),
            Preparation::MeanField => {
                MeanFieldParams::from_slice(MeanFieldKind::Combined, &x[self.evolution.param_count()..]).map(Some)
            }
        }
    }

    fn mean_field_program(&self, params: &MeanFieldParams) -> Result<Program> {
        gaussian_prep_program(&build_mf_hamiltonian(self.model.spec(), params)?)
    }

    fn initial_pure(&self, x: &[f64]) -> Result<QuantumState> {
        match &self.prep {
            Preparation::Fixed { pure: Some(psi), .. } => Ok(psi.clone()),
            Preparation::Fixed { program, .. } => {
                let mut psi = QuantumState::zero(program.qubit_count());
                program.apply(&[], &mut psi)?;
                Ok(psi)
            }
            Preparation::MeanField => {
                let params = self.mean_field_params(x)?.expect("mean-field preparation");
                let program = self.mean_field_program(&params)?;
                let mut psi = QuantumState::zero(program.qubit_count());
                program.apply(&[], &mut psi)?;
                Ok(psi)
            }
        }
    }

    fn prep_circuit(&self, x: &[f64]) -> Result<Circuit> {
        match &self.prep {
            Preparation::Fixed { circuit, .. } => Ok(circuit.clone()),
            Preparation::MeanField => {
                let params = self.mean_field_params(x)?.expect("mean-field preparation");
                self.mean_field_program(&params)?.lower().bind(&[])
            }
        }
    }

    fn theta<'x>(&self, x: &'x [f64]) -> &'x [f64] {
        &x[..self.evolution.param_count()]
    }

    /// Full native circuit at `x`.
    fn circuit(&self, x: &[f64]) -> Result<Circuit> {
        let mut c = self.prep_circuit(x)?;
        c.extend(&self.lowered.bind(self.theta(x))?)?;
        Ok(c)
    }

    fn final_pure(&self, x: &[f64]) -> Result<QuantumState> {
        let mut psi = self.initial_pure(x)?;
        self.evolution.apply(self.theta(x), &mut psi)?;
        Ok(psi)
    }

    /// State after the circuit at `x` under the noise scaled by the
    /// `index`-th loop stretch.
    fn final_mixed(&self, x: &[f64], index: usize, stretch: f64) -> Result<DensityMatrix> {
        let noise = self.config.noise.stretched(stretch);
        let mut rho = match &self.prep {
            Preparation::Fixed { mixed, .. } if !mixed.is_empty() => mixed[index].clone(),
            _ => {
                let prep = self.prep_circuit(x)?;
                let mut rho = DensityMatrix::zero(prep.qubit_count());
                rho.apply_circuit(&prep, &noise)?;
                rho
            }
        };
        rho.apply_circuit(&self.lowered.bind(self.theta(x))?, &noise)?;
        Ok(rho)
    }

    fn evaluate(&self, x: &[f64], seed: u64) -> Result<f64> {
        let measurement = self.config.measurement;
        if !self.config.is_noisy() {
            return self.model.measured_energy(&self.final_pure(x)?, measurement, seed);
        }
        let stretches = self.config.loop_stretches();
        let mut values = Vec::with_capacity(stretches.len());
        for (k, &s) in stretches.iter().enumerate() {
            let rho = self.final_mixed(x, k, s)?;
            values.push((s, self.model.measured_energy(&rho, measurement, derive_seed(seed, &[k as u64]))?));
        }
        if values.len() == 1 {
            Ok(values[0].1)
        } else {
            richardson_extrapolate(&values)
        }
    }

    /// Exact energy and gradient with respect to the evolution angles.
    fn evaluate_gradient(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let psi = self.initial_pure(x)?;
        self.evolution.expectation_gradient(self.theta(x), &psi, &self.model.compiled)
    }

    fn objective(&self, shot_seed: u64) -> TrialObjective<'_, 'a> {
        TrialObjective {
            trial: self,
            shot_seed,
            evals: 0,
        }
    }
}

struct TrialObjective<'t, 'a> {
    trial: &'t Trial<'a>,
    shot_seed: u64,
    evals: u64,
}

impl Objective for TrialObjective<'_, '_> {
    fn value(&mut self, x: &[f64]) -> f64 {
        self.evals += 1;
        match self.trial.evaluate(x, derive_seed(self.shot_seed, &[self.evals])) {
            Ok(v) => v,
            Err(e) => {
                // Pathological mean-field points are steered away from.
                log::debug!("objective failed at {x:?}: {e}");
                f64::INFINITY
            }
        }
    }

    fn value_gradient(&mut self, x: &[f64]) -> Option<(f64, Vec<f64>)> {
        let config = self.trial.config;
        if config.is_noisy() || config.measurement != Measurement::Exact {
            return None;
        }
        self.evals += 1;
        match self.trial.evaluate_gradient(x) {
            Ok(vg) => Some(vg),
            Err(e) => {
                log::debug!("gradient failed at {x:?}: {e}");
                Some((f64::INFINITY, vec![0.0; self.trial.evolution.param_count()]))
            }
        }
    }
}

/// One post-selection candidate after its restarts.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CandidateSummary {
    pub label: String,
    pub energy: f64,
    pub restart_energies: Vec<f64>,
    pub n_evals: usize,
    pub exhausted: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunResult {
    pub algorithm: Algorithm,
    /// Winning candidate: mean-field order or breaking combination.
    pub label: String,
    /// Objective value at the selected point; equals the minimum of
    /// `restart_energies`.
    pub energy: f64,
    pub parameters: Vec<f64>,
    /// Mean fields of the initial state, if it has one.
    pub mf_params: Option<MeanFieldParams>,
    pub m_af: f64,
    pub delta_s: f64,
    pub n_evals: usize,
    /// Best value of every restart of every candidate, candidates in order.
    pub restart_energies: Vec<f64>,
    /// Index into `restart_energies`.
    pub selected_restart: usize,
    pub gate_count: usize,
    pub circuit_duration: f64,
    pub circuit: Circuit,
    /// Some restart ran out of evaluations.
    pub exhausted: bool,
    pub candidates: Vec<CandidateSummary>,
}

struct Candidate<'a> {
    label: String,
    trial: Trial<'a>,
    outcome: MultiStartOutcome,
    /// Mean fields of a fixed preparation.
    fixed_mf: Option<MeanFieldParams>,
}

fn optimize_trial<'a>(
    trial: &Trial<'a>,
    starts: &[Vec<f64>],
    bounds: &[(f64, f64)],
    seed: u64,
) -> Result<MultiStartOutcome> {
    let config = trial.config;
    multistart_postselect(
        |k| Ok(trial.objective(derive_seed(seed, &[0x5407, k as u64]))),
        starts,
        bounds,
        config.method(),
        &config.optimizer,
    )
}

/// Keeps the lowest candidate (first on ties) and reports its observables.
fn postselect(algorithm: Algorithm, candidates: Vec<Candidate<'_>>) -> Result<RunResult> {
    let mut selected = 0;
    for (k, c) in candidates.iter().enumerate() {
        if c.outcome.best.value < candidates[selected].outcome.best.value {
            selected = k;
        }
    }
    let offset: usize = candidates[..selected].iter().map(|c| c.outcome.restart_values.len()).sum();
    let winner = &candidates[selected];
    let x = &winner.outcome.best.x;
    let trial = &winner.trial;
    let circuit = trial.circuit(x)?;
    let obs = if trial.config.is_noisy() {
        trial.model.observables(&trial.final_mixed(x, 0, 1.0)?)
    } else {
        trial.model.observables(&trial.final_pure(x)?)
    };
    let mf_params = match winner.fixed_mf {
        Some(p) => Some(p),
        None => trial.mean_field_params(x)?,
    };
    Ok(RunResult {
        algorithm,
        label: winner.label.clone(),
        energy: winner.outcome.best.value,
        parameters: x.clone(),
        mf_params,
        m_af: obs.m_af,
        delta_s: obs.delta_s,
        n_evals: candidates.iter().map(|c| c.outcome.n_evals).sum(),
        restart_energies: candidates.iter().flat_map(|c| c.outcome.restart_values.iter().copied()).collect(),
        selected_restart: offset + winner.outcome.selected_restart,
        gate_count: circuit.len(),
        circuit_duration: circuit.total_duration(),
        circuit,
        exhausted: candidates.iter().any(|c| c.outcome.any_exhausted),
        candidates: candidates
            .iter()
            .map(|c| CandidateSummary {
                label: c.label.clone(),
                energy: c.outcome.best.value,
                restart_energies: c.outcome.restart_values.clone(),
                n_evals: c.outcome.n_evals,
                exhausted: c.outcome.any_exhausted,
            })
            .collect(),
    })
}

/// Self-consistent mean fields of both orders; orders that fail to
/// converge are skipped with a warning.
fn converged_orders(spec: &LatticeSpec, config: &SolveConfig) -> Result<Vec<MeanFieldParams>> {
    let guesses = [MeanFieldParams::bcs(spec.u.abs().max(0.5)), MeanFieldParams::af(0.9, 0.1)];
    let mut found = Vec::new();
    let mut failures = Vec::new();
    for guess in guesses {
        match self_consistent_loop(spec, guess, &config.scf) {
            Ok(r) => found.push(r.params),
            Err(e) => {
                log::warn!("{} self-consistency failed at U = {}: {e}", guess.kind.label(), spec.u);
                failures.push(format!("{}: {e}", guess.kind.label()));
            }
        }
    }
    if found.is_empty() {
        return Err(Error::AllOrdersFailed(failures.join("; ")));
    }
    Ok(found)
}

fn prep_of(spec: &LatticeSpec, params: &MeanFieldParams) -> Result<Program> {
    gaussian_prep_program(&build_mf_hamiltonian(spec, params)?)
}

fn angle_bounds(count: usize) -> Vec<(f64, f64)> {
    vec![(-PI, PI); count]
}

/// Random angle vectors from the start box, which is narrower than the
/// bounds: starts spread over the full period land in poor basins far more
/// often.
fn angle_starts(count: usize, restarts: usize, optimizer: &OptimizerConfig, seed: u64) -> Vec<Vec<f64>> {
    let r = optimizer.start_angle_range.min(PI);
    uniform_starts(&vec![(-r, r); count], restarts, seed)
}

fn single_point(value: f64, x: Vec<f64>) -> MultiStartOutcome {
    MultiStartOutcome {
        best: MinimizeOutcome {
            x,
            value,
            n_evals: 1,
            exhausted: false,
        },
        selected_restart: 0,
        restart_values: vec![value],
        n_evals: 1,
        any_exhausted: false,
    }
}

/// Self-consistent mean field of each order; the energy is that of the
/// full lattice Hamiltonian in the prepared Gaussian state.
pub fn run_mf(spec: &LatticeSpec, config: &SolveConfig) -> Result<RunResult> {
    config.validate()?;
    let model = EnergyModel::new(spec)?;
    let mut candidates = Vec::new();
    for params in converged_orders(spec, config)? {
        let evolution = Program::new(spec.mode_count(), 0);
        let trial = Trial::new(&model, config, Some(prep_of(spec, &params)?), evolution)?;
        let seed = derive_seed(config.optimizer.seed, &[Algorithm::Mf.tag(), params.kind as u64]);
        let value = trial.evaluate(&[], seed)?;
        candidates.push(Candidate {
            label: params.kind.label().to_string(),
            trial,
            outcome: single_point(value, Vec::new()),
            fixed_mf: Some(params),
        });
    }
    postselect(Algorithm::Mf, candidates)
}

/// Plain ansatz from each converged mean-field state, post-selected.
/// Restart 0 starts at zero angles, i.e. at the mean-field state.
pub fn run_vha_ps(spec: &LatticeSpec, config: &SolveConfig) -> Result<RunResult> {
    config.validate()?;
    let model = EnergyModel::new(spec)?;
    let mut candidates = Vec::new();
    for params in converged_orders(spec, config)? {
        let ansatz = AnsatzSpec::vha(spec, config.reps, params.kind)?;
        let trial = Trial::new(&model, config, Some(prep_of(spec, &params)?), ansatz.evolution_program()?)?;
        let n = trial.param_count();
        let bounds = angle_bounds(n);
        let seed = derive_seed(config.optimizer.seed, &[Algorithm::VhaPs.tag(), params.kind as u64]);
        let mut starts = vec![vec![0.0; n]];
        starts.extend(angle_starts(n, config.optimizer.restarts - 1, &config.optimizer, seed));
        let outcome = optimize_trial(&trial, &starts, &bounds, seed)?;
        candidates.push(Candidate {
            label: params.kind.label().to_string(),
            trial,
            outcome,
            fixed_mf: Some(params),
        });
    }
    postselect(Algorithm::VhaPs, candidates)
}

/// Extended ansatz from the vacuum for every breaking combination.
/// Zero angles are a stationary point there, so all starts are random.
pub fn run_veha(spec: &LatticeSpec, config: &SolveConfig) -> Result<RunResult> {
    config.validate()?;
    let model = EnergyModel::new(spec)?;
    let mut candidates = Vec::new();
    for combo in BreakingCombo::ALL {
        let ansatz = AnsatzSpec::veha(spec, config.reps, combo)?;
        let vacuum = Program::new(spec.mode_count(), 0);
        let trial = Trial::new(&model, config, Some(vacuum), ansatz.evolution_program()?)?;
        let bounds = angle_bounds(trial.param_count());
        let seed = derive_seed(config.optimizer.seed, &[Algorithm::Veha.tag(), combo as u64]);
        let starts = angle_starts(trial.param_count(), config.optimizer.restarts, &config.optimizer, seed);
        let outcome = optimize_trial(&trial, &starts, &bounds, seed)?;
        candidates.push(Candidate {
            label: combo.label().to_string(),
            trial,
            outcome,
            fixed_mf: None,
        });
    }
    postselect(Algorithm::Veha, candidates)
}

/// Ansatz angles and mean-field initialization `(delta_s, n_minus,
/// n_plus)` optimized jointly.
///
/// Restart 0 starts from `warm` (a plain-ansatz result, whose state lies in
/// this family) or, without one, from the lower self-consistent mean field
/// at zero angles. The remaining starts are random.
pub fn run_vmfha(spec: &LatticeSpec, config: &SolveConfig, warm: Option<&RunResult>) -> Result<RunResult> {
    config.validate()?;
    let model = EnergyModel::new(spec)?;
    let ansatz = AnsatzSpec::vmfha(spec, config.reps)?;
    let trial = Trial::new(&model, config, None, ansatz.evolution_program()?)?;
    let n_theta = ansatz.evolution_param_count();
    let bounds = vmfha_bounds(spec, n_theta);

    let first = match warm {
        Some(w) if w.parameters.len() == n_theta && w.mf_params.is_some() => {
            let mut x = w.parameters.clone();
            x.extend(w.mf_params.expect("checked").as_combined().to_vec());
            x
        }
        Some(w) => {
            return Err(Error::Config(format!(
                "warm start from {} has {} parameters, expected {n_theta} plus mean fields",
                w.algorithm,
                w.parameters.len()
            )))
        }
        None => {
            let mf = run_mf(spec, &SolveConfig { noise: NoiseModel::ideal(), measurement: Measurement::Exact, ..config.clone() })?;
            let mut x = vec![0.0; n_theta];
            x.extend(mf.mf_params.expect("mean-field result").as_combined().to_vec());
            x
        }
    };
    let seed = derive_seed(config.optimizer.seed, &[Algorithm::Vmfha.tag()]);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut starts = vec![first];
    for _ in 1..config.optimizer.restarts {
        let r = config.optimizer.start_angle_range.min(PI);
        let mut x: Vec<f64> = (0..n_theta).map(|_| rng.random_range(-r..r)).collect();
        x.push(rng.random_range(0.0..spec.u.abs() + 0.5));
        x.push(rng.random_range(0.0..1.0));
        x.push(rng.random_range(0.0..1.0));
        starts.push(x);
    }
    let outcome = optimize_trial(&trial, &starts, &bounds, seed)?;
    postselect(
        Algorithm::Vmfha,
        vec![Candidate {
            label: MeanFieldKind::Combined.label().to_string(),
            trial,
            outcome,
            fixed_mf: None,
        }],
    )
}

fn vmfha_bounds(spec: &LatticeSpec, n_theta: usize) -> Vec<(f64, f64)> {
    let amplitude = spec.u.abs() + 1.0;
    let mut bounds = angle_bounds(n_theta);
    bounds.extend([(-amplitude, amplitude), (0.0, 1.0), (0.0, 1.0)]);
    bounds
}

/// Re-optimizes the winning candidate of `previous` under `config`,
/// starting from its parameters with a single start. Used to carry a
/// noiseless optimum into noisy objectives.
pub fn refine(previous: &RunResult, spec: &LatticeSpec, config: &SolveConfig) -> Result<RunResult> {
    config.validate()?;
    let model = EnergyModel::new(spec)?;
    let config = &SolveConfig {
        optimizer: OptimizerConfig {
            restarts: 1,
            ..config.optimizer.clone()
        },
        ..config.clone()
    };
    let missing = || Error::Config(format!("{} result lacks its mean fields", previous.algorithm));
    let seed = derive_seed(config.optimizer.seed, &[previous.algorithm.tag(), 0x4ef1]);
    let start = vec![previous.parameters.clone()];
    let (trial, fixed_mf, bounds) = match previous.algorithm {
        Algorithm::Ed => return run_ed(spec),
        Algorithm::Mf => {
            let params = previous.mf_params.ok_or_else(missing)?;
            let trial = Trial::new(&model, config, Some(prep_of(spec, &params)?), Program::new(spec.mode_count(), 0))?;
            let value = trial.evaluate(&[], seed)?;
            let candidate = Candidate {
                label: previous.label.clone(),
                trial,
                outcome: single_point(value, Vec::new()),
                fixed_mf: Some(params),
            };
            return postselect(Algorithm::Mf, vec![candidate]);
        }
        Algorithm::VhaPs => {
            let params = previous.mf_params.ok_or_else(missing)?;
            let ansatz = AnsatzSpec::vha(spec, config.reps, params.kind)?;
            let trial = Trial::new(&model, config, Some(prep_of(spec, &params)?), ansatz.evolution_program()?)?;
            let bounds = angle_bounds(trial.param_count());
            (trial, Some(params), bounds)
        }
        Algorithm::Veha => {
            let combo = BreakingCombo::ALL
                .into_iter()
                .find(|c| c.label() == previous.label)
                .ok_or_else(|| Error::Config(format!("unknown breaking combination {:?}", previous.label)))?;
            let ansatz = AnsatzSpec::veha(spec, config.reps, combo)?;
            let vacuum = Program::new(spec.mode_count(), 0);
            let trial = Trial::new(&model, config, Some(vacuum), ansatz.evolution_program()?)?;
            let bounds = angle_bounds(trial.param_count());
            (trial, None, bounds)
        }
        Algorithm::Vmfha => {
            let ansatz = AnsatzSpec::vmfha(spec, config.reps)?;
            let trial = Trial::new(&model, config, None, ansatz.evolution_program()?)?;
            let bounds = vmfha_bounds(spec, ansatz.evolution_param_count());
            (trial, None, bounds)
        }
    };
    if previous.parameters.len() != trial.param_count() {
        return Err(Error::ParameterCount {
            expected: trial.param_count(),
            got: previous.parameters.len(),
        });
    }
    let outcome = optimize_trial(&trial, &start, &bounds, seed)?;
    postselect(
        previous.algorithm,
        vec![Candidate {
            label: previous.label.clone(),
            trial,
            outcome,
            fixed_mf,
        }],
    )
}

/// Exact ground state in the same result shape; it has no circuit.
pub fn run_ed(spec: &LatticeSpec) -> Result<RunResult> {
    let ed = exact_ground_state(spec)?;
    Ok(RunResult {
        algorithm: Algorithm::Ed,
        label: String::new(),
        energy: ed.energy,
        parameters: Vec::new(),
        mf_params: None,
        m_af: ed.m_af,
        delta_s: ed.delta_s,
        n_evals: 0,
        restart_energies: vec![ed.energy],
        selected_restart: 0,
        gate_count: 0,
        circuit_duration: 0.0,
        circuit: Circuit::new(spec.mode_count()),
        exhausted: false,
        candidates: Vec::new(),
    })
}

/// Dispatches to the driver of `algorithm`. `warm` is only read by the
/// mean-field ansatz.
pub fn run_algorithm(algorithm: Algorithm, spec: &LatticeSpec, config: &SolveConfig, warm: Option<&RunResult>) -> Result<RunResult> {
    match algorithm {
        Algorithm::Ed => run_ed(spec),
        Algorithm::Mf => run_mf(spec, config),
        Algorithm::VhaPs => run_vha_ps(spec, config),
        Algorithm::Veha => run_veha(spec, config),
        Algorithm::Vmfha => run_vmfha(spec, config, warm),
    }
}

#[cfg(test)]
mod tests;
