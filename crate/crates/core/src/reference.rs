//! Exact diagonalization, order-parameter reporting and zero-noise
//! extrapolation.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fermion::jordan_wigner;
use crate::hubbard::{build_hamiltonian, order_parameter_observables, LatticeSpec, Spin};
use crate::pauli::{SparsePauliSum, DENSE_LIMIT};
use crate::sim::{DensityMatrix, MeasuredState, NoiseModel, QuantumState};
use crate::solve::{run_algorithm, Algorithm, EnergyModel, RunResult, SolveConfig};

/// Eigenvalues closer than this to the minimum count towards the degeneracy.
pub const DEGENERACY_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct EdResult {
    pub energy: f64,
    pub state: QuantumState,
    pub m_af: f64,
    pub delta_s: f64,
    /// Multiplicity of the lowest eigenvalue over all sectors.
    pub degeneracy: usize,
    /// `|H psi - E psi|`.
    pub residual: f64,
}

/// Lowest eigenpair of the lattice Hamiltonian over the full Fock space.
///
/// The Hamiltonian conserves `S_z` for every field choice, so each `S_z`
/// block is diagonalized separately. Among degenerate minima the one in the
/// sector of smallest `|S_z|` (then smallest index) is returned.
pub fn exact_ground_state(spec: &LatticeSpec) -> Result<EdResult> {
    spec.validate()?;
    let m = spec.mode_count();
    if m > DENSE_LIMIT {
        return Err(Error::TooLarge { count: m, limit: DENSE_LIMIT });
    }
    let h = jordan_wigner(&build_hamiltonian(spec)?)?;
    let up_mask: u64 = (0..spec.site_count()).map(|s| 1u64 << spec.mode(s, Spin::Up)).sum();
    let dim = 1usize << m;
    let sz = |x: usize| (x as u64 & up_mask).count_ones() as i64 - (x as u64 & !up_mask).count_ones() as i64;
    let mut sectors: Vec<i64> = (0..dim).map(sz).collect();
    sectors.sort_unstable_by_key(|&s| (s.abs(), s));
    sectors.dedup();

    let mut lowest: Vec<f64> = Vec::new();
    let mut best: Option<(f64, Vec<Complex64>)> = None;
    let terms: Vec<_> = h.terms().map(|(p, c)| (*p, *c)).collect();
    for s in sectors {
        let basis: Vec<usize> = (0..dim).filter(|&x| sz(x) == s).collect();
        let mut index = vec![usize::MAX; dim];
        for (k, &x) in basis.iter().enumerate() {
            index[x] = k;
        }
        let n = basis.len();
        let mut block = DMatrix::<Complex64>::zeros(n, n);
        for (col, &x) in basis.iter().enumerate() {
            for (p, c) in &terms {
                let (y, phase) = p.apply_to_basis(x as u64);
                // Single Pauli products may leave the sector; their sum does not.
                let row = index[y as usize];
                if row != usize::MAX {
                    block[(row, col)] += c * phase;
                }
            }
        }
        let real = block.iter().all(|z| z.im.abs() < 1e-14);
        let (values, vector) = if real {
            let eig = block.map(|z| z.re).symmetric_eigen();
            let k = eig.eigenvalues.imin();
            (eig.eigenvalues.as_slice().to_vec(), eig.eigenvectors.column(k).map(|v| Complex64::new(v, 0.0)))
        } else {
            let eig = block.symmetric_eigen();
            let k = eig.eigenvalues.imin();
            (eig.eigenvalues.as_slice().to_vec(), eig.eigenvectors.column(k).into_owned())
        };
        let e = values.iter().copied().fold(f64::INFINITY, f64::min);
        lowest.extend(values);
        if best.as_ref().is_none_or(|(b, _)| e < *b - DEGENERACY_TOL) {
            let mut amps = vec![Complex64::new(0.0, 0.0); dim];
            for (k, &x) in basis.iter().enumerate() {
                amps[x] = vector[k];
            }
            best = Some((e, amps));
        }
    }
    let (_, amps) = best.expect("at least one sector");
    let energy = lowest.iter().copied().fold(f64::INFINITY, f64::min);
    let degeneracy = lowest.iter().filter(|&&v| v - energy < DEGENERACY_TOL).count();
    let state = QuantumState::from_amplitudes(amps)?;
    let compiled = h.compile();
    let mut hpsi = vec![Complex64::new(0.0, 0.0); dim];
    compiled.apply(state.amplitudes(), &mut hpsi);
    let residual = DVector::from_vec(hpsi.iter().zip(state.amplitudes()).map(|(a, b)| a - b * energy).collect::<Vec<_>>()).norm();
    if residual > 1e-9 {
        return Err(Error::NoConvergence { iterations: 1, residual });
    }
    if degeneracy > 1 {
        log::warn!("ground state of {spec:?} is {degeneracy}-fold degenerate");
    }
    let obs = Observables::new(spec)?.measure(&state);
    Ok(EdResult {
        energy,
        state,
        m_af: obs.m_af,
        delta_s: obs.delta_s,
        degeneracy,
        residual,
    })
}

/// Signed order parameters of a state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ObservableValues {
    pub m_af: f64,
    pub delta_s: f64,
    /// Imaginary part of the pairing expectation, kept as a diagnostic.
    pub delta_s_imag: f64,
}

/// Compiled order-parameter operators for one lattice.
#[derive(Clone, Debug)]
pub struct Observables {
    m_af: SparsePauliSum,
    delta_s: SparsePauliSum,
}

impl Observables {
    pub fn new(spec: &LatticeSpec) -> Result<Self> {
        let (m_af, delta_s) = order_parameter_observables(spec)?;
        Ok(Self {
            m_af: jordan_wigner(&m_af)?.compile(),
            delta_s: jordan_wigner(&delta_s)?.compile(),
        })
    }

    pub fn measure<S: MeasuredState>(&self, state: &S) -> ObservableValues {
        let d = state.expectation_compiled(&self.delta_s);
        if d.im.abs() > 1e-6 {
            log::debug!("pairing expectation has imaginary part {:.3e}", d.im);
        }
        ObservableValues {
            m_af: state.expectation_compiled(&self.m_af).re,
            delta_s: d.re,
            delta_s_imag: d.im,
        }
    }
}

/// `report_observables` for a single evaluation.
pub fn report_observables<S: MeasuredState>(state: &S, spec: &LatticeSpec) -> Result<ObservableValues> {
    Ok(Observables::new(spec)?.measure(state))
}

/// Intercept of the least-squares line through `(stretch, value)` pairs.
pub fn richardson_extrapolate(values: &[(f64, f64)]) -> Result<f64> {
    if values.len() < 2 {
        return Err(Error::DegenerateStretches);
    }
    let n = values.len() as f64;
    let mx = values.iter().map(|v| v.0).sum::<f64>() / n;
    let my = values.iter().map(|v| v.1).sum::<f64>() / n;
    let sxx: f64 = values.iter().map(|v| (v.0 - mx).powi(2)).sum();
    if sxx <= 1e-24 * (1.0 + mx * mx) {
        return Err(Error::DegenerateStretches);
    }
    let sxy: f64 = values.iter().map(|v| (v.0 - mx) * (v.1 - my)).sum();
    Ok(my - sxy / sxx * mx)
}

/// Energy and observables of a finished run re-simulated at one stretch.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StretchedValues {
    pub stretch: f64,
    pub energy: f64,
    pub m_af: f64,
    pub delta_s: f64,
}

/// Zero-noise estimates and the stretched evaluations they come from.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MitigatedValues {
    pub energy: f64,
    pub m_af: f64,
    pub delta_s: f64,
    pub stretched: Vec<StretchedValues>,
}

/// Re-simulates the stored circuit of `result` with its parameters unchanged
/// at each stretch of `noise` and extrapolates every quantity linearly to
/// zero noise. The estimate is not variational.
pub fn mitigate(result: &RunResult, spec: &LatticeSpec, noise: &NoiseModel, stretches: &[f64]) -> Result<MitigatedValues> {
    let model = EnergyModel::new(spec)?;
    let mut stretched = Vec::with_capacity(stretches.len());
    for &stretch in stretches {
        let (energy, obs) = if result.algorithm == Algorithm::Ed {
            // No circuit: the exact state is noise-free.
            (result.energy, ObservableValues { m_af: result.m_af, delta_s: result.delta_s, delta_s_imag: 0.0 })
        } else if noise.is_ideal() {
            let mut psi = QuantumState::zero(spec.mode_count());
            psi.apply_circuit(&result.circuit)?;
            (model.energy(&psi), model.observables(&psi))
        } else {
            let mut rho = DensityMatrix::zero(spec.mode_count());
            rho.apply_circuit(&result.circuit, &noise.stretched(stretch))?;
            (model.energy(&rho), model.observables(&rho))
        };
        stretched.push(StretchedValues {
            stretch,
            energy,
            m_af: obs.m_af,
            delta_s: obs.delta_s,
        });
    }
    let fit = |f: fn(&StretchedValues) -> f64| richardson_extrapolate(&stretched.iter().map(|v| (v.stretch, f(v))).collect::<Vec<_>>());
    Ok(MitigatedValues {
        energy: fit(|v| v.energy)?,
        m_af: fit(|v| v.m_af)?,
        delta_s: fit(|v| v.delta_s)?,
        stretched,
    })
}

/// Runs `algorithm` at the base noise of `config`, then mitigates the
/// optimized circuit over `config.stretches`.
pub fn mitigated_run(
    algorithm: Algorithm,
    spec: &LatticeSpec,
    config: &SolveConfig,
    warm: Option<&RunResult>,
) -> Result<(RunResult, MitigatedValues)> {
    let raw = run_algorithm(algorithm, spec, config, warm)?;
    let mitigated = mitigate(&raw, spec, &config.noise, &config.stretches)?;
    Ok((raw, mitigated))
}
