//! Variational ansatz programs built from pseudo-time evolutions under parts
//! of the lattice Hamiltonian, optionally extended by symmetry-breaking
//! generators or preceded by a parameterized mean-field state.
//!
//! Parameter layout: `theta[k * N + a]` drives generator `a` in repetition
//! `k`; for the extended ansatz the breaking parameters follow as
//! `theta_e[k * B + b]` at offset `reps * N`; the mean-field ansatz appends
//! its mean-field fields after all evolution angles.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fermion::{jordan_wigner, FermionOperator};
use crate::hubbard::{decompose, symmetry_breaking_terms, BreakingCombo, LatticeSpec};
use crate::meanfield::{build_mf_hamiltonian, gaussian_prep_circuit, gaussian_prep_program, MeanFieldKind, MeanFieldParams};
use crate::pauli::{PauliString, COEFF_EPS};
use crate::sim::{AffineAngle, Circuit, Program};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnsatzKind {
    Vha,
    Veha,
    Vmfha,
}

/// Real Pauli expansion of a Hermitian generator, identity removed, sorted.
#[derive(Clone, Debug, PartialEq)]
pub struct CompiledGenerator {
    terms: Vec<(PauliString, f64)>,
}

impl CompiledGenerator {
    pub fn new(h: &FermionOperator) -> Result<Self> {
        if !h.is_hermitian() {
            return Err(Error::NotHermitian);
        }
        let q = jordan_wigner(h)?;
        let terms = q
            .terms()
            .filter(|(p, c)| !p.is_identity() && c.norm() > COEFF_EPS)
            .map(|(p, c)| (*p, c.re))
            .collect();
        Ok(Self { terms })
    }

    pub fn terms(&self) -> &[(PauliString, f64)] {
        &self.terms
    }

    pub fn is_commuting(&self) -> bool {
        self.terms
            .iter()
            .enumerate()
            .all(|(i, (p, _))| self.terms[i + 1..].iter().all(|(q, _)| p.commutes_with(q)))
    }

    /// Appends `exp(i theta H)` with `theta = params[index]`: one rotation per
    /// term when all terms commute, otherwise a symmetric second-order sweep.
    pub fn push_evolution(&self, program: &mut Program, index: usize) -> Result<()> {
        let k = self.terms.len();
        if k == 0 {
            return Ok(());
        }
        if self.is_commuting() {
            for &(p, c) in &self.terms {
                program.push(p, AffineAngle::param(index, c))?;
            }
            return Ok(());
        }
        for &(p, c) in &self.terms[..k - 1] {
            program.push(p, AffineAngle::param(index, 0.5 * c))?;
        }
        let (p, c) = self.terms[k - 1];
        program.push(p, AffineAngle::param(index, c))?;
        for &(p, c) in self.terms[..k - 1].iter().rev() {
            program.push(p, AffineAngle::param(index, 0.5 * c))?;
        }
        Ok(())
    }
}

/// One-parameter program for `exp(i theta H)`.
pub fn trotter_program(h: &FermionOperator) -> Result<Program> {
    let g = CompiledGenerator::new(h)?;
    let mut program = Program::new(h.mode_count(), 1);
    g.push_evolution(&mut program, 0)?;
    Ok(program)
}

pub fn trotter_circuit(h: &FermionOperator, theta: f64) -> Result<Circuit> {
    trotter_program(h)?.lower().bind(&[theta])
}

#[derive(Clone, Debug)]
pub struct AnsatzSpec {
    pub kind: AnsatzKind,
    pub reps: usize,
    pub lattice: LatticeSpec,
    pub generators: Vec<FermionOperator>,
    /// Extra generators appended to each repetition (extended ansatz only).
    pub breaking: Vec<FermionOperator>,
    /// Order of the initial state: fixed for the plain ansatz, free
    /// (`Combined`) for the mean-field ansatz, unused for the extended one.
    pub mf_kind: Option<MeanFieldKind>,
    compiled: Vec<CompiledGenerator>,
    compiled_breaking: Vec<CompiledGenerator>,
}

impl AnsatzSpec {
    fn build(
        kind: AnsatzKind,
        lattice: &LatticeSpec,
        reps: usize,
        breaking: Vec<FermionOperator>,
        mf_kind: Option<MeanFieldKind>,
    ) -> Result<Self> {
        if reps == 0 {
            return Err(Error::Config("ansatz needs at least one repetition".into()));
        }
        let generators = decompose(lattice)?.to_vec();
        let compiled = generators.iter().map(CompiledGenerator::new).collect::<Result<_>>()?;
        let compiled_breaking = breaking.iter().map(CompiledGenerator::new).collect::<Result<_>>()?;
        Ok(Self {
            kind,
            reps,
            lattice: *lattice,
            generators,
            breaking,
            mf_kind,
            compiled,
            compiled_breaking,
        })
    }

    pub fn vha(lattice: &LatticeSpec, reps: usize, mf_kind: MeanFieldKind) -> Result<Self> {
        Self::build(AnsatzKind::Vha, lattice, reps, Vec::new(), Some(mf_kind))
    }

    pub fn veha(lattice: &LatticeSpec, reps: usize, combo: BreakingCombo) -> Result<Self> {
        let breaking = symmetry_breaking_terms(lattice, combo)?;
        Self::build(AnsatzKind::Veha, lattice, reps, breaking, None)
    }

    pub fn vmfha(lattice: &LatticeSpec, reps: usize) -> Result<Self> {
        Self::build(AnsatzKind::Vmfha, lattice, reps, Vec::new(), Some(MeanFieldKind::Combined))
    }

    pub fn qubit_count(&self) -> usize {
        self.lattice.mode_count()
    }

    /// Angles of the lattice generators.
    pub fn system_param_count(&self) -> usize {
        self.reps * self.generators.len()
    }

    /// Angles of the evolution part (lattice plus breaking generators).
    pub fn evolution_param_count(&self) -> usize {
        self.reps * (self.generators.len() + self.breaking.len())
    }

    pub fn mean_field_param_count(&self) -> usize {
        match (self.kind, self.mf_kind) {
            (AnsatzKind::Vmfha, Some(MeanFieldKind::Bcs)) => 1,
            (AnsatzKind::Vmfha, Some(MeanFieldKind::Af)) => 2,
            (AnsatzKind::Vmfha, Some(MeanFieldKind::Combined)) => 3,
            _ => 0,
        }
    }

    pub fn param_count(&self) -> usize {
        self.evolution_param_count() + self.mean_field_param_count()
    }

    /// The parameterized evolution without any initial-state preparation.
    pub fn evolution_program(&self) -> Result<Program> {
        let n = self.generators.len();
        let b = self.breaking.len();
        let mut program = Program::new(self.qubit_count(), self.evolution_param_count());
        for k in 0..self.reps {
            // Breaking generators act first so that the opening repetition
            // does not spend its lattice angles on the vacuum.
            for (j, g) in self.compiled_breaking.iter().enumerate() {
                g.push_evolution(&mut program, self.system_param_count() + k * b + j)?;
            }
            for (a, g) in self.compiled.iter().enumerate() {
                g.push_evolution(&mut program, k * n + a)?;
            }
        }
        Ok(program)
    }

    fn check_len(expected: usize, got: usize) -> Result<()> {
        if expected != got {
            return Err(Error::ParameterCount { expected, got });
        }
        Ok(())
    }
}

/// Lattice-generator evolution bound to `theta`.
pub fn vha_circuit(spec: &AnsatzSpec, theta: &[f64]) -> Result<Circuit> {
    if !spec.breaking.is_empty() {
        return Err(Error::Config("extended ansatz needs both parameter sets".into()));
    }
    AnsatzSpec::check_len(spec.system_param_count(), theta.len())?;
    spec.evolution_program()?.lower().bind(theta)
}

/// Extended evolution bound to `theta` (lattice) and `theta_e` (breaking).
pub fn veha_circuit(spec: &AnsatzSpec, theta: &[f64], theta_e: &[f64]) -> Result<Circuit> {
    AnsatzSpec::check_len(spec.system_param_count(), theta.len())?;
    AnsatzSpec::check_len(spec.reps * spec.breaking.len(), theta_e.len())?;
    let params: Vec<f64> = theta.iter().chain(theta_e).copied().collect();
    spec.evolution_program()?.lower().bind(&params)
}

/// Gaussian initial state of the mean-field Hamiltonian at `params`, taken
/// as given rather than self-consistent.
pub fn vmfha_initial_circuit(lattice: &LatticeSpec, params: &MeanFieldParams) -> Result<Circuit> {
    gaussian_prep_circuit(&build_mf_hamiltonian(lattice, params)?)
}

/// Rotation-level form of [`vmfha_initial_circuit`].
pub fn vmfha_initial_program(lattice: &LatticeSpec, params: &MeanFieldParams) -> Result<Program> {
    gaussian_prep_program(&build_mf_hamiltonian(lattice, params)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hubbard::{build_hamiltonian, order_parameter_observables, spin_flip_matrix, total_number};
    use crate::sim::QuantumState;
    use nalgebra::{DMatrix, DVector};
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn unitary_of(program: &Program, params: &[f64]) -> DMatrix<Complex64> {
        let n = program.qubit_count();
        let dim = 1 << n;
        let mut u = DMatrix::zeros(dim, dim);
        for col in 0..dim {
            let mut s = QuantumState::basis(n, col as u64);
            program.apply(params, &mut s).unwrap();
            for (row, a) in s.amplitudes().iter().enumerate() {
                u[(row, col)] = *a;
            }
        }
        u
    }

    fn circuit_unitary(c: &Circuit) -> DMatrix<Complex64> {
        let n = c.qubit_count();
        let dim = 1 << n;
        let mut u = DMatrix::zeros(dim, dim);
        for col in 0..dim {
            let mut s = QuantumState::basis(n, col as u64);
            s.apply_circuit(c).unwrap();
            for (row, a) in s.amplitudes().iter().enumerate() {
                u[(row, col)] = *a;
            }
        }
        u
    }

    /// Distance modulo a global phase, via the spectral norm.
    fn distance(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
        let overlap = (a.adjoint() * b).trace();
        let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { Complex64::new(1.0, 0.0) };
        (a * phase - b).singular_values().max()
    }

    fn exact_evolution(h: &FermionOperator, theta: f64) -> DMatrix<Complex64> {
        let d = jordan_wigner(h).unwrap().to_dense().unwrap();
        (d * Complex64::new(0.0, theta)).exp()
    }

    #[test]
    fn zero_angle_is_identity() {
        let spec = LatticeSpec::new(2, 2, -1.0, 2.0);
        for h in decompose(&spec).unwrap().iter().chain(&symmetry_breaking_terms(&spec, BreakingCombo::BcsAf).unwrap()) {
            let c = trotter_circuit(h, 0.0).unwrap();
            let id = DMatrix::<Complex64>::identity(256, 256);
            assert!(distance(&circuit_unitary(&c), &id) < 1e-10);
        }
    }

    #[test]
    fn single_hopping_is_exact() {
        let mut h = FermionOperator::zero(2);
        let one = Complex64::new(1.0, 0.0);
        h.add_product(one, &[crate::fermion::Ladder::create(0), crate::fermion::Ladder::annihilate(1)]).unwrap();
        h.add_product(one, &[crate::fermion::Ladder::create(1), crate::fermion::Ladder::annihilate(0)]).unwrap();
        for theta in [0.3, -1.2, 2.5] {
            let c = trotter_circuit(&h, theta).unwrap();
            assert!(distance(&circuit_unitary(&c), &exact_evolution(&h, theta)) < 1e-10);
        }
    }

    #[test]
    fn commuting_generators_are_exact_on_the_plaquette() {
        let spec = LatticeSpec::new(2, 2, -1.0, 3.0);
        for h in decompose(&spec).unwrap() {
            let g = CompiledGenerator::new(&h).unwrap();
            assert!(g.is_commuting());
            let p = trotter_program(&h).unwrap();
            assert!(distance(&unitary_of(&p, &[0.7]), &exact_evolution(&h, 0.7)) < 1e-10);
        }
    }

    #[test]
    fn second_order_local_error() {
        let spec = LatticeSpec::new(2, 2, -1.0, 3.0);
        let af = symmetry_breaking_terms(&spec, BreakingCombo::Af).unwrap();
        let h = &af[0] + &af[1];
        assert!(!CompiledGenerator::new(&h).unwrap().is_commuting());
        let p = trotter_program(&h).unwrap();
        let thetas: Vec<f64> = (0..6).map(|k| 0.01 * 20f64.powf(k as f64 / 5.0)).collect();
        let pts: Vec<(f64, f64)> = thetas
            .iter()
            .map(|&t| (t.ln(), distance(&unitary_of(&p, &[t]), &exact_evolution(&h, t)).ln()))
            .collect();
        let n = pts.len() as f64;
        let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
        let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
        assert!(slope > 2.7, "slope {slope}");
    }

    #[test]
    fn parameter_counts() {
        let big = LatticeSpec::new(3, 2, -1.0, 1.0);
        assert_eq!(AnsatzSpec::vha(&big, 4, MeanFieldKind::Bcs).unwrap().param_count(), 20);
        let small = LatticeSpec::new(2, 2, -1.0, 1.0);
        assert_eq!(AnsatzSpec::veha(&small, 4, BreakingCombo::BcsAf).unwrap().param_count(), 32);
        assert_eq!(AnsatzSpec::vmfha(&small, 4).unwrap().param_count(), 23);
        let spec = AnsatzSpec::vha(&small, 4, MeanFieldKind::Af).unwrap();
        assert!(matches!(vha_circuit(&spec, &[0.0; 19]), Err(Error::ParameterCount { .. })));
    }

    #[test]
    fn single_repetition_matches_trotter_block() {
        let spec = LatticeSpec::new(2, 2, -1.0, 2.0);
        let ansatz = AnsatzSpec::vha(&spec, 1, MeanFieldKind::Bcs).unwrap();
        let mut theta = [0.0; 5];
        theta[4] = 0.8;
        let a = vha_circuit(&ansatz, &theta).unwrap();
        let b = trotter_circuit(&ansatz.generators[4], 0.8).unwrap();
        assert!(distance(&circuit_unitary(&a), &circuit_unitary(&b)) < 1e-10);
    }

    #[test]
    fn pairing_evolution_keeps_even_parity() {
        let spec = LatticeSpec::new(2, 2, -1.0, -2.0);
        let ansatz = AnsatzSpec::veha(&spec, 1, BreakingCombo::Bcs).unwrap();
        let c = veha_circuit(&ansatz, &[0.0; 5], &[0.9]).unwrap();
        let mut s = QuantumState::zero(8);
        s.apply_circuit(&c).unwrap();
        let odd: f64 = s.amplitudes().iter().enumerate().filter(|(x, _)| x.count_ones() % 2 == 1).map(|(_, a)| a.norm_sqr()).sum();
        assert!(odd < 1e-20);
        assert!(s.amplitudes()[0].norm() < 1.0 - 1e-3);
        let zero = veha_circuit(&ansatz, &[0.0; 5], &[0.0]).unwrap();
        let mut v = QuantumState::zero(8);
        v.apply_circuit(&zero).unwrap();
        assert!((v.amplitudes()[0].norm() - 1.0).abs() < 1e-12);
    }

    fn random_state(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
        (0..1 << n).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect()
    }

    #[test]
    fn plain_ansatz_preserves_symmetries() {
        let lattice = LatticeSpec::new(2, 2, -1.0, 2.5);
        let ansatz = AnsatzSpec::vha(&lattice, 4, MeanFieldKind::Bcs).unwrap();
        let program = ansatz.evolution_program().unwrap();
        let (m_af, delta) = order_parameter_observables(&lattice).unwrap();
        let m_af = jordan_wigner(&m_af).unwrap().compile();
        let delta = jordan_wigner(&(&delta * (1.0 / lattice.u))).unwrap().compile();
        let flip = spin_flip_matrix(&lattice).unwrap();
        let number = jordan_wigner(&total_number(&lattice)).unwrap().to_dense().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let raw = DVector::from_vec(random_state(&mut rng, 8));
        let symmetric = QuantumState::from_amplitudes((&raw + &flip * &raw).as_slice().to_vec()).unwrap();
        let fixed_n: Vec<Complex64> = raw.iter().enumerate().map(|(x, a)| if x.count_ones() == 4 { *a } else { Complex64::new(0.0, 0.0) }).collect();
        let fixed_n = QuantumState::from_amplitudes(fixed_n).unwrap();
        let nv = DVector::from_column_slice(fixed_n.amplitudes());
        assert!((&number * &nv - &nv * Complex64::new(4.0, 0.0)).norm() < 1e-12);
        for _ in 0..50 {
            let theta: Vec<f64> = (0..program.param_count()).map(|_| rng.random_range(-PI..PI)).collect();
            let mut a = symmetric.clone();
            program.apply(&theta, &mut a).unwrap();
            assert!(m_af.expectation(a.amplitudes()).norm() < 1e-8);
            let mut b = fixed_n.clone();
            program.apply(&theta, &mut b).unwrap();
            assert!(delta.expectation(b.amplitudes()).norm() < 1e-8);
        }
    }

    #[test]
    fn random_trial_states_respect_the_variational_bound() {
        let lattice = LatticeSpec::new(2, 2, -1.0, -1.5).with_fields(0.2, 0.2);
        let h = jordan_wigner(&build_hamiltonian(&lattice).unwrap()).unwrap();
        let exact = h.to_dense().unwrap().symmetric_eigen().eigenvalues.min();
        let h = h.compile();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for ansatz in [
            AnsatzSpec::vha(&lattice, 2, MeanFieldKind::Bcs).unwrap(),
            AnsatzSpec::veha(&lattice, 2, BreakingCombo::BcsAf).unwrap(),
        ] {
            let program = ansatz.evolution_program().unwrap();
            for _ in 0..10 {
                let theta: Vec<f64> = (0..program.param_count()).map(|_| rng.random_range(-PI..PI)).collect();
                let mut s = QuantumState::zero(8);
                program.apply(&theta, &mut s).unwrap();
                assert!(h.expectation(s.amplitudes()).re >= exact - 1e-9);
            }
        }
    }

    #[test]
    fn mean_field_initial_states() {
        let lattice = LatticeSpec::new(2, 2, -1.0, 2.0);
        // Zero gap: number-conserving Slater determinant at half filling.
        let c = vmfha_initial_circuit(&lattice, &MeanFieldParams::bcs(0.0)).unwrap();
        let mut s = QuantumState::zero(8);
        s.apply_circuit(&c).unwrap();
        let off: f64 = s.amplitudes().iter().enumerate().filter(|(x, _)| x.count_ones() != 4).map(|(_, a)| a.norm_sqr()).sum();
        assert!(off < 1e-20);
        // Energy continuity in the gap.
        let h = jordan_wigner(&build_hamiltonian(&lattice).unwrap()).unwrap().compile();
        let energy = |p: MeanFieldParams| {
            let mut s = QuantumState::zero(8);
            vmfha_initial_program(&lattice, &p).unwrap().apply(&[], &mut s).unwrap();
            h.expectation(s.amplitudes()).re
        };
        for d in [0.1, 0.5, 1.3] {
            assert!((energy(MeanFieldParams::bcs(d + 1e-4)) - energy(MeanFieldParams::bcs(d))).abs() < 1e-2);
        }
        // Fully polarized occupations give the largest staggered moment.
        let m_af = jordan_wigner(&order_parameter_observables(&lattice).unwrap().0).unwrap().compile();
        let moment = |p: MeanFieldParams| {
            let mut s = QuantumState::zero(8);
            vmfha_initial_program(&lattice, &p).unwrap().apply(&[], &mut s).unwrap();
            m_af.expectation(s.amplitudes()).re.abs()
        };
        let top = moment(MeanFieldParams::af(1.0, 0.0));
        for (a, b) in [(0.8, 0.2), (0.6, 0.4), (0.5, 0.5)] {
            assert!(top >= moment(MeanFieldParams::af(a, b)));
        }
    }

    #[test]
    fn pairing_block_depth_is_size_independent() {
        let depth = |nx| {
            let lattice = LatticeSpec::new(nx, 2, -1.0, -2.0);
            let g = &symmetry_breaking_terms(&lattice, BreakingCombo::Bcs).unwrap()[0];
            trotter_circuit(g, 0.4).unwrap().depth()
        };
        assert_eq!(depth(2), depth(3));
    }
}
