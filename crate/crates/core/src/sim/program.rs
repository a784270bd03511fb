//! Programs of Pauli rotations `exp(i angle P)` with angles affine in a
//! parameter vector, and their lowering to native gates.
//!
//! Lowering of `exp(i phi P)` on sorted support `s_1 < ... < s_w`:
//! basis change (`X`: `RY(-pi/2)`, `Y`: `RX(pi/2)`), a CNOT parity ladder
//! `s_1 -> s_2 -> ... -> s_w`, `RZ(-2 phi)` on `s_w`, the ladder reversed and
//! the basis change undone. Each CNOT is `RY_t(-pi/2) CZ RY_t(pi/2)` in time
//! order. A peephole pass then fuses neighbouring rotations about the same
//! axis on the same qubit.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use super::state::{pauli_overlap, rotate};
use super::{Circuit, Gate, GateKind, QuantumState};
use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString, SparsePauliSum};

/// `offset + sum_k scale_k * params[index_k]`.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct AffineAngle {
    pub offset: f64,
    pub terms: Vec<(usize, f64)>,
}

impl AffineAngle {
    pub fn fixed(offset: f64) -> Self {
        Self { offset, terms: Vec::new() }
    }

    pub fn param(index: usize, scale: f64) -> Self {
        Self {
            offset: 0.0,
            terms: vec![(index, scale)],
        }
    }

    pub fn is_fixed(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, params: &[f64]) -> f64 {
        self.terms.iter().fold(self.offset, |acc, &(i, s)| acc + s * params[i])
    }

    fn scaled(&self, k: f64) -> Self {
        Self {
            offset: self.offset * k,
            terms: self.terms.iter().map(|&(i, s)| (i, s * k)).collect(),
        }
    }

    fn merge(&mut self, other: &AffineAngle) {
        self.offset += other.offset;
        for &(i, s) in &other.terms {
            match self.terms.iter_mut().find(|(j, _)| *j == i) {
                Some(t) => t.1 += s,
                None => self.terms.push((i, s)),
            }
        }
    }

    fn first_param(&self) -> Option<usize> {
        self.terms.iter().map(|&(i, _)| i).min()
    }
}

/// A rotation `exp(i angle P)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliRotation {
    pub pauli: PauliString,
    pub angle: AffineAngle,
}

/// Ordered list of Pauli rotations on a register.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Program {
    qubit_count: usize,
    param_count: usize,
    ops: Vec<PauliRotation>,
}

impl Program {
    pub fn new(qubit_count: usize, param_count: usize) -> Self {
        Self {
            qubit_count,
            param_count,
            ops: Vec::new(),
        }
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    pub fn param_count(&self) -> usize {
        self.param_count
    }

    pub fn ops(&self) -> &[PauliRotation] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Appends `exp(i angle P)`; identity rotations are dropped since they only
    /// contribute a global phase.
    pub fn push(&mut self, pauli: PauliString, angle: AffineAngle) -> Result<()> {
        if pauli.min_qubits() > self.qubit_count {
            return Err(Error::QubitOutOfRange {
                index: pauli.min_qubits() - 1,
                qubit_count: self.qubit_count,
            });
        }
        if let Some(&(i, _)) = angle.terms.iter().find(|(i, _)| *i >= self.param_count) {
            return Err(Error::ParameterCount {
                expected: self.param_count,
                got: i + 1,
            });
        }
        if !pauli.is_identity() {
            self.ops.push(PauliRotation { pauli, angle });
        }
        Ok(())
    }

    pub fn push_fixed(&mut self, pauli: PauliString, angle: f64) -> Result<()> {
        self.push(pauli, AffineAngle::fixed(angle))
    }

    /// Appends `other`, shifting its parameter indices by `param_offset`.
    pub fn append(&mut self, other: &Program, param_offset: usize) -> Result<()> {
        if other.qubit_count != self.qubit_count {
            return Err(Error::DimensionMismatch {
                expected: self.qubit_count,
                got: other.qubit_count,
            });
        }
        self.param_count = self.param_count.max(param_offset + other.param_count);
        for op in &other.ops {
            let mut angle = op.angle.clone();
            angle.terms.iter_mut().for_each(|t| t.0 += param_offset);
            self.ops.push(PauliRotation { pauli: op.pauli, angle });
        }
        Ok(())
    }

    fn check_params(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.param_count {
            return Err(Error::ParameterCount {
                expected: self.param_count,
                got: params.len(),
            });
        }
        Ok(())
    }

    /// Applies the rotations directly to a state vector.
    pub fn apply(&self, params: &[f64], state: &mut QuantumState) -> Result<()> {
        self.check_params(params)?;
        if state.qubit_count() != self.qubit_count {
            return Err(Error::DimensionMismatch {
                expected: self.qubit_count,
                got: state.qubit_count(),
            });
        }
        self.apply_range(params, state, 0, self.ops.len());
        Ok(())
    }

    pub(crate) fn apply_range(&self, params: &[f64], state: &mut QuantumState, start: usize, end: usize) {
        for op in &self.ops[start..end] {
            state.apply_rotation(&op.pauli, op.angle.eval(params));
        }
    }

    /// `<O>` after the program and its exact gradient, by propagating the
    /// state and `O psi` backwards through the rotations.
    pub fn expectation_gradient(&self, params: &[f64], initial: &QuantumState, obs: &SparsePauliSum) -> Result<(f64, Vec<f64>)> {
        let mut psi = initial.clone();
        self.apply(params, &mut psi)?;
        let mut lambda = vec![Complex64::new(0.0, 0.0); psi.amplitudes().len()];
        obs.apply(psi.amplitudes(), &mut lambda);
        let value: Complex64 = psi.amplitudes().iter().zip(&lambda).map(|(a, b)| a.conj() * b).sum();
        let mut grad = vec![0.0; self.param_count];
        let psi = psi.amplitudes_mut();
        for op in self.ops.iter().rev() {
            let angle = op.angle.eval(params);
            if !op.angle.is_fixed() {
                // d<O>/d angle = 2 Re <lambda| i P |psi> for Hermitian O.
                let d = -2.0 * pauli_overlap(&lambda, psi, &op.pauli).im;
                for &(i, s) in &op.angle.terms {
                    grad[i] += s * d;
                }
            }
            rotate(psi, &op.pauli, -angle, 0, false);
            rotate(&mut lambda, &op.pauli, -angle, 0, false);
        }
        Ok((value.re, grad))
    }

    /// For each parameter, the index of the first rotation depending on it
    /// (`len()` if none).
    pub fn first_use(&self) -> Vec<usize> {
        let mut first = vec![self.ops.len(); self.param_count];
        for (k, op) in self.ops.iter().enumerate() {
            for &(i, _) in &op.angle.terms {
                first[i] = first[i].min(k);
            }
        }
        first
    }

    pub fn lower(&self) -> LoweredProgram {
        let mut out = Peephole::new(self.qubit_count);
        for op in &self.ops {
            lower_rotation(&op.pauli, &op.angle, &mut out);
        }
        out.finish(self.param_count)
    }
}

#[derive(Clone, Debug, PartialEq)]
struct LoweredGate {
    kind: GateKind,
    qubits: [usize; 2],
    angle: AffineAngle,
}

/// Native-gate sequence with affine angles; binding parameters yields a
/// [`Circuit`] whose gate count does not depend on the parameter values.
#[derive(Clone, Debug, PartialEq)]
pub struct LoweredProgram {
    qubit_count: usize,
    param_count: usize,
    gates: Vec<LoweredGate>,
}

impl LoweredProgram {
    pub fn param_count(&self) -> usize {
        self.param_count
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn bind(&self, params: &[f64]) -> Result<Circuit> {
        if params.len() != self.param_count {
            return Err(Error::ParameterCount {
                expected: self.param_count,
                got: params.len(),
            });
        }
        let mut c = Circuit::new(self.qubit_count);
        for g in &self.gates {
            let a = g.angle.eval(params);
            let [p, q] = g.qubits;
            c.push(match g.kind {
                GateKind::Rx => Gate::Rx(p, a),
                GateKind::Ry => Gate::Ry(p, a),
                GateKind::Rz => Gate::Rz(p, a),
                GateKind::Cz => Gate::Cz(p, q),
            })?;
        }
        Ok(c)
    }

    /// Index of the first gate whose angle depends on any parameter.
    pub fn first_parametric_gate(&self) -> usize {
        self.gates
            .iter()
            .position(|g| g.angle.first_param().is_some())
            .unwrap_or(self.gates.len())
    }
}

struct Peephole {
    qubit_count: usize,
    gates: Vec<Option<LoweredGate>>,
    /// Live gate indices touching each qubit, most recent last.
    history: Vec<Vec<usize>>,
}

impl Peephole {
    fn new(qubit_count: usize) -> Self {
        Self {
            qubit_count,
            gates: Vec::new(),
            history: vec![Vec::new(); qubit_count],
        }
    }

    fn rotation(&mut self, kind: GateKind, q: usize, angle: AffineAngle) {
        if let Some(&last) = self.history[q].last() {
            let prev = self.gates[last].as_mut().expect("live gate");
            if prev.kind == kind {
                prev.angle.merge(&angle);
                if prev.angle.is_fixed() && prev.angle.offset == 0.0 {
                    self.gates[last] = None;
                    self.history[q].pop();
                }
                return;
            }
        }
        if angle.is_fixed() && angle.offset == 0.0 {
            return;
        }
        self.history[q].push(self.gates.len());
        self.gates.push(Some(LoweredGate {
            kind,
            qubits: [q, q],
            angle,
        }));
    }

    fn cz(&mut self, a: usize, b: usize) {
        // CZ is self-inverse: a CZ directly following the same CZ on both
        // qubits cancels.
        let la = self.history[a].last().copied();
        let lb = self.history[b].last().copied();
        if let (Some(la), Some(lb)) = (la, lb) {
            if la == lb {
                if let Some(g) = &self.gates[la] {
                    if g.kind == GateKind::Cz {
                        self.gates[la] = None;
                        self.history[a].pop();
                        self.history[b].pop();
                        return;
                    }
                }
            }
        }
        let k = self.gates.len();
        self.history[a].push(k);
        self.history[b].push(k);
        self.gates.push(Some(LoweredGate {
            kind: GateKind::Cz,
            qubits: [a, b],
            angle: AffineAngle::fixed(0.0),
        }));
    }

    fn cnot(&mut self, control: usize, target: usize) {
        self.rotation(GateKind::Ry, target, AffineAngle::fixed(-FRAC_PI_2));
        self.cz(control, target);
        self.rotation(GateKind::Ry, target, AffineAngle::fixed(FRAC_PI_2));
    }

    fn finish(self, param_count: usize) -> LoweredProgram {
        LoweredProgram {
            qubit_count: self.qubit_count,
            param_count,
            gates: self.gates.into_iter().flatten().collect(),
        }
    }
}

fn lower_rotation(pauli: &PauliString, angle: &AffineAngle, out: &mut Peephole) {
    let support: Vec<(usize, Pauli)> = pauli.iter().collect();
    if support.is_empty() {
        return;
    }
    for &(q, p) in &support {
        match p {
            Pauli::X => out.rotation(GateKind::Ry, q, AffineAngle::fixed(-FRAC_PI_2)),
            Pauli::Y => out.rotation(GateKind::Rx, q, AffineAngle::fixed(FRAC_PI_2)),
            Pauli::Z => {}
        }
    }
    for w in support.windows(2) {
        out.cnot(w[0].0, w[1].0);
    }
    let last = support.last().expect("nonempty").0;
    out.rotation(GateKind::Rz, last, angle.scaled(-2.0));
    for w in support.windows(2).rev() {
        out.cnot(w[0].0, w[1].0);
    }
    for &(q, p) in &support {
        match p {
            Pauli::X => out.rotation(GateKind::Ry, q, AffineAngle::fixed(FRAC_PI_2)),
            Pauli::Y => out.rotation(GateKind::Rx, q, AffineAngle::fixed(-FRAC_PI_2)),
            Pauli::Z => {}
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn random_state(n: usize, seed: u64) -> QuantumState {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let amps = (0..1 << n)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        QuantumState::from_amplitudes(amps).unwrap()
    }

    fn random_program(n: usize, len: usize, params: usize, seed: u64) -> Program {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut prog = Program::new(n, params);
        for _ in 0..len {
            let mut p = PauliString::identity();
            for q in 0..n {
                let pick = rng.random_range(0..5);
                let pauli = [None, None, Some(Pauli::X), Some(Pauli::Y), Some(Pauli::Z)][pick];
                p.set(q, pauli);
            }
            let angle = if rng.random_bool(0.5) {
                AffineAngle::param(rng.random_range(0..params), rng.random_range(-2.0..2.0))
            } else {
                AffineAngle::fixed(rng.random_range(-2.0..2.0))
            };
            prog.push(p, angle).unwrap();
        }
        prog
    }

    #[test]
    fn lowering_matches_direct_rotations() {
        for seed in 0..6 {
            let n = 5;
            let prog = random_program(n, 25, 3, seed);
            let params = [0.3, -1.2, 0.77];
            let psi = random_state(n, seed + 100);
            let mut direct = psi.clone();
            prog.apply(&params, &mut direct).unwrap();
            let circuit = prog.lower().bind(&params).unwrap();
            let mut gates = psi.clone();
            gates.apply_circuit(&circuit).unwrap();
            let overlap = direct.inner(&gates);
            assert!((overlap.norm() - 1.0).abs() < 1e-10, "seed {seed}: {overlap}");
        }
    }

    #[test]
    fn adjoint_gradient_matches_central_differences() {
        use crate::pauli::QubitOperator;
        let n = 4;
        let prog = random_program(n, 30, 3, 21);
        let mut obs = QubitOperator::zero(n);
        for (k, q) in [(0.7, 0), (-0.4, 2)] {
            obs.add_term(PauliString::from_pairs([(q, Pauli::X), (q + 1, Pauli::Y)]), Complex64::new(k, 0.0));
        }
        obs.add_term(PauliString::from_pairs([(1, Pauli::Z), (3, Pauli::Z)]), Complex64::new(1.3, 0.0));
        let obs = obs.compile();
        let psi = random_state(n, 5);
        let energy = |p: &[f64]| {
            let mut s = psi.clone();
            prog.apply(p, &mut s).unwrap();
            obs.expectation(s.amplitudes()).re
        };
        let params = [0.2, -0.9, 1.4];
        let (value, grad) = prog.expectation_gradient(&params, &psi, &obs).unwrap();
        assert!((value - energy(&params)).abs() < 1e-12);
        for i in 0..3 {
            let h = 1e-5;
            let mut up = params;
            up[i] += h;
            let mut down = params;
            down[i] -= h;
            let fd = (energy(&up) - energy(&down)) / (2.0 * h);
            assert!((fd - grad[i]).abs() < 1e-8, "{i}: {fd} vs {}", grad[i]);
        }
    }

    #[test]
    fn gate_count_is_parameter_independent() {
        let prog = random_program(4, 20, 2, 7);
        let lowered = prog.lower();
        let a = lowered.bind(&[0.0, 0.0]).unwrap();
        let b = lowered.bind(&[0.4, -0.1]).unwrap();
        assert_eq!(a.len(), b.len());
    }

    #[test]
    fn adjacent_basis_changes_cancel() {
        let mut prog = Program::new(2, 1);
        let xx = PauliString::from_pairs([(0, Pauli::X), (1, Pauli::X)]);
        prog.push(xx, AffineAngle::param(0, 1.0)).unwrap();
        prog.push(xx, AffineAngle::param(0, 1.0)).unwrap();
        let single = {
            let mut p = Program::new(2, 1);
            p.push(xx, AffineAngle::param(0, 1.0)).unwrap();
            p.lower().len()
        };
        assert!(prog.lower().len() < 2 * single);
    }

    #[test]
    fn z_rotation_lowers_to_single_rz() {
        let mut prog = Program::new(1, 0);
        prog.push_fixed(PauliString::single(0, Pauli::Z), 0.25).unwrap();
        let c = prog.lower().bind(&[]).unwrap();
        assert_eq!(c.gates(), &[Gate::Rz(0, -0.5)]);
    }

    #[test]
    fn parameter_validation() {
        let mut prog = Program::new(2, 1);
        assert!(prog.push(PauliString::single(0, Pauli::X), AffineAngle::param(1, 1.0)).is_err());
        assert!(prog.push_fixed(PauliString::single(2, Pauli::X), 1.0).is_err());
        assert!(prog.apply(&[0.0, 1.0], &mut QuantumState::zero(2)).is_err());
    }
}
