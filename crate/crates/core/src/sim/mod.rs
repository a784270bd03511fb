//! Gate-level register simulation.
//!
//! Native gates are `RX`, `RY`, `RZ` (`R_P(theta) = exp(-i theta P / 2)`) and
//! `CZ`. Durations are measured in units of a single-qubit gate time; `RZ`
//! is virtual and takes no time, `CZ` takes three units.

mod density;
mod measure;
mod program;
mod state;

use std::fmt;

use crate::error::{Error, Result};

pub use density::DensityMatrix;
pub use measure::{expectation, sample_pauli_expectation, MeasuredState};
pub use program::{AffineAngle, LoweredProgram, PauliRotation, Program};
pub use state::QuantumState;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GateKind {
    Rx,
    Ry,
    Rz,
    Cz,
}

impl GateKind {
    pub fn duration(self) -> f64 {
        match self {
            GateKind::Rx | GateKind::Ry => 1.0,
            GateKind::Rz => 0.0,
            GateKind::Cz => 3.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Gate {
    Rx(usize, f64),
    Ry(usize, f64),
    Rz(usize, f64),
    Cz(usize, usize),
}

impl Gate {
    pub fn kind(&self) -> GateKind {
        match self {
            Gate::Rx(..) => GateKind::Rx,
            Gate::Ry(..) => GateKind::Ry,
            Gate::Rz(..) => GateKind::Rz,
            Gate::Cz(..) => GateKind::Cz,
        }
    }

    pub fn duration(&self) -> f64 {
        self.kind().duration()
    }

    /// Target qubits; the second entry is meaningful only for `CZ`.
    pub fn qubits(&self) -> ([usize; 2], usize) {
        match *self {
            Gate::Rx(q, _) | Gate::Ry(q, _) | Gate::Rz(q, _) => ([q, q], 1),
            Gate::Cz(a, b) => ([a, b], 2),
        }
    }

    fn max_qubit(&self) -> usize {
        let (q, k) = self.qubits();
        q[..k].iter().copied().max().unwrap_or(0)
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gate::Rx(q, a) => write!(f, "RX({a:.6}) q{q}"),
            Gate::Ry(q, a) => write!(f, "RY({a:.6}) q{q}"),
            Gate::Rz(q, a) => write!(f, "RZ({a:.6}) q{q}"),
            Gate::Cz(a, b) => write!(f, "CZ q{a} q{b}"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Circuit {
    qubit_count: usize,
    gates: Vec<Gate>,
}

/// Gate totals per kind.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct GateCounts {
    pub rx: usize,
    pub ry: usize,
    pub rz: usize,
    pub cz: usize,
}

impl GateCounts {
    pub fn total(&self) -> usize {
        self.rx + self.ry + self.rz + self.cz
    }
}

impl Circuit {
    pub fn new(qubit_count: usize) -> Self {
        Self {
            qubit_count,
            gates: Vec::new(),
        }
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        if gate.max_qubit() >= self.qubit_count {
            return Err(Error::QubitOutOfRange {
                index: gate.max_qubit(),
                qubit_count: self.qubit_count,
            });
        }
        if let Gate::Cz(a, b) = gate {
            if a == b {
                return Err(Error::QubitOutOfRange {
                    index: a,
                    qubit_count: self.qubit_count,
                });
            }
        }
        self.gates.push(gate);
        Ok(())
    }

    pub fn extend(&mut self, other: &Circuit) -> Result<()> {
        if other.qubit_count != self.qubit_count {
            return Err(Error::DimensionMismatch {
                expected: self.qubit_count,
                got: other.qubit_count,
            });
        }
        self.gates.extend_from_slice(&other.gates);
        Ok(())
    }

    pub fn total_duration(&self) -> f64 {
        self.gates.iter().map(Gate::duration).sum()
    }

    /// Number of layers when every gate starts as early as its qubits allow.
    pub fn depth(&self) -> usize {
        let mut front = vec![0usize; self.qubit_count];
        for g in &self.gates {
            let (qs, k) = g.qubits();
            let layer = qs[..k].iter().map(|&q| front[q]).max().unwrap_or(0) + 1;
            for &q in &qs[..k] {
                front[q] = layer;
            }
        }
        front.into_iter().max().unwrap_or(0)
    }

    pub fn counts(&self) -> GateCounts {
        let mut c = GateCounts::default();
        for g in &self.gates {
            match g.kind() {
                GateKind::Rx => c.rx += 1,
                GateKind::Ry => c.ry += 1,
                GateKind::Rz => c.rz += 1,
                GateKind::Cz => c.cz += 1,
            }
        }
        c
    }

    /// Inverse circuit (reversed order, negated angles).
    pub fn inverse(&self) -> Circuit {
        let gates = self
            .gates
            .iter()
            .rev()
            .map(|g| match *g {
                Gate::Rx(q, a) => Gate::Rx(q, -a),
                Gate::Ry(q, a) => Gate::Ry(q, -a),
                Gate::Rz(q, a) => Gate::Rz(q, -a),
                Gate::Cz(a, b) => Gate::Cz(a, b),
            })
            .collect();
        Circuit {
            qubit_count: self.qubit_count,
            gates,
        }
    }
}

/// Per-gate pure dephasing.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseModel {
    /// Single-qubit gate time over the dephasing time.
    pub gate_time_over_t2: f64,
    /// Multiplier on every gate duration.
    pub stretch: f64,
    /// Dephase every qubit during each gate rather than only its targets.
    pub idle_dephasing: bool,
}

impl NoiseModel {
    pub fn ideal() -> Self {
        Self::new(0.0)
    }

    pub fn new(gate_time_over_t2: f64) -> Self {
        Self {
            gate_time_over_t2,
            stretch: 1.0,
            idle_dephasing: false,
        }
    }

    pub fn stretched(mut self, stretch: f64) -> Self {
        self.stretch = stretch;
        self
    }

    pub fn is_ideal(&self) -> bool {
        self.gate_time_over_t2 == 0.0
    }

    /// Coherence factor applied after a gate of the given duration.
    pub fn coherence_factor(&self, duration: f64) -> f64 {
        (-duration * self.stretch * self.gate_time_over_t2).exp()
    }
}

/// Applies `circuit` to a pure state.
pub fn apply_circuit_pure(circuit: &Circuit, state: &QuantumState) -> Result<QuantumState> {
    let mut out = state.clone();
    out.apply_circuit(circuit)?;
    Ok(out)
}

/// Applies `circuit` to a density matrix under `noise`.
pub fn apply_circuit_noisy(circuit: &Circuit, rho: &DensityMatrix, noise: &NoiseModel) -> Result<DensityMatrix> {
    let mut out = rho.clone();
    out.apply_circuit(circuit, noise)?;
    Ok(out)
}
