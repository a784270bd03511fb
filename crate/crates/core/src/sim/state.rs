use num_complex::Complex64;

use super::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::pauli::{i_pow, PauliString};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Pure state on `n` qubits, qubit `q` being bit `q` of the basis index.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState {
    qubit_count: usize,
    amps: Vec<Complex64>,
}

impl QuantumState {
    /// `|0...0>`.
    pub fn zero(qubit_count: usize) -> Self {
        Self::basis(qubit_count, 0)
    }

    pub fn basis(qubit_count: usize, index: u64) -> Self {
        assert!(qubit_count < 31, "state vector too large");
        let mut amps = vec![ZERO; 1 << qubit_count];
        amps[index as usize] = ONE;
        Self { qubit_count, amps }
    }

    /// Wraps and normalizes raw amplitudes.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let dim = amps.len();
        if !dim.is_power_of_two() {
            return Err(Error::DimensionMismatch {
                expected: dim.next_power_of_two(),
                got: dim,
            });
        }
        let mut s = Self {
            qubit_count: dim.trailing_zeros() as usize,
            amps,
        };
        let norm = s.norm();
        if norm == 0.0 {
            return Err(Error::DimensionMismatch { expected: 1, got: 0 });
        }
        s.amps.iter_mut().for_each(|a| *a /= norm);
        Ok(s)
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &QuantumState) -> Complex64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &QuantumState) -> f64 {
        self.inner(other).norm_sqr()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn apply_gate(&mut self, gate: &Gate) {
        apply_gate(&mut self.amps, gate, 0);
    }

    pub fn apply_circuit(&mut self, circuit: &Circuit) -> Result<()> {
        if circuit.qubit_count() != self.qubit_count {
            return Err(Error::DimensionMismatch {
                expected: self.qubit_count,
                got: circuit.qubit_count(),
            });
        }
        for g in circuit.gates() {
            self.apply_gate(g);
        }
        Ok(())
    }

    /// `psi <- exp(i angle P) psi`.
    pub fn apply_rotation(&mut self, pauli: &PauliString, angle: f64) {
        rotate(&mut self.amps, pauli, angle, 0, false);
    }
}

/// `RX` on bit `bit`; `conj` applies the complex conjugate matrix.
#[inline]
pub(crate) fn apply_rx(amps: &mut [Complex64], bit: usize, angle: f64, conj: bool) {
    let (s, c) = (angle / 2.0).sin_cos();
    let s = if conj { -s } else { s };
    let stride = 1usize << bit;
    for block in amps.chunks_exact_mut(2 * stride) {
        let (lo, hi) = block.split_at_mut(stride);
        for (x, y) in lo.iter_mut().zip(hi.iter_mut()) {
            let (a, b) = (*x, *y);
            // [[c, -is], [-is, c]]
            *x = Complex64::new(c * a.re + s * b.im, c * a.im - s * b.re);
            *y = Complex64::new(c * b.re + s * a.im, c * b.im - s * a.re);
        }
    }
}

#[inline]
pub(crate) fn apply_ry(amps: &mut [Complex64], bit: usize, angle: f64) {
    let (s, c) = (angle / 2.0).sin_cos();
    let stride = 1usize << bit;
    for block in amps.chunks_exact_mut(2 * stride) {
        let (lo, hi) = block.split_at_mut(stride);
        for (x, y) in lo.iter_mut().zip(hi.iter_mut()) {
            let (a, b) = (*x, *y);
            *x = a * c - b * s;
            *y = a * s + b * c;
        }
    }
}

#[inline]
pub(crate) fn apply_rz(amps: &mut [Complex64], bit: usize, angle: f64, conj: bool) {
    let sign = if conj { -1.0 } else { 1.0 };
    let lo_phase = Complex64::from_polar(1.0, -sign * angle / 2.0);
    let hi_phase = lo_phase.conj();
    let stride = 1usize << bit;
    for block in amps.chunks_exact_mut(2 * stride) {
        let (lo, hi) = block.split_at_mut(stride);
        lo.iter_mut().for_each(|a| *a *= lo_phase);
        hi.iter_mut().for_each(|a| *a *= hi_phase);
    }
}

#[inline]
pub(crate) fn apply_cz(amps: &mut [Complex64], a: usize, b: usize) {
    let mask = (1usize << a) | (1usize << b);
    for (x, amp) in amps.iter_mut().enumerate() {
        if x & mask == mask {
            *amp = -*amp;
        }
    }
}

/// Applies `gate` with qubit indices shifted by `offset`.
pub(crate) fn apply_gate(amps: &mut [Complex64], gate: &Gate, offset: usize) {
    match *gate {
        Gate::Rx(q, a) => apply_rx(amps, q + offset, a, false),
        Gate::Ry(q, a) => apply_ry(amps, q + offset, a),
        Gate::Rz(q, a) => apply_rz(amps, q + offset, a, false),
        Gate::Cz(a, b) => apply_cz(amps, a + offset, b + offset),
    }
}

/// `exp(i angle P)` with qubits shifted by `offset`; `conj` applies the
/// elementwise conjugate of that unitary.
pub(crate) fn rotate(amps: &mut [Complex64], pauli: &PauliString, angle: f64, offset: usize, conj: bool) {
    let (s, c) = angle.sin_cos();
    let flip = (pauli.x_mask() as usize) << offset;
    let z = (pauli.z_mask() as usize) << offset;
    let y_phase = i_pow(pauli.y_count() as i32);
    let mut w = Complex64::new(0.0, s) * y_phase;
    if conj {
        w = w.conj();
    }
    if flip == 0 {
        // Diagonal: exp(i angle sign(x)).
        let mut plus = Complex64::new(c, s);
        if conj {
            plus = plus.conj();
        }
        let minus = plus.conj();
        for (x, a) in amps.iter_mut().enumerate() {
            *a *= if (x & z).count_ones() % 2 == 0 { plus } else { minus };
        }
        return;
    }
    let low = flip.trailing_zeros() as usize;
    let stride = 1usize << low;
    let dim = amps.len();
    let mut base = 0;
    while base < dim {
        for x in base..base + stride {
            let y = x ^ flip;
            let (a, b) = (amps[x], amps[y]);
            let sx = if (x & z).count_ones() % 2 == 0 { w } else { -w };
            let sy = if (y & z).count_ones() % 2 == 0 { w } else { -w };
            amps[x] = a * c + sy * b;
            amps[y] = b * c + sx * a;
        }
        base += 2 * stride;
    }
}

/// `<bra| P |ket>`.
pub(crate) fn pauli_overlap(bra: &[Complex64], ket: &[Complex64], pauli: &PauliString) -> Complex64 {
    let flip = pauli.x_mask() as usize;
    let z = pauli.z_mask() as usize;
    let mut acc = ZERO;
    for (x, k) in ket.iter().enumerate() {
        let term = bra[x ^ flip].conj() * k;
        if (x & z).count_ones() % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc * i_pow(pauli.y_count() as i32)
}
