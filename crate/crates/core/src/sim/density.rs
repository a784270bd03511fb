use nalgebra::DMatrix;
use num_complex::Complex64;

use super::state::{apply_cz, apply_rx, apply_ry, apply_rz, rotate};
use super::{Circuit, Gate, NoiseModel, QuantumState};
use crate::error::{Error, Result};
use crate::pauli::PauliString;

/// Largest register simulated as a density matrix.
pub const DENSITY_LIMIT: usize = 12;

/// Density matrix stored row-major, i.e. as a `2n`-qubit vector whose high
/// `n` bits index rows and low `n` bits index columns.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    qubit_count: usize,
    data: Vec<Complex64>,
}

impl DensityMatrix {
    pub fn zero(qubit_count: usize) -> Self {
        Self::from_pure(&QuantumState::zero(qubit_count))
    }

    pub fn from_pure(state: &QuantumState) -> Self {
        let n = state.qubit_count();
        assert!(n <= DENSITY_LIMIT, "density matrix too large");
        let psi = state.amplitudes();
        let mut data = Vec::with_capacity(psi.len() * psi.len());
        for r in psi {
            data.extend(psi.iter().map(|c| r * c.conj()));
        }
        Self { qubit_count: n, data }
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    pub fn dim(&self) -> usize {
        1 << self.qubit_count
    }

    /// Row-major entries.
    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim() + col]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|k| self.entry(k, k)).sum()
    }

    /// Diagonal populations.
    pub fn probabilities(&self) -> Vec<f64> {
        (0..self.dim()).map(|k| self.entry(k, k).re).collect()
    }

    pub fn to_dmatrix(&self) -> DMatrix<Complex64> {
        let d = self.dim();
        DMatrix::from_fn(d, d, |r, c| self.entry(r, c))
    }

    pub fn max_hermiticity_error(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for r in 0..d {
            for c in r..d {
                worst = worst.max((self.entry(r, c) - self.entry(c, r).conj()).norm());
            }
        }
        worst
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.to_dmatrix().symmetric_eigen().eigenvalues.min()
    }

    /// Noise-free `U rho U^dagger`.
    pub fn apply_unitary_gate(&mut self, gate: &Gate) {
        let n = self.qubit_count;
        let d = &mut self.data;
        match *gate {
            Gate::Rx(q, a) => {
                apply_rx(d, q + n, a, false);
                apply_rx(d, q, a, true);
            }
            Gate::Ry(q, a) => {
                apply_ry(d, q + n, a);
                apply_ry(d, q, a);
            }
            Gate::Rz(q, a) => {
                apply_rz(d, q + n, a, false);
                apply_rz(d, q, a, true);
            }
            Gate::Cz(a, b) => {
                apply_cz(d, a + n, b + n);
                apply_cz(d, a, b);
            }
        }
    }

    /// Multiplies the coherences of `qubit` by `factor`.
    pub fn dephase(&mut self, qubit: usize, factor: f64) {
        if factor == 1.0 {
            return;
        }
        let n = self.qubit_count;
        let row_bit = 1usize << (qubit + n);
        let col_bit = 1usize << qubit;
        for (k, v) in self.data.iter_mut().enumerate() {
            if ((k & row_bit) != 0) != ((k & col_bit) != 0) {
                *v *= factor;
            }
        }
    }

    /// Multiplies every entry by the product of per-qubit factors over the
    /// qubits on which row and column differ.
    fn dephase_all(&mut self, factor: f64) {
        if factor == 1.0 {
            return;
        }
        let n = self.qubit_count;
        let mask = (1usize << n) - 1;
        let powers: Vec<f64> = (0..=n).map(|k| factor.powi(k as i32)).collect();
        for (k, v) in self.data.iter_mut().enumerate() {
            let differ = ((k >> n) ^ k) & mask;
            *v *= powers[differ.count_ones() as usize];
        }
    }

    /// Gate followed by dephasing for its duration.
    pub fn apply_gate(&mut self, gate: &Gate, noise: &NoiseModel) {
        self.apply_unitary_gate(gate);
        let duration = gate.duration();
        if noise.is_ideal() || duration == 0.0 {
            return;
        }
        let factor = noise.coherence_factor(duration);
        if noise.idle_dephasing {
            self.dephase_all(factor);
        } else {
            let (qs, k) = gate.qubits();
            for &q in &qs[..k] {
                self.dephase(q, factor);
            }
        }
    }

    /// Noisy circuit application. Dephasing commutes with diagonal gates, so
    /// each qubit's pending coherence factor is only applied right before the
    /// next non-diagonal gate on it (fused into that gate's pass) or at the end.
    pub fn apply_circuit(&mut self, circuit: &Circuit, noise: &NoiseModel) -> Result<()> {
        if circuit.qubit_count() != self.qubit_count {
            return Err(Error::DimensionMismatch {
                expected: self.qubit_count,
                got: circuit.qubit_count(),
            });
        }
        let n = self.qubit_count;
        let mut pending = vec![1.0; n];
        for g in circuit.gates() {
            match *g {
                Gate::Rx(q, a) => {
                    self.dephased_rotation::<true>(q, pending[q], a);
                    pending[q] = 1.0;
                }
                Gate::Ry(q, a) => {
                    self.dephased_rotation::<false>(q, pending[q], a);
                    pending[q] = 1.0;
                }
                Gate::Rz(q, a) => self.diagonal_rz(q, a),
                Gate::Cz(a, b) => self.diagonal_cz(a, b),
            }
            let duration = g.duration();
            if noise.is_ideal() || duration == 0.0 {
                continue;
            }
            let factor = noise.coherence_factor(duration);
            if noise.idle_dephasing {
                pending.iter_mut().for_each(|p| *p *= factor);
            } else {
                let (qs, k) = g.qubits();
                for &q in &qs[..k] {
                    pending[q] *= factor;
                }
            }
        }
        for (q, &f) in pending.iter().enumerate() {
            self.dephase(q, f);
        }
        Ok(())
    }

    /// `RZ` conjugation: only entries whose row and column bits differ move.
    fn diagonal_rz(&mut self, qubit: usize, angle: f64) {
        let n = self.qubit_count;
        let rb = 1usize << (qubit + n);
        let cb = 1usize << qubit;
        let up = Complex64::from_polar(1.0, angle);
        let down = up.conj();
        let d = &mut self.data;
        for outer in (0..d.len()).step_by(2 * rb) {
            for inner in (outer..outer + rb).step_by(2 * cb) {
                for i00 in inner..inner + cb {
                    d[i00 + cb] *= down;
                    d[i00 + rb] *= up;
                }
            }
        }
    }

    fn diagonal_cz(&mut self, a: usize, b: usize) {
        let dim = self.dim();
        let both = (1usize << a) | (1usize << b);
        let marked: Vec<usize> = (0..dim).filter(|c| c & both == both).collect();
        for (r, row) in self.data.chunks_exact_mut(dim).enumerate() {
            if r & both == both {
                row.iter_mut().for_each(|v| *v = -*v);
            }
            for &c in &marked {
                row[c] = -row[c];
            }
        }
    }

    /// Dephases `qubit` by `factor`, then conjugates with `RX(angle)` or
    /// `RY(angle)`, in one pass over the `(row bit, column bit)` blocks.
    fn dephased_rotation<const ABOUT_X: bool>(&mut self, qubit: usize, factor: f64, angle: f64) {
        let about_x = ABOUT_X;
        let n = self.qubit_count;
        let rb = 1usize << (qubit + n);
        let cb = 1usize << qubit;
        let (s, c) = (angle / 2.0).sin_cos();
        // Multiplication by -i s, or by -s for the real rotation.
        let off = |z: Complex64| if about_x { Complex64::new(s * z.im, -s * z.re) } else { -z * s };
        let d = &mut self.data;
        for outer in (0..d.len()).step_by(2 * rb) {
            let (lo, hi) = d[outer..outer + 2 * rb].split_at_mut(rb);
            for (lo, hi) in lo.chunks_exact_mut(2 * cb).zip(hi.chunks_exact_mut(2 * cb)) {
                let (r00, r01) = lo.split_at_mut(cb);
                let (r10, r11) = hi.split_at_mut(cb);
                for k in 0..cb {
                    let (a, b, e, f) = (r00[k], r01[k] * factor, r10[k] * factor, r11[k]);
                    // Rows: U = [[c, off], [-conj(off) .. ]] written out per axis.
                    let (a1, b1, e1, f1) = if about_x {
                        (a * c + off(e), b * c + off(f), off(a) + e * c, off(b) + f * c)
                    } else {
                        (a * c + off(e), b * c + off(f), -off(a) + e * c, -off(b) + f * c)
                    };
                    // Columns: right multiplication by U^dagger.
                    let conj_off = |z: Complex64| if about_x { Complex64::new(-s * z.im, s * z.re) } else { -z * s };
                    if about_x {
                        r00[k] = a1 * c + conj_off(b1);
                        r01[k] = conj_off(a1) + b1 * c;
                        r10[k] = e1 * c + conj_off(f1);
                        r11[k] = conj_off(e1) + f1 * c;
                    } else {
                        r00[k] = a1 * c + conj_off(b1);
                        r01[k] = -conj_off(a1) + b1 * c;
                        r10[k] = e1 * c + conj_off(f1);
                        r11[k] = -conj_off(e1) + f1 * c;
                    }
                }
            }
        }
    }

    /// Noise-free `exp(i angle P) rho exp(-i angle P)`.
    pub fn apply_rotation(&mut self, pauli: &PauliString, angle: f64) {
        let n = self.qubit_count;
        rotate(&mut self.data, pauli, angle, n, false);
        rotate(&mut self.data, pauli, angle, 0, true);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn random_circuit(n: usize, len: usize, seed: u64) -> Circuit {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut c = Circuit::new(n);
        for _ in 0..len {
            let q = rng.random_range(0..n);
            let a = rng.random_range(-PI..PI);
            let g = match rng.random_range(0..4) {
                0 => Gate::Rx(q, a),
                1 => Gate::Ry(q, a),
                2 => Gate::Rz(q, a),
                _ => {
                    let r = (q + rng.random_range(1..n)) % n;
                    Gate::Cz(q, r)
                }
            };
            c.push(g).unwrap();
        }
        c
    }

    #[test]
    fn zero_noise_matches_pure_evolution() {
        for seed in 0..4 {
            let c = random_circuit(4, 60, seed);
            let mut psi = QuantumState::zero(4);
            psi.apply_circuit(&c).unwrap();
            let mut rho = DensityMatrix::zero(4);
            rho.apply_circuit(&c, &NoiseModel::ideal()).unwrap();
            let expect = DensityMatrix::from_pure(&psi);
            for (a, b) in rho.data().iter().zip(expect.data()) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn deferred_dephasing_matches_gate_by_gate() {
        for idle in [false, true] {
            let c = random_circuit(4, 300, 17);
            let mut noise = NoiseModel::new(0.003);
            noise.idle_dephasing = idle;
            let mut fast = DensityMatrix::zero(4);
            fast.apply_circuit(&c, &noise).unwrap();
            let mut slow = DensityMatrix::zero(4);
            for g in c.gates() {
                slow.apply_gate(g, &noise);
            }
            for (a, b) in fast.data().iter().zip(slow.data()) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn single_qubit_dephasing_closed_form() {
        let g = 0.013;
        let mut c = Circuit::new(1);
        c.push(Gate::Rx(0, PI / 2.0)).unwrap();
        let rho = super::super::apply_circuit_noisy(&c, &DensityMatrix::zero(1), &NoiseModel::new(g)).unwrap();
        assert!((rho.entry(0, 1).norm() - 0.5 * (-g).exp()).abs() < 1e-14);
        assert!((rho.entry(0, 0).re - 0.5).abs() < 1e-14);
    }

    #[test]
    fn stretch_shrinks_coherences() {
        let c = random_circuit(3, 30, 9);
        let noise = NoiseModel::new(0.01);
        let mut a = DensityMatrix::zero(3);
        a.apply_circuit(&c, &noise).unwrap();
        let mut b = DensityMatrix::zero(3);
        b.apply_circuit(&c, &noise.stretched(1.5)).unwrap();
        let off = |m: &DensityMatrix| -> f64 {
            (0..8).flat_map(|r| (0..8).map(move |c| (r, c))).filter(|(r, c)| r != c).map(|(r, c)| m.entry(r, c).norm()).sum()
        };
        assert!(off(&b) < off(&a));
    }

    #[test]
    fn noisy_channel_stays_physical() {
        let c = random_circuit(4, 1000, 3);
        for idle in [false, true] {
            let mut noise = NoiseModel::new(0.002);
            noise.idle_dephasing = idle;
            let mut rho = DensityMatrix::zero(4);
            rho.apply_circuit(&c, &noise).unwrap();
            assert!((rho.trace().re - 1.0).abs() < 1e-10);
            assert!(rho.trace().im.abs() < 1e-10);
            assert!(rho.max_hermiticity_error() < 1e-12);
            assert!(rho.min_eigenvalue() > -1e-9);
        }
    }

    #[test]
    fn idle_dephasing_touches_spectators() {
        let mut c = Circuit::new(2);
        c.push(Gate::Ry(1, PI / 2.0)).unwrap();
        c.push(Gate::Ry(0, PI / 2.0)).unwrap();
        let mut noise = NoiseModel::new(0.1);
        let local = apply_circuit_noisy_for(&c, &noise);
        noise.idle_dephasing = true;
        let idle = apply_circuit_noisy_for(&c, &noise);
        // Qubit 1 coherence: one gate locally, two with idling.
        let q1 = |m: &DensityMatrix| m.entry(0, 2).norm();
        assert!((q1(&local) / q1(&idle) - 0.1f64.exp()).abs() < 1e-12);
    }

    fn apply_circuit_noisy_for(c: &Circuit, noise: &NoiseModel) -> DensityMatrix {
        super::super::apply_circuit_noisy(c, &DensityMatrix::zero(c.qubit_count()), noise).unwrap()
    }
}
