use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{DensityMatrix, Gate, NoiseModel, QuantumState};
use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString, QubitOperator, SparsePauliSum};

/// A register state that supports exact and sampled Pauli measurements.
pub trait MeasuredState {
    fn qubit_count(&self) -> usize;

    fn expectation_compiled(&self, obs: &SparsePauliSum) -> Complex64;

    /// Computational-basis outcome distribution after rotating every factor of
    /// `basis` onto Z.
    fn rotated_probabilities(&self, basis: &PauliString) -> Vec<f64>;
}

/// Gates mapping each factor of `basis` onto Z.
fn basis_change(basis: &PauliString) -> Vec<Gate> {
    basis
        .iter()
        .filter_map(|(q, p)| match p {
            Pauli::X => Some(Gate::Ry(q, -FRAC_PI_2)),
            Pauli::Y => Some(Gate::Rx(q, FRAC_PI_2)),
            Pauli::Z => None,
        })
        .collect()
}

impl MeasuredState for QuantumState {
    fn qubit_count(&self) -> usize {
        QuantumState::qubit_count(self)
    }

    fn expectation_compiled(&self, obs: &SparsePauliSum) -> Complex64 {
        obs.expectation(self.amplitudes())
    }

    fn rotated_probabilities(&self, basis: &PauliString) -> Vec<f64> {
        let mut s = self.clone();
        for g in basis_change(basis) {
            s.apply_gate(&g);
        }
        s.probabilities()
    }
}

impl MeasuredState for DensityMatrix {
    fn qubit_count(&self) -> usize {
        DensityMatrix::qubit_count(self)
    }

    fn expectation_compiled(&self, obs: &SparsePauliSum) -> Complex64 {
        obs.trace_product(self.data())
    }

    fn rotated_probabilities(&self, basis: &PauliString) -> Vec<f64> {
        let mut r = self.clone();
        let ideal = NoiseModel::ideal();
        for g in basis_change(basis) {
            r.apply_gate(&g, &ideal);
        }
        r.probabilities()
    }
}

/// Exact `<O>`.
pub fn expectation<S: MeasuredState>(state: &S, obs: &QubitOperator) -> Result<Complex64> {
    if obs.qubit_count() != state.qubit_count() {
        return Err(Error::DimensionMismatch {
            expected: state.qubit_count(),
            got: obs.qubit_count(),
        });
    }
    Ok(state.expectation_compiled(&obs.compile()))
}

/// Shot-based estimate of a Hermitian observable: each non-identity Pauli
/// product is measured `shots` times in its own rotated basis.
pub fn sample_pauli_expectation<S: MeasuredState>(state: &S, obs: &QubitOperator, shots: usize, seed: u64) -> Result<f64> {
    if obs.qubit_count() != state.qubit_count() {
        return Err(Error::DimensionMismatch {
            expected: state.qubit_count(),
            got: obs.qubit_count(),
        });
    }
    if !obs.is_hermitian() {
        return Err(Error::NotHermitian);
    }
    if shots == 0 {
        return Err(Error::Config("shots must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut total = 0.0;
    for (p, c) in obs.terms() {
        if p.is_identity() {
            total += c.re;
            continue;
        }
        let probs = state.rotated_probabilities(p);
        let mut cdf = Vec::with_capacity(probs.len());
        let mut acc = 0.0;
        for w in probs {
            acc += w.max(0.0);
            cdf.push(acc);
        }
        let support = p.support_mask();
        let mut sum: i64 = 0;
        for _ in 0..shots {
            let r = rng.random::<f64>() * acc;
            let outcome = cdf.partition_point(|&v| v <= r).min(cdf.len() - 1) as u64;
            sum += if (outcome & support).count_ones() % 2 == 0 { 1 } else { -1 };
        }
        total += c.re * sum as f64 / shots as f64;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn op(terms: &[(PauliString, f64)], n: usize) -> QubitOperator {
        let mut o = QubitOperator::zero(n);
        for &(p, c) in terms {
            o.add_term(p, Complex64::new(c, 0.0));
        }
        o
    }

    #[test]
    fn z_on_zero_is_exact() {
        let z = op(&[(PauliString::single(0, Pauli::Z), 1.0)], 1);
        let s = QuantumState::zero(1);
        assert_eq!(expectation(&s, &z).unwrap(), Complex64::new(1.0, 0.0));
        assert_eq!(sample_pauli_expectation(&s, &z, 17, 3).unwrap(), 1.0);
    }

    #[test]
    fn x_on_zero_has_binomial_scatter() {
        let x = op(&[(PauliString::single(0, Pauli::X), 1.0)], 1);
        let s = QuantumState::zero(1);
        let est = sample_pauli_expectation(&s, &x, 25000, 11).unwrap();
        assert!(est.abs() < 4.0 / 25000f64.sqrt());
    }

    #[test]
    fn samples_converge_to_exact_value() {
        let n = 3;
        let mut s = QuantumState::zero(n);
        for g in [Gate::Ry(0, 0.7), Gate::Rx(1, 1.9), Gate::Cz(0, 1), Gate::Ry(2, -0.4), Gate::Rx(0, 0.3)] {
            s.apply_gate(&g);
        }
        let obs = op(
            &[
                (PauliString::from_pairs([(0, Pauli::X), (1, Pauli::Y)]), 0.8),
                (PauliString::from_pairs([(1, Pauli::Z), (2, Pauli::X)]), -0.3),
                (PauliString::single(2, Pauli::Z), 0.5),
                (PauliString::identity(), 0.25),
            ],
            n,
        );
        let exact = expectation(&s, &obs).unwrap().re;
        let seeds = 40;
        let shots = 25000;
        let mean = (0..seeds).map(|k| sample_pauli_expectation(&s, &obs, shots, k).unwrap()).sum::<f64>() / seeds as f64;
        // Worst-case standard error bound from |coefficients|.
        let stderr = (0.8f64.powi(2) + 0.3f64.powi(2) + 0.5f64.powi(2)).sqrt() / ((seeds * shots as u64) as f64).sqrt();
        assert!((mean - exact).abs() < 3.0 * stderr, "{mean} vs {exact}");
        let rho = DensityMatrix::from_pure(&s);
        let exact_rho = expectation(&rho, &obs).unwrap().re;
        assert!((exact - exact_rho).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut o = QubitOperator::zero(1);
        o.add_term(PauliString::single(0, Pauli::X), Complex64::new(0.0, 1.0));
        assert!(matches!(sample_pauli_expectation(&QuantumState::zero(1), &o, 10, 0), Err(Error::NotHermitian)));
    }
}
