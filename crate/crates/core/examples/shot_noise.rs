//! Energy estimated from projective measurements of each Pauli product,
//! repeated to show the sampling scatter.

use hubbard_vqe::hubbard::{FieldSchedule, LatticeSpec};
use hubbard_vqe::meanfield::{build_mf_hamiltonian, gaussian_prep_circuit, MeanFieldParams};
use hubbard_vqe::sim::QuantumState;
use hubbard_vqe::solve::{EnergyModel, Measurement};

fn main() -> hubbard_vqe::Result<()> {
    let spec = LatticeSpec::new(2, 2, -1.0, -3.0).with_schedule(FieldSchedule::Abs);
    let model = EnergyModel::new(&spec)?;
    let mut state = QuantumState::zero(spec.mode_count());
    state.apply_circuit(&gaussian_prep_circuit(&build_mf_hamiltonian(&spec, &MeanFieldParams::bcs(1.5))?)?)?;
    println!("exact expectation {:.6}", model.energy(&state));
    for shots in [1_000, 25_000] {
        let samples: Vec<f64> = (0..20)
            .map(|seed| model.measured_energy(&state, Measurement::Shots(shots), seed))
            .collect::<hubbard_vqe::Result<_>>()?;
        let mean = samples.iter().sum::<f64>() / samples.len() as f64;
        let std = (samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (samples.len() - 1) as f64).sqrt();
        println!("{shots:>6} shots per product: mean {mean:.5}, std {std:.2e}");
    }
    Ok(())
}
