//! Self-consistent BCS and antiferromagnetic mean fields on the 3x2 lattice,
//! and the Givens-rotation circuits that prepare their ground states.

use hubbard_vqe::hubbard::{FieldSchedule, LatticeSpec};
use hubbard_vqe::meanfield::{
    build_mf_hamiltonian, gaussian_prep_circuit, ground_state_quadratic, self_consistent_loop, MeanFieldParams, ScfOptions,
};
use hubbard_vqe::sim::QuantumState;

fn main() -> hubbard_vqe::Result<()> {
    for u in [-3.0, 3.0] {
        let spec = LatticeSpec::new(3, 2, -1.0, u).with_schedule(FieldSchedule::Abs);
        for guess in [MeanFieldParams::bcs(u.abs()), MeanFieldParams::af(0.9, 0.1)] {
            let scf = match self_consistent_loop(&spec, guess, &ScfOptions::default()) {
                Ok(scf) => scf,
                Err(e) => {
                    println!("U = {u:+}: {:?} guess did not settle: {e}", guess.kind);
                    continue;
                }
            };
            let h = build_mf_hamiltonian(&spec, &scf.params)?;
            let target = ground_state_quadratic(&h)?;
            let circuit = gaussian_prep_circuit(&h)?;
            let mut prepared = QuantumState::zero(spec.mode_count());
            prepared.apply_circuit(&circuit)?;
            println!(
                "U = {u:+}: {:?} after {} iterations, {} gates, fidelity {:.12}",
                scf.params,
                scf.iterations,
                circuit.len(),
                target.state.fidelity(&prepared)
            );
        }
    }
    Ok(())
}
