//! Maps a Hubbard dimer onto qubits and checks the canonical relations of
//! the mapped ladder operators.

use hubbard_vqe::fermion::{jordan_wigner, FermionOperator};
use hubbard_vqe::hubbard::{build_hamiltonian, LatticeSpec};
use nalgebra::DMatrix;

fn main() -> hubbard_vqe::Result<()> {
    let spec = LatticeSpec::new(2, 1, -1.0, 4.0).open();
    let h = build_hamiltonian(&spec)?;
    let qubits = jordan_wigner(&h)?;
    println!("{} fermionic terms -> {} Pauli products on {} qubits", h.len(), qubits.len(), qubits.qubit_count());
    for (p, c) in qubits.terms() {
        println!("  {:+.3} {p}", c.re);
    }

    let modes = spec.mode_count();
    let dim = 1 << modes;
    let mut worst: f64 = 0.0;
    for i in 0..modes {
        let ci = jordan_wigner(&FermionOperator::annihilate(modes, i)?)?.to_dense()?;
        for j in 0..modes {
            let cj_dag = jordan_wigner(&FermionOperator::create(modes, j)?)?.to_dense()?;
            let delta = if i == j { DMatrix::identity(dim, dim) } else { DMatrix::zeros(dim, dim) };
            let anti = &ci * &cj_dag + &cj_dag * &ci - delta;
            worst = worst.max(anti.iter().map(|z| z.norm()).fold(0.0, f64::max));
        }
    }
    println!("largest violation of {{c_i, c_j^dagger}} = delta_ij: {worst:.1e}");
    Ok(())
}
