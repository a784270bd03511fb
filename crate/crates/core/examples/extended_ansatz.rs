//! Ansatz grown from the empty register by explicitly symmetry-breaking
//! generators, in the attractive regime.

use hubbard_vqe::hubbard::{FieldSchedule, LatticeSpec};
use hubbard_vqe::reference::exact_ground_state;
use hubbard_vqe::solve::{run_veha, OptimizerConfig, SolveConfig};

fn main() -> hubbard_vqe::Result<()> {
    let spec = LatticeSpec::new(3, 2, -1.0, -2.0).with_schedule(FieldSchedule::Abs);
    let config = SolveConfig {
        optimizer: OptimizerConfig {
            restarts: 3,
            ..Default::default()
        },
        ..Default::default()
    };
    let ed = exact_ground_state(&spec)?;
    let veha = run_veha(&spec, &config)?;
    for c in &veha.candidates {
        println!("{:>7}: {:.6}", c.label, c.energy);
    }
    let rel = (veha.energy - ed.energy).abs() / ed.energy.abs();
    println!("best {} at {:.6}, exact {:.6}, relative error {rel:.2e}", veha.label, veha.energy, ed.energy);
    println!("Delta_s {:.4} (exact {:.4})", veha.delta_s, ed.delta_s);
    Ok(())
}
