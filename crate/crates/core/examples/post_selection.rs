//! Plain Hamiltonian ansatz started from both mean-field states, keeping
//! the lower result.

use hubbard_vqe::hubbard::{FieldSchedule, LatticeSpec};
use hubbard_vqe::reference::exact_ground_state;
use hubbard_vqe::solve::{run_mf, run_vha_ps, OptimizerConfig, SolveConfig};

fn main() -> hubbard_vqe::Result<()> {
    let spec = LatticeSpec::new(2, 2, -1.0, 2.0).with_schedule(FieldSchedule::Abs);
    let config = SolveConfig {
        optimizer: OptimizerConfig {
            restarts: 4,
            ..Default::default()
        },
        ..Default::default()
    };
    let ed = exact_ground_state(&spec)?;
    let mf = run_mf(&spec, &config)?;
    let vha = run_vha_ps(&spec, &config)?;
    println!("exact       {:.8}", ed.energy);
    println!("mean field  {:.8} ({})", mf.energy, mf.label);
    for c in &vha.candidates {
        println!("VHA from {:>3} {:.8} over restarts {:?}", c.label, c.energy, c.restart_energies);
    }
    println!(
        "selected {} with M_AF {:.4}, Delta_s {:.4}, {} gates",
        vha.label, vha.m_af, vha.delta_s, vha.gate_count
    );
    Ok(())
}
