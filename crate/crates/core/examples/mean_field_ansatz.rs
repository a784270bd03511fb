//! Mean fields of the initial state optimized together with the ansatz
//! angles, warm-started from the post-selected plain ansatz.

use hubbard_vqe::hubbard::{FieldSchedule, LatticeSpec};
use hubbard_vqe::reference::exact_ground_state;
use hubbard_vqe::solve::{run_vha_ps, run_vmfha, OptimizerConfig, SolveConfig};

fn main() -> hubbard_vqe::Result<()> {
    let spec = LatticeSpec::new(2, 2, -1.0, -3.0).with_schedule(FieldSchedule::Abs);
    let config = SolveConfig {
        optimizer: OptimizerConfig {
            restarts: 4,
            ..Default::default()
        },
        ..Default::default()
    };
    let ed = exact_ground_state(&spec)?;
    let vha = run_vha_ps(&spec, &config)?;
    let vmfha = run_vmfha(&spec, &config, Some(&vha))?;
    let rel = |e: f64| (e - ed.energy).abs() / ed.energy.abs();
    println!("VHA-PS relative error {:.3e}", rel(vha.energy));
    println!("VMFHA  relative error {:.3e}", rel(vmfha.energy));
    println!("optimized mean fields {:?}", vmfha.mf_params);
    Ok(())
}
