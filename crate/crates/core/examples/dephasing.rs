//! A fixed trial circuit under dephasing, re-run with stretched gate times
//! and extrapolated back to zero noise.

use hubbard_vqe::hubbard::{FieldSchedule, LatticeSpec};
use hubbard_vqe::reference::{exact_ground_state, mitigate};
use hubbard_vqe::sim::NoiseModel;
use hubbard_vqe::solve::{run_vha_ps, OptimizerConfig, SolveConfig};

fn main() -> hubbard_vqe::Result<()> {
    let spec = LatticeSpec::new(2, 2, -1.0, -3.0).with_schedule(FieldSchedule::Abs);
    let config = SolveConfig {
        optimizer: OptimizerConfig {
            restarts: 2,
            ..Default::default()
        },
        ..Default::default()
    };
    let ed = exact_ground_state(&spec)?;
    let clean = run_vha_ps(&spec, &config)?;
    println!("exact {:.6}, noiseless ansatz {:.6}, circuit duration {}", ed.energy, clean.energy, clean.circuit_duration);
    println!("{:>10} {:>12} {:>12}", "gate/T2", "raw", "mitigated");
    for gamma in [1e-5, 3e-5, 1e-4] {
        let m = mitigate(&clean, &spec, &NoiseModel::new(gamma), &[1.0, 1.5])?;
        println!("{gamma:>10.0e} {:>12.6} {:>12.6}", m.stretched[0].energy, m.energy);
    }
    Ok(())
}
