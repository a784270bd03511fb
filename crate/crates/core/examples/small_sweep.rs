//! A reduced interaction sweep on the plaquette written as CSV and SVG to
//! a directory given on the command line (default `sweep-out`).

use std::path::PathBuf;

use hubbard_vqe::experiment::{plot, run_u_sweep, ExperimentConfig, LatticeConfig};

fn main() -> hubbard_vqe::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "sweep-out".into()));
    let mut config = ExperimentConfig {
        lattice: LatticeConfig::plaquette(),
        u_grid: vec![-3.0, -1.0, 1.0, 3.0],
        reps: 2,
        ..ExperimentConfig::default()
    };
    config.optimizer.restarts = 2;
    let outcome = run_u_sweep(&config)?;
    outcome.table.write(&out.join("u_sweep.csv"))?;
    for row in &outcome.table.rows {
        println!("U = {:+.1} {:>6} rel. error {:.2e}", row.u, row.algorithm, row.rel_err.unwrap_or(f64::NAN));
    }
    for path in plot::u_sweep_figures(&outcome.table, &out)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}
