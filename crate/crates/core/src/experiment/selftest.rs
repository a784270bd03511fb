//! Fast end-to-end checks for an installed binary.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::Result;
use crate::fermion::{jordan_wigner, FermionOperator};
use crate::hubbard::{build_hamiltonian, LatticeSpec};
use crate::reference::exact_ground_state;
use crate::solve::{run_vha_ps, OptimizerConfig, SolveConfig};

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, outcome: Result<(bool, String)>) -> Check {
    let (passed, detail) = outcome.unwrap_or_else(|e| (false, e.to_string()));
    Check { name, passed, detail }
}

fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn anticommutation() -> Result<(bool, String)> {
    const MODES: usize = 4;
    let dim = 1 << MODES;
    let mut worst: f64 = 0.0;
    for i in 0..MODES {
        let ci = jordan_wigner(&FermionOperator::annihilate(MODES, i)?)?.to_dense()?;
        for j in 0..MODES {
            let cj = jordan_wigner(&FermionOperator::annihilate(MODES, j)?)?.to_dense()?;
            let cj_dag = cj.adjoint();
            let delta = if i == j { DMatrix::identity(dim, dim) } else { DMatrix::zeros(dim, dim) };
            worst = worst.max(max_abs(&(&ci * &cj_dag + &cj_dag * &ci - delta)));
            worst = worst.max(max_abs(&(&ci * &cj + &cj * &ci)));
        }
    }
    Ok((worst < 1e-12, format!("max deviation {worst:.1e}")))
}

fn mapping_matches_fock_space() -> Result<(bool, String)> {
    let h = build_hamiltonian(&LatticeSpec::new(2, 1, -1.0, 2.5).with_fields(0.3, 0.2))?;
    let diff = max_abs(&(h.to_dense()? - jordan_wigner(&h)?.to_dense()?));
    Ok((diff < 1e-12, format!("max deviation {diff:.1e}")))
}

fn dimer_is_solved() -> Result<(bool, String)> {
    let spec = LatticeSpec::new(2, 1, -1.0, 0.0).open();
    let ed = exact_ground_state(&spec)?;
    let config = SolveConfig {
        optimizer: OptimizerConfig {
            restarts: 2,
            ..OptimizerConfig::default()
        },
        reps: 1,
        ..SolveConfig::default()
    };
    let vha = run_vha_ps(&spec, &config)?;
    let gap = (vha.energy - ed.energy).abs();
    Ok((gap < 1e-6, format!("E = {:.8}, exact {:.8}", vha.energy, ed.energy)))
}

pub fn run() -> Vec<Check> {
    vec![
        check("anticommutation on 4 modes", anticommutation()),
        check("qubit image of the Hamiltonian", mapping_matches_fock_space()),
        check("free dimer ground state", dimer_is_solved()),
    ]
}
