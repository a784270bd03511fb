//! Exact ground-state energy and order parameters of the 2x2 plaquette
//! across the interaction, with the default external fields.

use hubbard_vqe::hubbard::{FieldSchedule, LatticeSpec};
use hubbard_vqe::reference::exact_ground_state;

fn main() -> hubbard_vqe::Result<()> {
    println!("{:>6} {:>14} {:>10} {:>10} {:>5}", "U", "energy", "M_AF", "Delta_s", "deg");
    for k in 0..9 {
        let u = -4.0 + k as f64;
        let spec = LatticeSpec::new(2, 2, -1.0, u).with_schedule(FieldSchedule::Abs);
        let ed = exact_ground_state(&spec)?;
        println!("{u:>6.1} {:>14.8} {:>10.5} {:>10.5} {:>5}", ed.energy, ed.m_af, ed.delta_s, ed.degeneracy);
    }
    Ok(())
}
