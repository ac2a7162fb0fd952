//! Exact propagation against simulation, and the Varopoulos-Carne bound.

use ergolab::generators::FixedEnsemble;
use ergolab::walk::{simulate_seeded, varopoulos_carne_check, ExactWalk};

fn main() -> ergolab::error::Result<()> {
    let z2 = FixedEnsemble::lattice(2)?.graph().clone();
    let mut walk = ExactWalk::new(&z2, z2.root())?;
    for n in 1..=8 {
        walk.step()?;
        println!("Z², n = {n}: H_n = {:.4}, mass = {:.15}", walk.entropy(), walk.total_mass());
    }
    let path = simulate_seeded(&z2, z2.root(), 1000, 7)?;
    println!("1000-step path: range {}, distance {}", path.range(), z2.distance(path.start(), path.end())?);

    let vc = varopoulos_carne_check(&z2, z2.root(), 16, 4)?;
    println!("Varopoulos-Carne on Z², n ≤ 16: max ratio {:.4}, passed {}", vc.max_ratio, vc.passed);
    Ok(())
}
