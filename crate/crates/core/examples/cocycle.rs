//! The Radon-Nikodym cocycle of the grandfather graph.

use ergolab::cocycle::{cycle_product_check, elog_delta, estimate_delta};
use ergolab::generators::FixedEnsemble;

fn main() -> ergolab::error::Result<()> {
    let e = FixedEnsemble::grandfather();
    let g = e.graph().clone();
    let table = estimate_delta(&e, 2, 0, 0)?;
    for (class, entry) in &table.classes {
        println!("{}…  μ→ = {:.3}  Δ = {}", &class.hex()[..12], entry.forward, entry.delta);
    }
    let el = elog_delta(&table);
    println!("E log Δ = {:.6}, speed ≥ {:.6}", el.value.value, el.ballistic_bound);
    let cycles = cycle_product_check(&table, &g, 100, 10, 1)?;
    println!("{} cycles, max |log ∏Δ| = {:.2e}", cycles.walk_cycles + cycles.bfs_cycles, cycles.max_abs_log);
    Ok(())
}
