//! The ε/ξ recursion, the canopy tree and its reinforced version.

use ergolab::generators::{epsilon_sequence, reinforced_canopy_finite, root_depth_distribution, CanopyTree};

fn main() -> ergolab::error::Result<()> {
    let seq = epsilon_sequence(40)?;
    println!("ε_1..ε_40 = {:?}", seq.epsilons());
    println!("ξ_20 = {}, ξ_40 = {}", seq.xi(20), seq.xi(40));

    let t = reinforced_canopy_finite(4)?;
    println!("T^R_4: {} vertices", t.vertices().unwrap().len());
    let law = root_depth_distribution(6)?;
    println!("degree-biased root depth of T^R_6: {:.4?}", law.probabilities());

    let lazy = CanopyTree::infinite(1000, 0)?.into_graph();
    for r in [10, 100, 500] {
        let vol = lazy.ball_volume(lazy.root(), r)?;
        println!("T_∞: #B(leaf, {r}) = {vol}  (r^4 = {})", (r as u128).pow(4));
    }
    Ok(())
}
