//! The grandfather graph: balls, distances and signatures.

use ergolab::generators::grandfather_graph;
use ergolab::graph::ball_signature;

fn main() -> ergolab::error::Result<()> {
    let g = grandfather_graph();
    let rho = g.root();
    println!("deg(ρ) = {}", g.degree(rho)?);
    for r in 0..=4 {
        println!("#B(ρ, {r}) = {}", g.ball_volume(rho, r)?);
    }
    for (v, _) in g.neighbors(rho)? {
        let same = ball_signature(&g, v, 2, None)? == ball_signature(&g, rho, 2, None)?;
        println!("{:>14}  d = {}  same 2-ball as ρ: {same}", g.describe(v), g.distance(rho, v)?);
    }
    Ok(())
}
