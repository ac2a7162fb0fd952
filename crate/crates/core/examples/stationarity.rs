//! Stationarity, reversibility and the mass-transport principle.

use ergolab::generators::{finite_graph_ensemble, FixedEnsemble, Rooting};
use ergolab::graph::{FiniteGraphBuilder, VertexId};
use ergolab::stats::{mtp_test, reversibility_test, stationarity_test, PairContext};

fn main() -> ergolab::error::Result<()> {
    let mut b = FiniteGraphBuilder::new("p3");
    b.add_edge(VertexId(0), VertexId(1), 1)?;
    b.add_edge(VertexId(1), VertexId(2), 1)?;
    let p3 = b.build_rooted(VertexId(0));
    for rooting in [Rooting::Uniform, Rooting::DegreeBiased] {
        let e = finite_graph_ensemble(&p3, rooting)?;
        println!("P₃ {rooting:?}: stationarity TV = {:.4}", stationarity_test(&e, 1, 1, 0, 0)?.tv);
        let unit = mtp_test(&e, 1, |c: &PairContext| f64::from(c.distance == 1), 0, 0)?;
        println!("   unit transport: sent {:.4}, received {:.4}", unit.sent.value, unit.received.value);
    }
    let gf = FixedEnsemble::grandfather();
    println!("grandfather: stationarity TV {:.4}", stationarity_test(&gf, 3, 3, 0, 0)?.tv);
    println!("grandfather: reversibility TV {:.4}", reversibility_test(&gf, 2, 0, 0)?.tv);
    Ok(())
}
