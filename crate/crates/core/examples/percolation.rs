//! Long-range percolation on a one-dimensional box and its degree-biased cluster.

use std::sync::Arc;

use ergolab::generators::{bias_by_degree, cluster_of_origin, long_range_percolation, Ensemble, LrpClusterEnsemble, LrpParams};
use ergolab::stats::growth_estimate;

fn main() -> ergolab::error::Result<()> {
    let params = LrpParams::new(1, 1.0, 1.5, 5_000);
    let g = long_range_percolation(&params, 3)?;
    println!("{} edges on {} sites", g.edge_count(), 2 * params.half_width + 1);
    if let Some(c) = cluster_of_origin(g) {
        println!("origin cluster: {} sites", c.vertices().unwrap().len());
    }
    let biased = bias_by_degree(Arc::new(LrpClusterEnsemble::new(params)?), 20);
    let growth = growth_estimate(&biased, 12, 50, 4)?;
    println!("E log #B(0, n): {:.3?}", growth.mean_log_volume);
    println!("flags: {:?}", biased.flags());
    Ok(())
}
