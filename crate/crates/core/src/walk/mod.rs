//! Simple random walk on multigraphs: a step picks a uniform incident edge,
//! so a neighbor is chosen with probability `multiplicity / degree`.

mod bounds;
mod exact;

use rand::Rng;
use serde::Serialize;

use crate::error::Result;
use crate::graph::{RootedMultigraph, VertexId};

pub use bounds::{
    non_return_fraction, spine_resistance, varopoulos_carne_check, ReturnReport, VaropoulosCarneReport,
};
pub use exact::{
    joint_entropy, marginal_entropy, path_sum_entropy, propagate_distribution, step_entropy, Atom,
    ExactWalk, WalkDistribution, PRUNE_THRESHOLD,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WalkPath {
    pub vertices: Vec<VertexId>,
    /// Seed of the generator that produced the path, when known.
    pub seed: Option<u64>,
}

impl WalkPath {
    pub fn len(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.len() == 1
    }

    pub fn start(&self) -> VertexId {
        self.vertices[0]
    }

    pub fn end(&self) -> VertexId {
        *self.vertices.last().unwrap()
    }

    /// `R_n`: number of distinct vertices visited.
    pub fn range(&self) -> usize {
        let mut v = self.vertices.clone();
        v.sort_unstable();
        v.dedup();
        v.len()
    }

    /// Whether the walk comes back to its start after time 0.
    pub fn returns(&self) -> bool {
        self.vertices[1..].contains(&self.vertices[0])
    }
}

/// One step of the walk from `v`.
pub fn step<R: Rng + ?Sized>(graph: &RootedMultigraph, v: VertexId, rng: &mut R) -> Result<VertexId> {
    graph.random_neighbor(v, rng.random())
}

/// A walk of `n` steps from `start`.
pub fn simulate_path<R: Rng + ?Sized>(
    graph: &RootedMultigraph,
    start: VertexId,
    n: usize,
    rng: &mut R,
) -> Result<WalkPath> {
    let mut vertices = Vec::with_capacity(n + 1);
    vertices.push(start);
    let mut v = start;
    for _ in 0..n {
        v = step(graph, v, rng)?;
        vertices.push(v);
    }
    Ok(WalkPath { vertices, seed: None })
}

/// [`simulate_path`] driven by a ChaCha8 generator seeded with `seed`.
pub fn simulate_seeded(graph: &RootedMultigraph, start: VertexId, n: usize, seed: u64) -> Result<WalkPath> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut path = simulate_path(graph, start, n, &mut rng)?;
    path.seed = Some(seed);
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{grandfather_graph, lattice};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_length_path() {
        let g = lattice(1).unwrap();
        let p = simulate_seeded(&g, g.root(), 0, 1).unwrap();
        assert_eq!(p.vertices, vec![g.root()]);
        assert!(p.is_empty());
    }

    #[test]
    fn consecutive_vertices_are_adjacent() {
        let g = grandfather_graph();
        let p = simulate_seeded(&g, g.root(), 50, 3).unwrap();
        for w in p.vertices.windows(2) {
            assert!(g.multiplicity(w[0], w[1]).unwrap() > 0);
        }
    }

    #[test]
    fn line_returns_half_the_time_after_two_steps() {
        let g = lattice(1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 100_000;
        let hits = (0..n)
            .filter(|_| simulate_path(&g, g.root(), 2, &mut rng).unwrap().end() == g.root())
            .count();
        let p = hits as f64 / n as f64;
        let sigma = (0.25 / n as f64).sqrt();
        assert!((p - 0.5).abs() < 3.0 * sigma, "{p}");
    }
}
