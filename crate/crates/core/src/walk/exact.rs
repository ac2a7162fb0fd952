use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::graph::{OrbitQuotient, RootedMultigraph, VertexId};
use crate::hash::StableMap;
use crate::numeric::{pairwise_sum, phi};

/// Atoms lighter than this are dropped during propagation (their mass is tracked).
pub const PRUNE_THRESHOLD: f64 = 1e-15;

/// Law of `X_n` as a sparse vector, sorted by vertex id.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkDistribution {
    pub time: u32,
    atoms: Vec<(VertexId, f64)>,
    pruned: f64,
}

impl WalkDistribution {
    pub fn point(v: VertexId) -> Self {
        WalkDistribution { time: 0, atoms: vec![(v, 1.0)], pruned: 0.0 }
    }

    pub fn atoms(&self) -> &[(VertexId, f64)] {
        &self.atoms
    }

    pub fn prob(&self, v: VertexId) -> f64 {
        self.atoms
            .binary_search_by_key(&v, |a| a.0)
            .map_or(0.0, |i| self.atoms[i].1)
    }

    pub fn support_len(&self) -> usize {
        self.atoms.len()
    }

    pub fn total_mass(&self) -> f64 {
        pairwise_sum(&self.atoms.iter().map(|a| a.1).collect::<Vec<_>>())
    }

    /// Mass removed by pruning so far.
    pub fn pruned_mass(&self) -> f64 {
        self.pruned
    }
}

fn prune(acc: StableMap<u64, f64>, pruned: &mut f64) -> Vec<(u64, f64)> {
    let mut out: Vec<(u64, f64)> = Vec::with_capacity(acc.len());
    for (k, p) in acc {
        if p < PRUNE_THRESHOLD {
            *pruned += p;
        } else {
            out.push((k, p));
        }
    }
    out.sort_unstable_by_key(|a| a.0);
    out
}

/// One step of the transition operator applied to `dist`.
pub fn propagate_distribution(graph: &RootedMultigraph, dist: &WalkDistribution) -> Result<WalkDistribution> {
    let mut acc: StableMap<u64, f64> = StableMap::default();
    for &(v, p) in &dist.atoms {
        let nbrs = graph.neighbors(v)?;
        let deg: u64 = nbrs.iter().map(|&(_, m)| m as u64).sum();
        if deg == 0 {
            return Err(Error::InvalidGraph(format!("{v:?} has no edges")));
        }
        for (w, m) in nbrs {
            *acc.entry(w.0).or_default() += p * m as f64 / deg as f64;
        }
    }
    let mut pruned = dist.pruned;
    let atoms = prune(acc, &mut pruned).into_iter().map(|(k, p)| (VertexId(k), p)).collect();
    Ok(WalkDistribution { time: dist.time + 1, atoms, pruned })
}

/// `Σ φ(p)` over the support, in nats.
pub fn marginal_entropy(dist: &WalkDistribution) -> f64 {
    pairwise_sum(&dist.atoms.iter().map(|a| phi(a.1)).collect::<Vec<_>>())
}

/// Entropy of one step from `v`: `Σ_u φ(m(v, u) / deg v)`.
pub fn step_entropy(graph: &RootedMultigraph, v: VertexId) -> Result<f64> {
    let nbrs = graph.neighbors(v)?;
    let deg: u64 = nbrs.iter().map(|&(_, m)| m as u64).sum();
    if deg == 0 {
        return Err(Error::InvalidGraph(format!("{v:?} has no edges")));
    }
    Ok(nbrs.iter().map(|&(_, m)| phi(m as f64 / deg as f64)).sum())
}

/// A class of vertices carrying the same probability: `size` vertices, one
/// of which is `vertex`, with total mass `mass`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub vertex: VertexId,
    pub mass: f64,
    pub size: f64,
}

/// Exact law of the walk, propagated on vertices or, when the graph offers a
/// root-stabilizer quotient and the walk starts at the root, on orbits.
pub struct ExactWalk<'g> {
    graph: &'g RootedMultigraph,
    quotient: Option<&'g dyn OrbitQuotient>,
    time: u32,
    atoms: Vec<(u64, VertexId, f64)>,
    pruned: f64,
}

impl<'g> ExactWalk<'g> {
    /// Starts at `start`, lumping on orbits when that is exact.
    pub fn new(graph: &'g RootedMultigraph, start: VertexId) -> Result<Self> {
        let quotient = if start == graph.root() { graph.quotient() } else { None };
        let key = match quotient {
            Some(q) => q.orbit_of(start)?,
            None => start.0,
        };
        Ok(ExactWalk { graph, quotient, time: 0, atoms: vec![(key, start, 1.0)], pruned: 0.0 })
    }

    /// Starts at `start` without lumping.
    pub fn plain(graph: &'g RootedMultigraph, start: VertexId) -> Self {
        ExactWalk { graph, quotient: None, time: 0, atoms: vec![(start.0, start, 1.0)], pruned: 0.0 }
    }

    pub fn is_lumped(&self) -> bool {
        self.quotient.is_some()
    }

    pub fn time(&self) -> u32 {
        self.time
    }

    pub fn pruned_mass(&self) -> f64 {
        self.pruned
    }

    pub fn atoms(&self) -> Vec<Atom> {
        self.atoms
            .iter()
            .map(|&(key, vertex, mass)| Atom {
                vertex,
                mass,
                size: self.quotient.map_or(1.0, |q| q.orbit_size(key)),
            })
            .collect()
    }

    pub fn total_mass(&self) -> f64 {
        pairwise_sum(&self.atoms.iter().map(|a| a.2).collect::<Vec<_>>())
    }

    pub fn step(&mut self) -> Result<()> {
        let mut acc: StableMap<u64, f64> = StableMap::default();
        for &(_, v, p) in &self.atoms {
            let nbrs = self.graph.neighbors(v)?;
            let deg: u64 = nbrs.iter().map(|&(_, m)| m as u64).sum();
            if deg == 0 {
                return Err(Error::InvalidGraph(format!("{v:?} has no edges")));
            }
            for (w, m) in nbrs {
                let key = match self.quotient {
                    Some(q) => q.orbit_of(w)?,
                    None => w.0,
                };
                *acc.entry(key).or_default() += p * m as f64 / deg as f64;
            }
        }
        let next = prune(acc, &mut self.pruned);
        self.atoms = next
            .into_iter()
            .map(|(k, p)| {
                let rep = match self.quotient {
                    Some(q) => q.representative(k)?,
                    None => VertexId(k),
                };
                Ok((k, rep, p))
            })
            .collect::<Result<_>>()?;
        self.time += 1;
        Ok(())
    }

    /// Entropy of `X_n` in nats.
    pub fn entropy(&self) -> f64 {
        let terms: Vec<f64> = self
            .atoms()
            .iter()
            .map(|a| phi(a.mass) + if a.size > 1.0 { a.mass * a.size.ln() } else { 0.0 })
            .collect();
        pairwise_sum(&terms)
    }

    /// `E[step_entropy(X_n)]`.
    pub fn expected_step_entropy(&self) -> Result<f64> {
        let terms: Vec<f64> = self
            .atoms
            .iter()
            .map(|&(_, v, p)| Ok(p * step_entropy(self.graph, v)?))
            .collect::<Result<_>>()?;
        Ok(pairwise_sum(&terms))
    }

    /// The plain vertex law (unavailable once lumped).
    pub fn distribution(&self) -> Option<WalkDistribution> {
        if self.quotient.is_some() {
            return None;
        }
        Some(WalkDistribution {
            time: self.time,
            atoms: self.atoms.iter().map(|&(_, v, p)| (v, p)).collect(),
            pruned: self.pruned,
        })
    }
}

/// `H_a^b(G, root)`: entropy of `(X_a, …, X_b)` via the Markov chain rule,
/// `H_a + Σ_{i=a}^{b-1} E[step_entropy(X_i)]`.
pub fn joint_entropy(graph: &RootedMultigraph, root: VertexId, a: u32, b: u32) -> Result<f64> {
    if a > b {
        return Err(Error::param(format!("need a <= b, got a={a}, b={b}")));
    }
    let mut walk = ExactWalk::new(graph, root)?;
    while walk.time() < a {
        walk.step()?;
    }
    let mut terms = vec![walk.entropy()];
    while walk.time() < b {
        terms.push(walk.expected_step_entropy()?);
        walk.step()?;
    }
    Ok(pairwise_sum(&terms))
}

/// `H_a^b` from the definition: the joint law of `(X_a, …, X_b)` obtained by
/// enumerating every path of length `b`. Exponential; for cross-checks only.
pub fn path_sum_entropy(graph: &RootedMultigraph, root: VertexId, a: u32, b: u32, max_paths: usize) -> Result<f64> {
    let mut paths: Vec<(Vec<VertexId>, f64)> = vec![(vec![root], 1.0)];
    for _ in 0..b {
        let mut next = Vec::new();
        for (p, w) in &paths {
            let v = *p.last().unwrap();
            let nbrs = graph.neighbors(v)?;
            let deg: u64 = nbrs.iter().map(|&(_, m)| m as u64).sum();
            for (u, m) in nbrs {
                let mut q = p.clone();
                q.push(u);
                next.push((q, w * m as f64 / deg as f64));
            }
        }
        if next.len() > max_paths {
            return Err(Error::param(format!("more than {max_paths} paths")));
        }
        paths = next;
    }
    let mut law: BTreeMap<Vec<VertexId>, f64> = BTreeMap::new();
    for (p, w) in paths {
        *law.entry(p[a as usize..].to_vec()).or_default() += w;
    }
    Ok(pairwise_sum(&law.values().map(|&p| phi(p)).collect::<Vec<_>>()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{grandfather_graph, lattice, reinforced_canopy_finite};
    use crate::graph::FiniteGraphBuilder;

    #[test]
    fn line_first_step() {
        let g = lattice(1).unwrap();
        let d = propagate_distribution(&g, &WalkDistribution::point(g.root())).unwrap();
        assert_eq!(d.support_len(), 2);
        assert!(d.atoms().iter().all(|a| a.1 == 0.5));
        assert!((marginal_entropy(&d) - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn grandfather_returns_with_probability_one_eighth() {
        let g = grandfather_graph();
        let mut w = ExactWalk::new(&g, g.root()).unwrap();
        assert!(w.is_lumped());
        w.step().unwrap();
        assert!((w.entropy() - 8f64.ln()).abs() < 1e-12);
        w.step().unwrap();
        let back: f64 = w.atoms().iter().filter(|a| a.vertex == g.root()).map(|a| a.mass).sum();
        assert!((back - 0.125).abs() < 1e-15);
    }

    #[test]
    fn lumped_and_plain_walks_agree() {
        let g = grandfather_graph();
        let mut lumped = ExactWalk::new(&g, g.root()).unwrap();
        let mut plain = ExactWalk::plain(&g, g.root());
        for _ in 0..4 {
            lumped.step().unwrap();
            plain.step().unwrap();
            assert!((lumped.entropy() - plain.entropy()).abs() < 1e-12);
            assert!((lumped.total_mass() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn step_entropy_with_multiplicities() {
        let mut b = FiniteGraphBuilder::new("m");
        b.add_edge(VertexId(0), VertexId(1), 1).unwrap();
        b.add_edge(VertexId(0), VertexId(2), 3).unwrap();
        let g = b.build_rooted(VertexId(0));
        let h = step_entropy(&g, VertexId(0)).unwrap();
        assert!((h - (phi(0.25) + phi(0.75))).abs() < 1e-15);
        assert_eq!(step_entropy(&g, VertexId(2)).unwrap(), 0.0);
    }

    #[test]
    fn chain_rule_matches_path_sum() {
        let g = reinforced_canopy_finite(4).unwrap();
        for v in g.vertices().unwrap().into_iter().take(5) {
            for (a, b) in [(0, 3), (1, 3), (2, 2), (0, 1)] {
                let chain = joint_entropy(&g, v, a, b).unwrap();
                let direct = path_sum_entropy(&g, v, a, b, 10_000).unwrap();
                assert!((chain - direct).abs() < 1e-10, "{a} {b}: {chain} vs {direct}");
            }
        }
    }
}
