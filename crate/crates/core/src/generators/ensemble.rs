//! Random rooted graphs as seedable samplers.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{LazyGraph, RootedMultigraph};
use crate::seed::derive_seed;

use super::canopy::{limit_root_depth_law, reinforce_edges, CanopyTree};
use super::galton_watson::{AugmentedGwTree, Offspring};
use super::percolation::{cluster_of_origin, long_range_percolation_rooted, lrp_cluster, LrpParams};

/// A law on rooted graphs, sampled deterministically from a seed.
pub trait Ensemble: Send + Sync {
    fn kind(&self) -> String;

    fn sample(&self, seed: u64) -> Result<RootedMultigraph>;

    /// Replica `replica` of a run seeded with `master`.
    fn sample_replica(&self, master: u64, replica: u64) -> Result<RootedMultigraph> {
        self.sample(derive_seed(master, replica))
    }

    /// The law as finitely many weighted atoms, when it has one.
    fn exact_law(&self) -> Option<Result<Vec<(RootedMultigraph, f64)>>> {
        None
    }

    /// A single graph with probability one.
    fn is_deterministic(&self) -> bool {
        false
    }

    fn degree_bound(&self) -> Option<u64> {
        None
    }

    /// Warnings about truncation, degenerate parameters or rejected samples.
    fn flags(&self) -> Vec<String> {
        Vec::new()
    }

    /// A sample reweighted by `P(accept(root degree))`, redrawing only the
    /// root's own edges between attempts. `None` when the root's edges are
    /// not independent of the rest and whole-graph rejection is needed.
    fn sample_root_filtered(
        &self,
        _seed: u64,
        _accept: &mut dyn FnMut(u64) -> bool,
    ) -> Option<Result<RootedMultigraph>> {
        None
    }
}

type GraphFactory = Arc<dyn Fn() -> RootedMultigraph + Send + Sync>;

/// A fixed rooted graph (transitive examples and single finite graphs).
///
/// Lazy graphs are rebuilt for every sample so that intern tables do not
/// accumulate across replicas; ids agree between instances.
pub struct FixedEnsemble {
    graph: RootedMultigraph,
    make: Option<GraphFactory>,
    degree_bound: Option<u64>,
}

impl FixedEnsemble {
    pub fn new(graph: RootedMultigraph, degree_bound: Option<u64>) -> Self {
        FixedEnsemble { graph, make: None, degree_bound }
    }

    pub fn lazy(make: impl Fn() -> RootedMultigraph + Send + Sync + 'static, degree_bound: Option<u64>) -> Self {
        FixedEnsemble { graph: make(), make: Some(Arc::new(make)), degree_bound }
    }

    pub fn grandfather() -> Self {
        Self::lazy(super::grandfather_graph, Some(8))
    }

    pub fn regular_tree() -> Self {
        Self::lazy(super::regular_tree, Some(3))
    }

    pub fn lattice(dim: usize) -> Result<Self> {
        super::lattice(dim)?;
        Ok(Self::lazy(move || super::lattice(dim).expect("dimension checked"), Some(2 * dim as u64)))
    }

    pub fn graph(&self) -> &RootedMultigraph {
        &self.graph
    }
}

impl Ensemble for FixedEnsemble {
    fn kind(&self) -> String {
        self.graph.kind().to_string()
    }

    fn sample(&self, _seed: u64) -> Result<RootedMultigraph> {
        Ok(match &self.make {
            Some(f) => f(),
            None => self.graph.clone(),
        })
    }

    fn exact_law(&self) -> Option<Result<Vec<(RootedMultigraph, f64)>>> {
        Some(Ok(vec![(self.graph.clone(), 1.0)]))
    }

    fn is_deterministic(&self) -> bool {
        true
    }

    fn degree_bound(&self) -> Option<u64> {
        self.degree_bound
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rooting {
    Uniform,
    DegreeBiased,
}

/// A finite graph re-rooted at random.
pub struct FiniteEnsemble {
    graph: RootedMultigraph,
    rooting: Rooting,
    atoms: Vec<(RootedMultigraph, f64)>,
    cumulative: Vec<f64>,
    max_degree: u64,
}

impl Ensemble for FiniteEnsemble {
    fn kind(&self) -> String {
        let tag = match self.rooting {
            Rooting::Uniform => "uniform",
            Rooting::DegreeBiased => "degree_biased",
        };
        format!("finite({},{tag})", self.graph.kind())
    }

    fn sample(&self, seed: u64) -> Result<RootedMultigraph> {
        let u: f64 = ChaCha8Rng::seed_from_u64(seed).random();
        let i = self.cumulative.partition_point(|&c| c <= u).min(self.atoms.len() - 1);
        Ok(self.atoms[i].0.clone())
    }

    fn exact_law(&self) -> Option<Result<Vec<(RootedMultigraph, f64)>>> {
        Some(Ok(self.atoms.clone()))
    }

    fn degree_bound(&self) -> Option<u64> {
        Some(self.max_degree)
    }
}

/// The finite graph re-rooted uniformly or proportionally to degree.
pub fn finite_graph_ensemble(graph: &RootedMultigraph, rooting: Rooting) -> Result<FiniteEnsemble> {
    let vertices = graph
        .vertices()
        .ok_or_else(|| Error::param("finite_graph_ensemble needs a finite graph"))?;
    let mut atoms = Vec::with_capacity(vertices.len());
    let mut max_degree = 0;
    for v in vertices {
        let d = graph.degree(v)?;
        if d == 0 && rooting == Rooting::DegreeBiased {
            return Err(Error::InvalidGraph(format!("isolated vertex {v:?}")));
        }
        max_degree = max_degree.max(d);
        let w = match rooting {
            Rooting::Uniform => 1.0,
            Rooting::DegreeBiased => d as f64,
        };
        atoms.push((graph.with_root(v), w));
    }
    let total: f64 = atoms.iter().map(|a| a.1).sum();
    let mut acc = 0.0;
    let mut cumulative = Vec::with_capacity(atoms.len());
    for a in atoms.iter_mut() {
        a.1 /= total;
        acc += a.1;
        cumulative.push(acc);
    }
    Ok(FiniteEnsemble { graph: graph.clone(), rooting, atoms, cumulative, max_degree })
}

/// Augmented Galton–Watson trees.
pub struct AugmentedGwEnsemble {
    offspring: Offspring,
    depth_horizon: u32,
}

impl AugmentedGwEnsemble {
    pub fn new(offspring: Offspring, depth_horizon: u32) -> Self {
        AugmentedGwEnsemble { offspring, depth_horizon }
    }

    pub fn offspring(&self) -> &Offspring {
        &self.offspring
    }
}

impl Ensemble for AugmentedGwEnsemble {
    fn kind(&self) -> String {
        "augmented_gw".into()
    }

    fn sample(&self, seed: u64) -> Result<RootedMultigraph> {
        Ok(AugmentedGwTree::new(self.offspring.clone(), seed, self.depth_horizon).into_graph())
    }

    fn degree_bound(&self) -> Option<u64> {
        Some(self.offspring.probs().len() as u64)
    }

    fn flags(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.offspring.is_degenerate() {
            out.push("degenerate-offspring".into());
        }
        if self.offspring.is_truncated() {
            out.push(format!("offspring-truncated:{:.3e}", self.offspring.truncated_mass));
        }
        out
    }
}

/// Augmented GW trees with the given offspring law.
pub fn augmented_gw_ensemble(offspring: &[f64], depth_horizon: u32) -> Result<AugmentedGwEnsemble> {
    Ok(AugmentedGwEnsemble::new(Offspring::new(offspring)?, depth_horizon))
}

/// The origin cluster of long-range percolation (origin isolation rejected).
pub struct LrpClusterEnsemble {
    params: LrpParams,
    isolated: AtomicU64,
}

impl LrpClusterEnsemble {
    pub fn new(params: LrpParams) -> Result<Self> {
        params.validate()?;
        Ok(LrpClusterEnsemble { params, isolated: AtomicU64::new(0) })
    }

    pub fn params(&self) -> &LrpParams {
        &self.params
    }
}

const MAX_ATTEMPTS: u64 = 100_000;

impl Ensemble for LrpClusterEnsemble {
    fn kind(&self) -> String {
        "lrp_cluster".into()
    }

    fn sample(&self, seed: u64) -> Result<RootedMultigraph> {
        for attempt in 0..MAX_ATTEMPTS {
            let s = if attempt == 0 { seed } else { derive_seed(seed, attempt) };
            if let Some(g) = lrp_cluster(&self.params, s)? {
                return Ok(g);
            }
            self.isolated.fetch_add(1, Ordering::Relaxed);
        }
        Err(Error::RejectionExhausted(MAX_ATTEMPTS))
    }

    fn sample_root_filtered(&self, seed: u64, accept: &mut dyn FnMut(u64) -> bool) -> Option<Result<RootedMultigraph>> {
        // Conditioning on a non-isolated origin is one more filter.
        let g = long_range_percolation_rooted(&self.params, seed, MAX_ATTEMPTS, &mut |d| d > 0 && accept(d));
        Some(g.map(|g| cluster_of_origin(g).expect("origin has an edge")))
    }

    fn flags(&self) -> Vec<String> {
        let mut out = self.params.flags();
        let n = self.isolated.load(Ordering::Relaxed);
        if n > 0 {
            out.push(format!("isolated-origin-resampled:{n}"));
        }
        out
    }
}

/// How the root depth of a canopy-tree sample is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CanopyRoot {
    Depth(u32),
    /// The `n → ∞` limit of the degree-biased root of `T^R_n`, truncated.
    LimitLaw { k_max: u32 },
}

/// `T_∞` or `T^R_∞` rooted on the spine.
pub struct CanopyEnsemble {
    reinforced: bool,
    depth_horizon: u32,
    root: CanopyRoot,
    law: Option<(Vec<f64>, f64)>,
    template: CanopyTree,
}

impl CanopyEnsemble {
    pub fn new(reinforced: bool, depth_horizon: u32, root: CanopyRoot) -> Result<Self> {
        let law = match root {
            CanopyRoot::Depth(d) if d > depth_horizon => {
                return Err(Error::horizon("root depth beyond the depth horizon"))
            }
            CanopyRoot::Depth(_) => None,
            CanopyRoot::LimitLaw { k_max } => {
                if k_max > depth_horizon {
                    return Err(Error::horizon("limit law truncation beyond the depth horizon"));
                }
                Some(limit_root_depth_law(k_max)?)
            }
        };
        let template = CanopyTree::infinite(depth_horizon, 0)?;
        Ok(CanopyEnsemble { reinforced, depth_horizon, root, law, template })
    }

    pub fn root_depth(&self, seed: u64) -> u32 {
        match (&self.root, &self.law) {
            (CanopyRoot::Depth(d), _) => *d,
            (_, Some((w, _))) => {
                let mut u: f64 = ChaCha8Rng::seed_from_u64(seed).random();
                for (k, p) in w.iter().enumerate() {
                    if u < *p {
                        return k as u32;
                    }
                    u -= p;
                }
                w.len() as u32 - 1
            }
            _ => unreachable!(),
        }
    }

    /// A fresh copy of the tree rooted at the spine vertex of depth `depth`.
    pub fn tree_at_depth(&self, depth: u32) -> Result<RootedMultigraph> {
        // Rooting the construction itself (rather than re-rooting) keeps the
        // orbit quotient available for exact walks.
        let tree = RootedMultigraph::new(Arc::new(LazyGraph::new(self.template.clone().with_root_depth(depth)?)));
        if self.reinforced {
            reinforce_edges(&tree)
        } else {
            Ok(tree)
        }
    }
}

impl Ensemble for CanopyEnsemble {
    fn kind(&self) -> String {
        if self.reinforced {
            "reinforced_canopy_infinite".into()
        } else {
            "canopy_infinite".into()
        }
    }

    fn sample(&self, seed: u64) -> Result<RootedMultigraph> {
        self.tree_at_depth(self.root_depth(seed))
    }

    fn flags(&self) -> Vec<String> {
        let mut out = vec![format!("depth-horizon:{}", self.depth_horizon)];
        if let Some((_, tail)) = &self.law {
            out.push(format!("root-law-truncated:{tail:.3e}"));
        }
        out
    }
}

/// Acceptance–rejection reweighting of an ensemble by `deg(ρ)` or `1/deg(ρ)`.
pub struct DegreeReweighted {
    inner: Arc<dyn Ensemble>,
    cap: u64,
    inverse: bool,
    proposals: AtomicU64,
    cap_exceeded: AtomicU64,
}

impl DegreeReweighted {
    pub fn proposals(&self) -> u64 {
        self.proposals.load(Ordering::Relaxed)
    }

    pub fn cap_exceeded(&self) -> u64 {
        self.cap_exceeded.load(Ordering::Relaxed)
    }
}

/// Biases `inner` by the root degree, rejecting proposals of degree above `cap`.
pub fn bias_by_degree(inner: Arc<dyn Ensemble>, cap: u64) -> DegreeReweighted {
    DegreeReweighted {
        inner,
        cap: cap.max(1),
        inverse: false,
        proposals: AtomicU64::new(0),
        cap_exceeded: AtomicU64::new(0),
    }
}

/// Biases `inner` by the inverse root degree.
pub fn unbias_by_degree(inner: Arc<dyn Ensemble>, cap: u64) -> DegreeReweighted {
    DegreeReweighted { inverse: true, ..bias_by_degree(inner, cap) }
}

impl Ensemble for DegreeReweighted {
    fn kind(&self) -> String {
        let tag = if self.inverse { "unbiased" } else { "biased" };
        format!("{tag}({})", self.inner.kind())
    }

    fn sample(&self, seed: u64) -> Result<RootedMultigraph> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut filter = |d: u64| {
            self.proposals.fetch_add(1, Ordering::Relaxed);
            if d > self.cap {
                self.cap_exceeded.fetch_add(1, Ordering::Relaxed);
                return false;
            }
            let accept = if self.inverse { 1.0 / d.max(1) as f64 } else { d as f64 / self.cap as f64 };
            rng.random::<f64>() < accept
        };
        if let Some(g) = self.inner.sample_root_filtered(derive_seed(seed, u64::MAX), &mut filter) {
            return g;
        }
        for attempt in 0..MAX_ATTEMPTS {
            self.proposals.fetch_add(1, Ordering::Relaxed);
            let g = self.inner.sample(derive_seed(seed, attempt))?;
            let d = g.degree(g.root())?;
            if d > self.cap {
                self.cap_exceeded.fetch_add(1, Ordering::Relaxed);
                continue;
            }
            let accept = if self.inverse { 1.0 / d.max(1) as f64 } else { d as f64 / self.cap as f64 };
            if rng.random::<f64>() < accept {
                return Ok(g);
            }
        }
        Err(Error::RejectionExhausted(MAX_ATTEMPTS))
    }

    fn exact_law(&self) -> Option<Result<Vec<(RootedMultigraph, f64)>>> {
        let atoms = match self.inner.exact_law()? {
            Ok(a) => a,
            Err(e) => return Some(Err(e)),
        };
        let mut out = Vec::with_capacity(atoms.len());
        for (g, w) in atoms {
            let d = match g.degree(g.root()) {
                Ok(d) => d as f64,
                Err(e) => return Some(Err(e)),
            };
            out.push((g, if self.inverse { w / d } else { w * d }));
        }
        let total: f64 = out.iter().map(|a| a.1).sum();
        out.iter_mut().for_each(|a| a.1 /= total);
        Some(Ok(out))
    }

    fn is_deterministic(&self) -> bool {
        self.inner.is_deterministic()
    }

    fn degree_bound(&self) -> Option<u64> {
        Some(self.inner.degree_bound().map_or(self.cap, |b| b.min(self.cap)))
    }

    fn flags(&self) -> Vec<String> {
        let mut out = self.inner.flags();
        let n = self.cap_exceeded();
        if n > 0 {
            out.push(format!("degree-cap-exceeded:{n}/{}", self.proposals()));
        }
        out
    }
}

/// `T^R_n` as an explicit finite graph (depth labels kept).
pub fn reinforced_canopy_finite(n: u32) -> Result<RootedMultigraph> {
    let t = CanopyTree::finite(n)?.into_graph();
    let whole = t.ball(t.root(), n)?;
    reinforce_edges(&whole)
}

/// `T_n` as an explicit finite graph (depth labels kept).
pub fn canopy_finite_graph(n: u32) -> Result<RootedMultigraph> {
    let t = CanopyTree::finite(n)?.into_graph();
    t.ball(t.root(), n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{FiniteGraphBuilder, VertexId};

    fn single_edge() -> RootedMultigraph {
        let mut b = FiniteGraphBuilder::new("edge");
        b.add_edge(VertexId(0), VertexId(1), 1).unwrap();
        b.build_rooted(VertexId(0))
    }

    #[test]
    fn single_edge_roots_are_equally_likely() {
        for rooting in [Rooting::Uniform, Rooting::DegreeBiased] {
            let e = finite_graph_ensemble(&single_edge(), rooting).unwrap();
            let law = e.exact_law().unwrap().unwrap();
            assert_eq!(law.iter().map(|a| a.1).collect::<Vec<_>>(), vec![0.5, 0.5]);
        }
    }

    #[test]
    fn reinforced_t3_degree_biased_depth_law() {
        let g = reinforced_canopy_finite(3).unwrap();
        let e = finite_graph_ensemble(&g, Rooting::DegreeBiased).unwrap();
        let mut by_depth = [0.0; 4];
        for (h, w) in e.exact_law().unwrap().unwrap() {
            by_depth[h.label(h.root()).unwrap() as usize] += w;
        }
        assert!((by_depth[1] - 20.0 / 76.0).abs() < 1e-12);
    }

    #[test]
    fn canopy_sample_root_depth() {
        let e = CanopyEnsemble::new(true, 60, CanopyRoot::Depth(7)).unwrap();
        let g = e.sample(0).unwrap();
        assert_eq!(g.label(g.root()), Some(7));
    }

    #[test]
    fn biasing_a_uniform_finite_ensemble_gives_the_degree_biased_one() {
        let mut b = FiniteGraphBuilder::new("star");
        for i in 1..4 {
            b.add_edge(VertexId(0), VertexId(i), i as u32).unwrap();
        }
        let g = b.build_rooted(VertexId(0));
        let uni: Arc<dyn Ensemble> = Arc::new(finite_graph_ensemble(&g, Rooting::Uniform).unwrap());
        let biased = bias_by_degree(uni, 10).exact_law().unwrap().unwrap();
        let direct = finite_graph_ensemble(&g, Rooting::DegreeBiased).unwrap().exact_law().unwrap().unwrap();
        for ((a, p), (b, q)) in biased.iter().zip(&direct) {
            assert_eq!(a.root(), b.root());
            assert!((p - q).abs() < 1e-15);
        }
    }
}
