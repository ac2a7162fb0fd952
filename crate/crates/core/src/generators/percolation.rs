//! Long-range percolation on the box `[-L, L]^d`.
//!
//! Every unordered pair `{x, y}` is an edge independently with probability
//! `min(1, β |x - y|^{-s})`. Pairs are grouped by offset and sampled with
//! geometric skips, so the cost is proportional to the number of edges.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{NeighborOracle, RootedMultigraph, VertexId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    #[default]
    Euclidean,
    L1,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LrpParams {
    pub dim: usize,
    pub beta: f64,
    pub s_exp: f64,
    pub half_width: i64,
    #[serde(default)]
    pub norm: Norm,
}

impl LrpParams {
    pub fn new(dim: usize, beta: f64, s_exp: f64, half_width: i64) -> Self {
        LrpParams { dim, beta, s_exp, half_width, norm: Norm::Euclidean }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=2).contains(&self.dim) {
            return Err(Error::param("long-range percolation supports d = 1 or 2"));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) || !(self.s_exp > 0.0 && self.s_exp.is_finite()) {
            return Err(Error::param("need beta >= 0 and s_exp > 0"));
        }
        if self.half_width < 1 {
            return Err(Error::param("box half-width must be at least 1"));
        }
        Ok(())
    }

    /// Warnings for parameters outside `d < s < 2d`.
    pub fn flags(&self) -> Vec<String> {
        let d = self.dim as f64;
        if self.s_exp <= d || self.s_exp >= 2.0 * d {
            vec![format!("s_exp={} outside ({d}, {})", self.s_exp, 2.0 * d)]
        } else {
            Vec::new()
        }
    }

    pub fn edge_probability(&self, offset: &[i64]) -> f64 {
        let len = match self.norm {
            Norm::Euclidean => offset.iter().map(|&x| (x * x) as f64).sum::<f64>().sqrt(),
            Norm::L1 => offset.iter().map(|x| x.abs() as f64).sum(),
        };
        (self.beta * len.powf(-self.s_exp)).min(1.0)
    }

    fn side(&self) -> i64 {
        2 * self.half_width + 1
    }

    fn vertex_count(&self) -> usize {
        (self.side() as usize).pow(self.dim as u32)
    }

    /// Linear index of a box point.
    pub fn index_of(&self, x: &[i64]) -> u64 {
        x.iter().fold(0u64, |acc, &c| acc * self.side() as u64 + (c + self.half_width) as u64)
    }

    pub fn point_of(&self, mut i: u64) -> Vec<i64> {
        let mut x = vec![0; self.dim];
        for c in x.iter_mut().rev() {
            *c = (i % self.side() as u64) as i64 - self.half_width;
            i /= self.side() as u64;
        }
        x
    }
}

/// Compressed adjacency of one percolation sample, restricted to a vertex set.
pub struct LrpGraph {
    params: LrpParams,
    offsets: Vec<usize>,
    targets: Vec<u32>,
    members: Option<Vec<VertexId>>,
    origin: VertexId,
}

impl LrpGraph {
    pub fn params(&self) -> &LrpParams {
        &self.params
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    fn row(&self, i: usize) -> &[u32] {
        &self.targets[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn has_edge(&self, u: u64, v: u64) -> bool {
        self.row(u as usize).binary_search(&(v as u32)).is_ok()
    }
}

impl NeighborOracle for LrpGraph {
    fn kind(&self) -> &str {
        "lrp"
    }

    fn origin(&self) -> VertexId {
        self.origin
    }

    fn neighbors(&self, v: VertexId) -> Result<Vec<(VertexId, u32)>> {
        if v.0 as usize >= self.offsets.len() - 1 {
            return Err(Error::UnknownVertex(v));
        }
        Ok(self.row(v.0 as usize).iter().map(|&w| (VertexId(w as u64), 1)).collect())
    }

    fn degree(&self, v: VertexId) -> Result<u64> {
        if v.0 as usize >= self.offsets.len() - 1 {
            return Err(Error::UnknownVertex(v));
        }
        Ok(self.row(v.0 as usize).len() as u64)
    }

    fn vertices(&self) -> Option<Vec<VertexId>> {
        Some(match &self.members {
            Some(m) => m.clone(),
            None => (0..self.offsets.len() as u64 - 1).map(VertexId).collect(),
        })
    }

    fn describe(&self, v: VertexId) -> String {
        format!("{:?}", self.params.point_of(v.0))
    }
}

/// Offsets `δ` with `δ > 0` lexicographically, one per unordered direction.
fn half_space_offsets(dim: usize, l: i64) -> Vec<Vec<i64>> {
    let w = 2 * l;
    match dim {
        1 => (1..=w).map(|k| vec![k]).collect(),
        _ => {
            let mut out = Vec::new();
            for a in 0..=w {
                for b in -w..=w {
                    if a > 0 || b > 0 {
                        out.push(vec![a, b]);
                    }
                }
            }
            out
        }
    }
}

/// Samples the percolation configuration on the whole box.
pub fn long_range_percolation(params: &LrpParams, seed: u64) -> Result<LrpGraph> {
    params.validate()?;
    check_size(params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges = sample_edges(params, &mut rng, None);
    Ok(build_csr(params, edges))
}

/// Like [`long_range_percolation`], with the origin's edges drawn separately
/// and redrawn until `accept(degree)` holds. The origin's edges are
/// independent of all others, so this samples the configuration reweighted
/// by the acceptance probability of the origin degree.
pub fn long_range_percolation_rooted(
    params: &LrpParams,
    seed: u64,
    max_attempts: u64,
    accept: &mut dyn FnMut(u64) -> bool,
) -> Result<LrpGraph> {
    params.validate()?;
    check_size(params)?;
    let origin = params.index_of(&vec![0; params.dim]) as u32;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = sample_edges(params, &mut rng, Some(origin));
    let l = params.half_width;
    let offsets: Vec<Vec<i64>> = match params.dim {
        1 => (-l..=l).filter(|&a| a != 0).map(|a| vec![a]).collect(),
        _ => (-l..=l).flat_map(|a| (-l..=l).map(move |b| vec![a, b])).filter(|v| v != &[0, 0]).collect(),
    };
    let probs: Vec<f64> = offsets.iter().map(|d| params.edge_probability(d)).collect();
    let mut local = Vec::new();
    for _ in 0..max_attempts {
        local.clear();
        for (d, &p) in offsets.iter().zip(&probs) {
            if rng.random::<f64>() < p {
                local.push((origin, params.index_of(d) as u32));
            }
        }
        if accept(local.len() as u64) {
            edges.extend_from_slice(&local);
            return Ok(build_csr(params, edges));
        }
    }
    Err(Error::RejectionExhausted(max_attempts))
}

fn check_size(params: &LrpParams) -> Result<()> {
    if params.vertex_count() > u32::MAX as usize {
        return Err(Error::param("box too large"));
    }
    Ok(())
}

/// Every edge of the box, or every edge not touching `skip`.
fn sample_edges(params: &LrpParams, rng: &mut ChaCha8Rng, skip: Option<u32>) -> Vec<(u32, u32)> {
    let l = params.half_width;
    let mut edges: Vec<(u32, u32)> = Vec::new();
    for delta in half_space_offsets(params.dim, l) {
        let p = params.edge_probability(&delta);
        if p <= 0.0 {
            continue;
        }
        // Base points x with x and x + δ both in the box form a rectangle.
        let ranges: Vec<(i64, i64)> =
            delta.iter().map(|&dc| ((-l).max(-l - dc), l.min(l - dc))).collect();
        if ranges.iter().any(|(lo, hi)| lo > hi) {
            continue;
        }
        let widths: Vec<u64> = ranges.iter().map(|(lo, hi)| (hi - lo + 1) as u64).collect();
        let count: u64 = widths.iter().product();
        let point = |mut j: u64| {
            let mut x = vec![0i64; params.dim];
            for c in (0..params.dim).rev() {
                x[c] = ranges[c].0 + (j % widths[c]) as i64;
                j /= widths[c];
            }
            x
        };
        let mut push = |j: u64| {
            let x = point(j);
            let y: Vec<i64> = x.iter().zip(&delta).map(|(a, b)| a + b).collect();
            let e = (params.index_of(&x) as u32, params.index_of(&y) as u32);
            if skip.is_none_or(|o| e.0 != o && e.1 != o) {
                edges.push(e);
            }
        };
        if p >= 1.0 {
            (0..count).for_each(&mut push);
            continue;
        }
        let log_q = (-p).ln_1p();
        let mut j: u64 = 0;
        loop {
            let u: f64 = rng.random();
            let skip = ((1.0 - u).ln() / log_q).floor();
            if skip >= (count - j) as f64 {
                break;
            }
            j += skip as u64;
            push(j);
            j += 1;
            if j >= count {
                break;
            }
        }
    }
    edges
}

fn build_csr(params: &LrpParams, edges: Vec<(u32, u32)>) -> LrpGraph {
    let n = params.vertex_count();
    let mut deg = vec![0usize; n + 1];
    for &(a, b) in &edges {
        deg[a as usize + 1] += 1;
        deg[b as usize + 1] += 1;
    }
    for i in 0..n {
        deg[i + 1] += deg[i];
    }
    let offsets = deg;
    let mut fill = offsets.clone();
    let mut targets = vec![0u32; edges.len() * 2];
    for (a, b) in edges {
        targets[fill[a as usize]] = b;
        fill[a as usize] += 1;
        targets[fill[b as usize]] = a;
        fill[b as usize] += 1;
    }
    for i in 0..n {
        targets[offsets[i]..offsets[i + 1]].sort_unstable();
    }
    let origin = VertexId(params.index_of(&vec![0; params.dim]));
    LrpGraph { params: *params, offsets, targets, members: None, origin }
}

/// The component of the origin, rooted at the origin; `None` when the origin
/// is isolated.
pub fn cluster_of_origin(mut graph: LrpGraph) -> Option<RootedMultigraph> {
    let o = graph.origin.0 as usize;
    if graph.row(o).is_empty() {
        return None;
    }
    let mut seen = vec![false; graph.offsets.len() - 1];
    seen[o] = true;
    let mut stack = vec![o as u32];
    let mut members = Vec::new();
    while let Some(v) = stack.pop() {
        members.push(VertexId(v as u64));
        for &w in graph.row(v as usize) {
            if !seen[w as usize] {
                seen[w as usize] = true;
                stack.push(w);
            }
        }
    }
    members.sort_unstable();
    // Components are closed under adjacency, so only the vertex list changes.
    graph.members = Some(members);
    Some(RootedMultigraph::from_oracle(graph))
}

/// The origin cluster of a fresh percolation sample.
pub fn lrp_cluster(params: &LrpParams, seed: u64) -> Result<Option<RootedMultigraph>> {
    Ok(cluster_of_origin(long_range_percolation(params, seed)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beta_zero_isolates_the_origin() {
        let p = LrpParams::new(1, 0.0, 1.5, 20);
        assert!(lrp_cluster(&p, 3).unwrap().is_none());
    }

    #[test]
    fn unit_beta_in_one_dimension_keeps_the_nearest_neighbor_path() {
        let p = LrpParams::new(1, 1.0, 1.5, 50);
        let g = long_range_percolation(&p, 9).unwrap();
        for x in -50..50 {
            assert!(g.has_edge(p.index_of(&[x]), p.index_of(&[x + 1])));
        }
        let c = cluster_of_origin(g).unwrap();
        assert_eq!(c.vertices().unwrap().len(), 101);
    }

    #[test]
    fn capped_probabilities() {
        let p = LrpParams::new(2, 3.0, 3.0, 4);
        assert_eq!(p.edge_probability(&[1, 0]), 1.0);
        assert!((p.edge_probability(&[2, 0]) - 3.0 / 8.0).abs() < 1e-12);
    }

    #[test]
    fn adjacency_is_symmetric_in_two_dimensions() {
        let p = LrpParams::new(2, 0.8, 3.0, 6);
        let g = long_range_percolation(&p, 5).unwrap();
        for u in 0..p.vertex_count() as u64 {
            for (w, _) in g.neighbors(VertexId(u)).unwrap() {
                assert!(g.has_edge(w.0, u));
            }
        }
    }

    #[test]
    fn same_seed_same_sample() {
        let p = LrpParams::new(1, 0.7, 1.5, 200);
        let a = long_range_percolation(&p, 42).unwrap();
        let b = long_range_percolation(&p, 42).unwrap();
        assert_eq!(a.targets, b.targets);
    }
}
