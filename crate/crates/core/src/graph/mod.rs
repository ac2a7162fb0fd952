//! Rooted, locally finite multigraphs with lazy expansion.
//!
//! A [`RootedMultigraph`] is a root plus a shared [`NeighborOracle`]. Finite
//! graphs keep an explicit adjacency map; infinite constructions compute
//! neighborhoods on demand from construction coordinates (see [`lazy`]).
//! Re-rooting is free: it clones the handle and swaps the root.

mod finite;
pub mod lazy;
pub mod signature;

use std::collections::VecDeque;
use std::fmt;
use std::io::{BufRead, Write};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hash::{StableMap, StableSet};

pub use finite::{FiniteGraph, FiniteGraphBuilder};
pub use lazy::{Construction, LazyGraph};
pub use signature::{
    ball_signature, local_matching_radius, BallSignature, LocalGraph, SignatureRegistry,
};

/// Opaque 64-bit vertex token, stable within one graph instance.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VertexId(pub u64);

impl fmt::Debug for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{:016x}", self.0)
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Identifier of an orbit of the root stabilizer (see [`OrbitQuotient`]).
pub type OrbitLabel = u64;

/// Exact lumping of a rooted graph under automorphisms fixing its root.
///
/// The law of the walk started at the root is constant on orbits, so the
/// walk can be propagated on orbit labels instead of vertices.
pub trait OrbitQuotient: Send + Sync {
    fn orbit_of(&self, v: VertexId) -> Result<OrbitLabel>;
    fn representative(&self, label: OrbitLabel) -> Result<VertexId>;
    /// Number of vertices in the orbit (may exceed `u64`, hence `f64`).
    fn orbit_size(&self, label: OrbitLabel) -> f64;
}

/// Source of adjacency for a (possibly infinite) multigraph.
pub trait NeighborOracle: Send + Sync {
    /// Stable construction tag, e.g. `"grandfather"`.
    fn kind(&self) -> &str;

    /// The default root of the construction.
    fn origin(&self) -> VertexId;

    /// Neighbors of `v` with edge multiplicities. Sorted by id, no duplicates.
    fn neighbors(&self, v: VertexId) -> Result<Vec<(VertexId, u32)>>;

    fn degree(&self, v: VertexId) -> Result<u64> {
        Ok(self.neighbors(v)?.iter().map(|&(_, m)| m as u64).sum())
    }

    /// The endpoint of the incident edge selected by a uniform 64-bit `ticket`.
    fn random_neighbor(&self, v: VertexId, ticket: u64) -> Result<VertexId> {
        let nbrs = self.neighbors(v)?;
        pick_by_multiplicity(&nbrs, ticket).ok_or_else(|| Error::InvalidGraph(format!("{v:?} has no edges")))
    }

    /// Closed-form graph distance, when the construction has one.
    fn distance(&self, _u: VertexId, _v: VertexId) -> Option<Result<u64>> {
        None
    }

    /// Closed-form `#B(v, r)`, when the construction has one.
    fn ball_volume(&self, _v: VertexId, _r: u32) -> Option<Result<u128>> {
        None
    }

    /// Root-stabilizer lumping, valid only for walks started at [`Self::origin`].
    fn quotient(&self) -> Option<&dyn OrbitQuotient> {
        None
    }

    /// All vertices, for finite graphs.
    fn vertices(&self) -> Option<Vec<VertexId>> {
        None
    }

    /// Construction-specific integer label (depth in canopy trees).
    fn label(&self, _v: VertexId) -> Option<i64> {
        None
    }

    fn describe(&self, v: VertexId) -> String {
        format!("{v:?}")
    }
}

/// Maps a uniform `ticket` to an entry chosen with probability proportional
/// to its multiplicity.
pub fn pick_by_multiplicity<T: Copy>(items: &[(T, u32)], ticket: u64) -> Option<T> {
    let deg: u64 = items.iter().map(|&(_, m)| m as u64).sum();
    if deg == 0 {
        return None;
    }
    let mut k = ((ticket as u128 * deg as u128) >> 64) as u64;
    for &(w, m) in items {
        if k < m as u64 {
            return Some(w);
        }
        k -= m as u64;
    }
    None
}

#[derive(Clone)]
pub struct RootedMultigraph {
    root: VertexId,
    oracle: Arc<dyn NeighborOracle>,
}

impl fmt::Debug for RootedMultigraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RootedMultigraph")
            .field("kind", &self.oracle.kind())
            .field("root", &self.root)
            .finish()
    }
}

/// Safety valve for breadth-first searches on infinite graphs.
const BFS_VERTEX_LIMIT: usize = 50_000_000;

impl RootedMultigraph {
    pub fn new(oracle: Arc<dyn NeighborOracle>) -> Self {
        let root = oracle.origin();
        RootedMultigraph { root, oracle }
    }

    pub fn from_oracle<O: NeighborOracle + 'static>(oracle: O) -> Self {
        Self::new(Arc::new(oracle))
    }

    pub fn root(&self) -> VertexId {
        self.root
    }

    pub fn kind(&self) -> &str {
        self.oracle.kind()
    }

    pub fn oracle(&self) -> &Arc<dyn NeighborOracle> {
        &self.oracle
    }

    /// Same graph, different root.
    pub fn with_root(&self, root: VertexId) -> Self {
        RootedMultigraph { root, oracle: Arc::clone(&self.oracle) }
    }

    pub fn neighbors(&self, v: VertexId) -> Result<Vec<(VertexId, u32)>> {
        self.oracle.neighbors(v)
    }

    pub fn degree(&self, v: VertexId) -> Result<u64> {
        self.oracle.degree(v)
    }

    pub fn random_neighbor(&self, v: VertexId, ticket: u64) -> Result<VertexId> {
        self.oracle.random_neighbor(v, ticket)
    }

    pub fn multiplicity(&self, u: VertexId, v: VertexId) -> Result<u32> {
        Ok(self
            .neighbors(u)?
            .iter()
            .find(|&&(w, _)| w == v)
            .map(|&(_, m)| m)
            .unwrap_or(0))
    }

    pub fn label(&self, v: VertexId) -> Option<i64> {
        self.oracle.label(v)
    }

    pub fn describe(&self, v: VertexId) -> String {
        self.oracle.describe(v)
    }

    /// Orbit lumping for walks from the current root, if one exists.
    pub fn quotient(&self) -> Option<&dyn OrbitQuotient> {
        if self.root == self.oracle.origin() {
            self.oracle.quotient()
        } else {
            None
        }
    }

    pub fn is_finite(&self) -> bool {
        self.oracle.vertices().is_some()
    }

    pub fn vertices(&self) -> Option<Vec<VertexId>> {
        self.oracle.vertices()
    }

    /// Breadth-first layers around `center` up to radius `r`.
    ///
    /// Returns vertices in BFS order together with their distances.
    pub fn bfs(&self, center: VertexId, r: u32) -> Result<(Vec<VertexId>, Vec<u32>)> {
        let mut order = vec![center];
        let mut dist = vec![0u32];
        let mut seen: StableSet<VertexId> = StableSet::default();
        seen.insert(center);
        let mut head = 0;
        while head < order.len() {
            let (v, d) = (order[head], dist[head]);
            head += 1;
            if d == r {
                continue;
            }
            for (w, _) in self.neighbors(v)? {
                if seen.insert(w) {
                    order.push(w);
                    dist.push(d + 1);
                }
            }
            if order.len() > BFS_VERTEX_LIMIT {
                return Err(Error::horizon(format!(
                    "breadth-first search around {center:?} exceeded {BFS_VERTEX_LIMIT} vertices"
                )));
            }
        }
        Ok((order, dist))
    }

    /// Induced sub-multigraph on `{v : d(center, v) <= r}`, rooted at `center`.
    pub fn ball(&self, center: VertexId, r: u32) -> Result<RootedMultigraph> {
        let (order, _) = self.bfs(center, r)?;
        let members: StableSet<VertexId> = order.iter().copied().collect();
        let mut builder = FiniteGraphBuilder::new(format!("ball({})", self.kind()));
        builder.add_vertex(center);
        for &v in &order {
            builder.add_vertex(v);
            for (w, m) in self.neighbors(v)? {
                if v < w && members.contains(&w) {
                    builder.add_edge(v, w, m)?;
                }
            }
            if let Some(l) = self.label(v) {
                builder.set_label(v, l);
            }
        }
        Ok(builder.build_rooted(center))
    }

    /// Exact graph distance. Multiplicities are ignored.
    pub fn distance(&self, u: VertexId, v: VertexId) -> Result<u64> {
        if u == v {
            return Ok(0);
        }
        if let Some(d) = self.oracle.distance(u, v) {
            return d;
        }
        let mut seen: StableMap<VertexId, u64> = StableMap::default();
        seen.insert(u, 0);
        let mut queue = VecDeque::from([u]);
        while let Some(x) = queue.pop_front() {
            let d = seen[&x];
            for (w, _) in self.neighbors(x)? {
                if w == v {
                    return Ok(d + 1);
                }
                if !seen.contains_key(&w) {
                    seen.insert(w, d + 1);
                    queue.push_back(w);
                }
            }
            if seen.len() > BFS_VERTEX_LIMIT {
                return Err(Error::horizon(format!("{v:?} not reached from {u:?}")));
            }
        }
        Err(Error::InvalidGraph(format!("{v:?} is not connected to {u:?}")))
    }

    /// `#B(center, r)`, via a closed form when the construction offers one.
    pub fn ball_volume(&self, center: VertexId, r: u32) -> Result<u128> {
        if let Some(v) = self.oracle.ball_volume(center, r) {
            return v;
        }
        Ok(self.bfs(center, r)?.0.len() as u128)
    }

    /// `#B(center, n)` for every `n` in `0..=r_max`.
    pub fn ball_volumes(&self, center: VertexId, r_max: u32) -> Result<Vec<u128>> {
        if self.oracle.ball_volume(center, 0).is_some() {
            return (0..=r_max).map(|r| self.ball_volume(center, r)).collect();
        }
        let (_, dist) = self.bfs(center, r_max)?;
        let mut layers = vec![0u128; r_max as usize + 1];
        for d in dist {
            layers[d as usize] += 1;
        }
        let mut acc = 0;
        Ok(layers
            .into_iter()
            .map(|c| {
                acc += c;
                acc
            })
            .collect())
    }

    /// Writes `root <id>` followed by one `u v multiplicity` line per edge.
    pub fn write_edge_list<W: Write>(&self, mut w: W) -> Result<()> {
        let vertices = self
            .vertices()
            .ok_or_else(|| Error::param("edge lists need a finite graph; take a ball first"))?;
        writeln!(w, "root {}", self.root.0)?;
        let mut edges = Vec::new();
        for v in vertices {
            for (u, m) in self.neighbors(v)? {
                if v < u {
                    edges.push((v, u, m));
                }
            }
        }
        edges.sort();
        for (a, b, m) in edges {
            writeln!(w, "{} {} {}", a.0, b.0, m)?;
        }
        Ok(())
    }

    pub fn read_edge_list<R: BufRead>(r: R) -> Result<RootedMultigraph> {
        let mut root = None;
        let mut builder = FiniteGraphBuilder::new("edge-list");
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse = |s: &str| {
                s.parse::<u64>().map_err(|e| Error::Parse { line: i + 1, msg: e.to_string() })
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            match fields.as_slice() {
                ["root", id] => {
                    let id = VertexId(parse(id)?);
                    builder.add_vertex(id);
                    root = Some(id);
                }
                [u, v, m] => {
                    let m = parse(m)?;
                    let m = u32::try_from(m)
                        .map_err(|_| Error::Parse { line: i + 1, msg: "multiplicity overflow".into() })?;
                    builder
                        .add_edge(VertexId(parse(u)?), VertexId(parse(v)?), m)
                        .map_err(|e| Error::Parse { line: i + 1, msg: e.to_string() })?;
                }
                _ => {
                    return Err(Error::Parse {
                        line: i + 1,
                        msg: format!("expected `root <id>` or `u v multiplicity`, got `{line}`"),
                    })
                }
            }
        }
        let root = root.ok_or(Error::Parse { line: 0, msg: "missing `root` header".into() })?;
        Ok(builder.build_rooted(root))
    }
}

/// Exact graph distance between `u` and `v`.
pub fn graph_distance(graph: &RootedMultigraph, u: VertexId, v: VertexId) -> Result<u64> {
    graph.distance(u, v)
}

/// Radius-`r` ball around `center`.
pub fn ball(graph: &RootedMultigraph, center: VertexId, r: u32) -> Result<RootedMultigraph> {
    graph.ball(center, r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> RootedMultigraph {
        let mut b = FiniteGraphBuilder::new("p3");
        b.add_edge(VertexId(0), VertexId(1), 1).unwrap();
        b.add_edge(VertexId(1), VertexId(2), 1).unwrap();
        b.build_rooted(VertexId(0))
    }

    #[test]
    fn radius_zero_ball_is_the_root() {
        let g = path3();
        let b = g.ball(VertexId(1), 0).unwrap();
        assert_eq!(b.vertices().unwrap(), vec![VertexId(1)]);
        assert_eq!(b.root(), VertexId(1));
    }

    #[test]
    fn bfs_distance_on_a_path() {
        let g = path3();
        assert_eq!(g.distance(VertexId(0), VertexId(2)).unwrap(), 2);
        assert_eq!(g.distance(VertexId(2), VertexId(2)).unwrap(), 0);
        assert_eq!(g.ball_volumes(VertexId(0), 3).unwrap(), vec![1, 2, 3, 3]);
    }

    #[test]
    fn edge_list_round_trip() {
        let mut b = FiniteGraphBuilder::new("m");
        b.add_edge(VertexId(5), VertexId(9), 3).unwrap();
        b.add_edge(VertexId(9), VertexId(2), 1).unwrap();
        let g = b.build_rooted(VertexId(9));
        let mut buf = Vec::new();
        g.write_edge_list(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text, "root 9\n2 9 1\n5 9 3\n");
        let h = RootedMultigraph::read_edge_list(&buf[..]).unwrap();
        assert_eq!(h.root(), VertexId(9));
        assert_eq!(h.multiplicity(VertexId(9), VertexId(5)).unwrap(), 3);
        assert_eq!(h.degree(VertexId(9)).unwrap(), 4);
    }

    #[test]
    fn malformed_edge_list_is_rejected() {
        let err = RootedMultigraph::read_edge_list("root 1\n1 1 2\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err = RootedMultigraph::read_edge_list("1 2 1\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
    }
}
