//! Canonical codes for rooted and bi-rooted balls.
//!
//! A ball is first summarized by multiplicity-aware color refinement
//! (1-dimensional Weisfeiler–Leman) seeded with the root marks. Refinement
//! can merge non-isomorphic graphs, so every refinement hash is a bucket in a
//! [`SignatureRegistry`]; inside a bucket, classes are separated by an exact
//! individualization/refinement isomorphism search. The code of a ball is
//! `(radius, refinement hash, index inside the bucket)`, hence two balls
//! registered in the same registry have equal codes iff they are isomorphic.

use std::fmt;
use std::hash::Hasher;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::hash::{combine, StableHasher, StableMap};

use super::{RootedMultigraph, VertexId};

const ROOT_MARK: u64 = 0x5157_0001;
const SECOND_MARK: u64 = 0x5157_0002;
const PLAIN_MARK: u64 = 0x5157_0000;
const INDIVIDUALIZED: u64 = 0x1D1D_1D1D;

/// Finite multigraph on `0..n` with one or two marked roots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalGraph {
    pub adj: Vec<Vec<(u32, u32)>>,
    pub root: u32,
    pub second: Option<u32>,
}

impl LocalGraph {
    pub fn from_edges(n: usize, edges: &[(u32, u32, u32)], root: u32, second: Option<u32>) -> Self {
        let mut adj = vec![Vec::new(); n];
        for &(u, v, m) in edges {
            adj[u as usize].push((v, m));
            adj[v as usize].push((u, m));
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        LocalGraph { adj, root, second }
    }

    /// The radius-`r` ball around `center` as a local graph (center = index 0).
    pub fn from_ball(
        graph: &RootedMultigraph,
        center: VertexId,
        r: u32,
        second: Option<VertexId>,
    ) -> Result<(LocalGraph, Vec<VertexId>)> {
        let (order, _) = graph.bfs(center, r)?;
        let index: StableMap<VertexId, u32> =
            order.iter().enumerate().map(|(i, &v)| (v, i as u32)).collect();
        let mut adj = Vec::with_capacity(order.len());
        for &v in &order {
            let mut list: Vec<(u32, u32)> = graph
                .neighbors(v)?
                .into_iter()
                .filter_map(|(w, m)| index.get(&w).map(|&i| (i, m)))
                .collect();
            list.sort_unstable();
            adj.push(list);
        }
        let second = match second {
            None => None,
            Some(s) => Some(*index.get(&s).ok_or_else(|| {
                Error::param(format!("second root {s:?} lies outside the radius-{r} ball"))
            })?),
        };
        Ok((LocalGraph { adj, root: 0, second }, order))
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    fn initial_colors(&self) -> Vec<u64> {
        let mut colors = vec![PLAIN_MARK; self.adj.len()];
        colors[self.root as usize] = ROOT_MARK;
        if let Some(s) = self.second {
            // A bi-rooted graph with coinciding roots gets a third mark.
            colors[s as usize] = if s == self.root { ROOT_MARK ^ SECOND_MARK } else { SECOND_MARK };
        }
        colors
    }

    /// Stable coloring of the plain refinement.
    pub fn stable_colors(&self) -> Vec<u64> {
        let mut colors = self.initial_colors();
        refine(&self.adj, &mut colors);
        colors
    }

    /// Isomorphism-invariant 128-bit refinement hash.
    pub fn refinement_hash(&self, colors: &[u64]) -> u128 {
        let mut sorted = colors.to_vec();
        sorted.sort_unstable();
        let mut lo = StableHasher::with_seed(1);
        let mut hi = StableHasher::with_seed(2);
        for h in [&mut lo, &mut hi] {
            h.write_u64(sorted.len() as u64);
            for &c in &sorted {
                h.write_u64(c);
            }
        }
        ((hi.finish() as u128) << 64) | lo.finish() as u128
    }

    /// Exact isomorphism test preserving the root marks and multiplicities.
    pub fn is_isomorphic(&self, other: &LocalGraph) -> bool {
        if self.len() != other.len() || self.second.is_some() != other.second.is_some() {
            return false;
        }
        let a = self.stable_colors();
        let b = other.stable_colors();
        isomorphic_from(self, other, a, b)
    }
}

fn distinct(colors: &[u64]) -> usize {
    let mut v = colors.to_vec();
    v.sort_unstable();
    v.dedup();
    v.len()
}

/// Refines `colors` to the coarsest equitable partition below it.
fn refine(adj: &[Vec<(u32, u32)>], colors: &mut Vec<u64>) {
    let mut classes = distinct(colors);
    let mut buf: Vec<u64> = Vec::new();
    loop {
        let next: Vec<u64> = adj
            .iter()
            .enumerate()
            .map(|(v, list)| {
                buf.clear();
                buf.extend(list.iter().map(|&(u, m)| combine(colors[u as usize], m as u64)));
                buf.sort_unstable();
                let mut h = StableHasher::with_seed(colors[v]);
                h.write_u64(buf.len() as u64);
                for &x in &buf {
                    h.write_u64(x);
                }
                h.finish()
            })
            .collect();
        let c = distinct(&next);
        if c == classes {
            return;
        }
        classes = c;
        *colors = next;
    }
}

fn sorted(colors: &[u64]) -> Vec<u64> {
    let mut v = colors.to_vec();
    v.sort_unstable();
    v
}

/// Backtracking search for an isomorphism compatible with the given colorings.
fn isomorphic_from(g: &LocalGraph, h: &LocalGraph, cg: Vec<u64>, ch: Vec<u64>) -> bool {
    if sorted(&cg) != sorted(&ch) {
        return false;
    }
    // Target cell: the smallest color with more than one member.
    let sc = sorted(&cg);
    let target = sc.windows(2).find(|w| w[0] == w[1]).map(|w| w[0]);
    match target {
        None => {
            // Discrete: the coloring fixes the bijection.
            let mut by_color: StableMap<u64, u32> = StableMap::default();
            for (i, &c) in ch.iter().enumerate() {
                by_color.insert(c, i as u32);
            }
            let map: Vec<u32> = cg.iter().map(|c| by_color[c]).collect();
            g.adj.iter().enumerate().all(|(v, list)| {
                let mut image: Vec<(u32, u32)> =
                    list.iter().map(|&(u, m)| (map[u as usize], m)).collect();
                image.sort_unstable();
                image == h.adj[map[v] as usize]
            })
        }
        Some(color) => {
            let v = cg.iter().position(|&c| c == color).unwrap();
            let mut cg1 = cg.clone();
            cg1[v] = combine(color, INDIVIDUALIZED);
            refine(&g.adj, &mut cg1);
            for (u, _) in ch.iter().enumerate().filter(|&(_, &c)| c == color) {
                let mut ch1 = ch.clone();
                ch1[u] = combine(color, INDIVIDUALIZED);
                refine(&h.adj, &mut ch1);
                if isomorphic_from(g, h, cg1.clone(), ch1) {
                    return true;
                }
            }
            false
        }
    }
}

/// Canonical code of a rooted (or bi-rooted) radius-`r` ball.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BallSignature {
    pub radius: u32,
    pub code: Vec<u8>,
}

impl BallSignature {
    pub fn hex(&self) -> String {
        hex::encode(&self.code)
    }
}

impl fmt::Debug for BallSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "sig[r={}:{}]", self.radius, &self.hex()[8..20])
    }
}

impl Serialize for BallSignature {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.hex())
    }
}

struct Representative {
    graph: LocalGraph,
    colors: Vec<u64>,
}

/// Registry of isomorphism classes, one bucket per refinement hash.
#[derive(Default)]
pub struct SignatureRegistry {
    buckets: Mutex<StableMap<u128, Vec<Arc<Representative>>>>,
}

impl SignatureRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Process-wide registry used by [`ball_signature`].
    pub fn global() -> &'static SignatureRegistry {
        static GLOBAL: OnceLock<SignatureRegistry> = OnceLock::new();
        GLOBAL.get_or_init(SignatureRegistry::new)
    }

    pub fn class_count(&self) -> usize {
        self.buckets.lock().unwrap().values().map(Vec::len).sum()
    }

    pub fn code_of(&self, graph: LocalGraph, radius: u32) -> BallSignature {
        let colors = graph.stable_colors();
        let hash = graph.refinement_hash(&colors);
        let matches = |rep: &Representative| {
            rep.graph.len() == graph.len()
                && rep.graph.second.is_some() == graph.second.is_some()
                && isomorphic_from(&graph, &rep.graph, colors.clone(), rep.colors.clone())
        };
        let seen: Vec<Arc<Representative>> =
            self.buckets.lock().unwrap().get(&hash).cloned().unwrap_or_default();
        let index = match seen.iter().position(|r| matches(r)) {
            Some(i) => i,
            None => {
                let mut buckets = self.buckets.lock().unwrap();
                let bucket = buckets.entry(hash).or_default();
                // Another thread may have registered the class meanwhile.
                match bucket[seen.len()..].iter().position(|r| matches(r)) {
                    Some(i) => seen.len() + i,
                    None => {
                        bucket.push(Arc::new(Representative { graph, colors }));
                        bucket.len() - 1
                    }
                }
            }
        };
        let mut code = Vec::with_capacity(24);
        code.extend_from_slice(&radius.to_le_bytes());
        code.extend_from_slice(&hash.to_le_bytes());
        code.extend_from_slice(&(index as u32).to_le_bytes());
        BallSignature { radius, code }
    }

    pub fn signature(
        &self,
        graph: &RootedMultigraph,
        center: VertexId,
        r: u32,
        second_root: Option<VertexId>,
    ) -> Result<BallSignature> {
        let (local, _) = LocalGraph::from_ball(graph, center, r, second_root)?;
        Ok(self.code_of(local, r))
    }
}

/// Canonical code of the radius-`r` ball around `center` (bi-rooted when
/// `second_root` is given), registered in the global registry.
pub fn ball_signature(
    graph: &RootedMultigraph,
    center: VertexId,
    r: u32,
    second_root: Option<VertexId>,
) -> Result<BallSignature> {
    SignatureRegistry::global().signature(graph, center, r, second_root)
}

/// Largest `r <= r_max` such that the rooted `r`-balls of both graphs agree.
pub fn local_matching_radius(g1: &RootedMultigraph, g2: &RootedMultigraph, r_max: u32) -> Result<u32> {
    for r in 1..=r_max {
        if ball_signature(g1, g1.root(), r, None)? != ball_signature(g2, g2.root(), r, None)? {
            return Ok(r - 1);
        }
    }
    Ok(r_max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle(n: u32) -> LocalGraph {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n, 1)).collect();
        LocalGraph::from_edges(n as usize, &edges, 0, None)
    }

    #[test]
    fn refinement_cannot_split_regular_graphs_but_the_registry_can() {
        // C6 and two disjoint triangles are both 2-regular: refinement agrees
        // when unrooted, so the rooted versions collide only through the
        // registry. Rooting separates them anyway via distances; use
        // unrooted-equivalent marks to force a same-bucket comparison.
        let c6 = cycle(6);
        let tri = LocalGraph::from_edges(
            6,
            &[(0, 1, 1), (1, 2, 1), (2, 0, 1), (3, 4, 1), (4, 5, 1), (5, 3, 1)],
            0,
            None,
        );
        assert!(!c6.is_isomorphic(&tri));
        let reg = SignatureRegistry::new();
        let a = reg.code_of(c6.clone(), 1);
        let b = reg.code_of(tri, 1);
        let c = reg.code_of(c6, 1);
        assert_ne!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn multiplicities_are_part_of_the_class() {
        let a = LocalGraph::from_edges(2, &[(0, 1, 1)], 0, None);
        let b = LocalGraph::from_edges(2, &[(0, 1, 2)], 0, None);
        assert!(!a.is_isomorphic(&b));
        let reg = SignatureRegistry::new();
        assert_ne!(reg.code_of(a, 1), reg.code_of(b, 1));
    }

    #[test]
    fn bi_rooted_order_matters() {
        // Path 0-1-2 rooted at the end vs rooted at the middle, second root adjacent.
        let end = LocalGraph::from_edges(3, &[(0, 1, 1), (1, 2, 1)], 0, Some(1));
        let mid = LocalGraph::from_edges(3, &[(0, 1, 1), (0, 2, 1)], 0, Some(1));
        assert!(!end.is_isomorphic(&mid));
        let flipped = LocalGraph::from_edges(3, &[(0, 1, 1), (1, 2, 1)], 1, Some(0));
        assert!(!end.is_isomorphic(&flipped));
    }
}
