//! Canopy trees built from the `ε/ξ` recursion, their edge reinforcement and
//! the depth law of a degree-biased root.
//!
//! `ε_1 = 1` and `ε_{k+1} = 1` when `ξ_k > k^4`, else `2`, with
//! `ξ_k = ε_1 ⋯ ε_k`. In `T_n` a vertex at depth `k >= 1` has `ε_k` children;
//! the top vertex has depth `n` and leaves have depth `0`. `T_∞` is the
//! one-ended limit seen from the top.
//!
//! Coordinates are `(depth, index)`: the vertices at depth `d` below the spine
//! vertex `(D, 0)` are numbered `0..ξ_D/ξ_d`, the parent of `(d, i)` is
//! `(d + 1, i / ε_{d+1})` and its children are `(d - 1, i ε_d + c)`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::graph::{Construction, LazyGraph, NeighborOracle, OrbitLabel, OrbitQuotient, RootedMultigraph, VertexId};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpsilonSequence {
    /// `epsilons[k]` is `ε_k`; index 0 is unused and stored as 1.
    epsilons: Vec<u8>,
    /// `xis[k]` is `ξ_k`, with `ξ_0 = 1`.
    xis: Vec<u128>,
}

impl EpsilonSequence {
    pub fn new(k_max: usize) -> Result<Self> {
        if k_max == 0 {
            return Err(Error::param("k_max must be at least 1"));
        }
        let mut epsilons = vec![1u8, 1u8];
        let mut xis = vec![1u128, 1u128];
        for k in 1..k_max {
            let k4 = (k as u128).pow(4);
            let eps = if xis[k] > k4 { 1 } else { 2 };
            epsilons.push(eps);
            let next = xis[k]
                .checked_mul(eps as u128)
                .ok_or_else(|| Error::param(format!("ξ overflows u128 at k = {}", k + 1)))?;
            xis.push(next);
        }
        Ok(EpsilonSequence { epsilons, xis })
    }

    pub fn k_max(&self) -> usize {
        self.epsilons.len() - 1
    }

    /// `ε_k` for `1 <= k <= k_max`.
    pub fn epsilon(&self, k: usize) -> u8 {
        self.epsilons[k]
    }

    /// `ξ_k` for `-1 <= k <= k_max` (both `ξ_{-1}` and `ξ_0` are 1).
    pub fn xi(&self, k: i64) -> u128 {
        if k <= 0 {
            1
        } else {
            self.xis[k as usize]
        }
    }

    pub fn epsilons(&self) -> &[u8] {
        &self.epsilons[1..]
    }

    pub fn xis(&self) -> &[u128] {
        &self.xis[1..]
    }

    /// `(min, max)` of `ξ_k / k^4` over `1 <= k <= k_max`.
    pub fn fitted_constants(&self) -> (f64, f64) {
        (1..=self.k_max())
            .map(|k| self.xis[k] as f64 / (k as f64).powi(4))
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), r| (lo.min(r), hi.max(r)))
    }
}

/// The `ε/ξ` sequence up to `k_max`.
pub fn epsilon_sequence(k_max: usize) -> Result<EpsilonSequence> {
    EpsilonSequence::new(k_max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CanopyCoord {
    pub depth: u32,
    pub index: u128,
}

/// `T_n` (`height = Some(n)`) or `T_∞` (`height = None`).
#[derive(Debug, Clone)]
pub struct CanopyTree {
    seq: Arc<EpsilonSequence>,
    height: Option<u32>,
    depth_horizon: u32,
    root_depth: u32,
}

impl CanopyTree {
    pub fn finite(n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("T_n needs n >= 1"));
        }
        Ok(CanopyTree {
            seq: Arc::new(EpsilonSequence::new(n as usize)?),
            height: Some(n),
            depth_horizon: n,
            root_depth: n,
        })
    }

    /// `T_∞` materializable down from depth `depth_horizon`, rooted at the
    /// spine vertex of depth `root_depth`.
    pub fn infinite(depth_horizon: u32, root_depth: u32) -> Result<Self> {
        if root_depth > depth_horizon {
            return Err(Error::horizon(format!("root depth {root_depth} beyond horizon {depth_horizon}")));
        }
        Ok(CanopyTree {
            seq: Arc::new(EpsilonSequence::new(depth_horizon as usize + 1)?),
            height: None,
            depth_horizon,
            root_depth,
        })
    }

    pub fn with_root_depth(mut self, depth: u32) -> Result<Self> {
        if depth > self.depth_horizon {
            return Err(Error::horizon(format!("root depth {depth} beyond horizon {}", self.depth_horizon)));
        }
        self.root_depth = depth;
        Ok(self)
    }

    pub fn sequence(&self) -> &EpsilonSequence {
        &self.seq
    }

    pub fn height(&self) -> Option<u32> {
        self.height
    }

    fn eps(&self, k: u32) -> u128 {
        self.seq.epsilon(k as usize) as u128
    }

    fn parent(&self, v: &CanopyCoord) -> Result<Option<CanopyCoord>> {
        match self.height {
            Some(n) if v.depth >= n => Ok(None),
            None if v.depth >= self.depth_horizon => Err(Error::horizon(format!(
                "T_∞ materialized only up to depth {}",
                self.depth_horizon
            ))),
            _ => Ok(Some(CanopyCoord { depth: v.depth + 1, index: v.index / self.eps(v.depth + 1) })),
        }
    }

    fn children(&self, v: &CanopyCoord) -> impl Iterator<Item = CanopyCoord> + '_ {
        let v = *v;
        let count = if v.depth == 0 { 0 } else { self.eps(v.depth) };
        (0..count).map(move |c| CanopyCoord { depth: v.depth - 1, index: v.index * self.eps(v.depth) + c })
    }

    /// Descendants of a depth-`w` vertex at distance at most `m` (itself included).
    fn descendants_within(&self, w: u32, m: i64) -> u128 {
        if m < 0 {
            return 0;
        }
        let lo = (w as i64 - m).max(0);
        (lo..=w as i64).map(|k| self.seq.xi(w as i64) / self.seq.xi(k)).sum()
    }

    /// Every vertex of `T_n`, level by level from the top.
    pub fn for_each_vertex(&self, mut f: impl FnMut(&CanopyCoord) -> Result<()>) -> Result<()> {
        let n = self.height.ok_or_else(|| Error::param("T_∞ cannot be enumerated"))?;
        let mut level = vec![CanopyCoord { depth: n, index: 0 }];
        loop {
            let mut next = Vec::new();
            for v in &level {
                f(v)?;
                next.extend(self.children(v));
            }
            if next.is_empty() {
                return Ok(());
            }
            level = next;
        }
    }

    pub fn into_graph(self) -> RootedMultigraph {
        RootedMultigraph::from_oracle(LazyGraph::new(self))
    }
}

impl Construction for CanopyTree {
    type Coord = CanopyCoord;

    fn kind(&self) -> &str {
        if self.height.is_some() {
            "canopy_finite"
        } else {
            "canopy_infinite"
        }
    }

    fn origin(&self) -> CanopyCoord {
        CanopyCoord { depth: self.root_depth, index: 0 }
    }

    fn neighbors(&self, v: &CanopyCoord) -> Result<Vec<(CanopyCoord, u32)>> {
        if let Some(n) = self.height {
            if v.depth > n || v.index >= self.seq.xi(n as i64) / self.seq.xi(v.depth as i64) {
                return Err(Error::InvalidGraph(format!("{v:?} is not a vertex of T_{n}")));
            }
        }
        let mut out: Vec<(CanopyCoord, u32)> = self.children(v).map(|c| (c, 1)).collect();
        if let Some(p) = self.parent(v)? {
            out.push((p, 1));
        }
        Ok(out)
    }

    fn distance(&self, u: &CanopyCoord, v: &CanopyCoord) -> Option<Result<u64>> {
        let (mut a, mut b) = (*u, *v);
        let mut steps = 0u64;
        let climb = |x: &mut CanopyCoord| {
            *x = CanopyCoord { depth: x.depth + 1, index: x.index / self.eps(x.depth + 1) };
        };
        while a.depth < b.depth {
            climb(&mut a);
            steps += 1;
        }
        while b.depth < a.depth {
            climb(&mut b);
            steps += 1;
        }
        while a != b {
            if self.height.is_none() && a.depth >= self.depth_horizon {
                return Some(Err(Error::horizon("confluent beyond the depth horizon")));
            }
            climb(&mut a);
            climb(&mut b);
            steps += 2;
        }
        Some(Ok(steps))
    }

    fn ball_volume(&self, v: &CanopyCoord, r: u32) -> Option<Result<u128>> {
        let top = match self.height {
            Some(n) => n,
            None => {
                if v.depth + r > self.depth_horizon {
                    return Some(Err(Error::horizon(format!(
                        "ball of radius {r} at depth {} exceeds the depth horizon {}",
                        v.depth, self.depth_horizon
                    ))));
                }
                u32::MAX
            }
        };
        let (d, r) = (v.depth, r as i64);
        let mut total = self.descendants_within(d, r);
        for t in 1..=r {
            let w = d as i64 + t;
            if w > top as i64 {
                break;
            }
            total += self.descendants_within(w as u32, r - t)
                - self.descendants_within(w as u32 - 1, r - t - 1);
        }
        Some(Ok(total))
    }

    fn label(&self, v: &CanopyCoord) -> Option<i64> {
        Some(v.depth as i64)
    }

    // The subtree below a vertex depends only on its depth, so the
    // stabilizer of a spine root (index 0) acts transitively on the vertices
    // of a given depth `w` whose confluent with the root has depth `a`.
    fn orbit_of(&self, v: &CanopyCoord) -> Option<OrbitLabel> {
        let mut a = v.depth.max(self.root_depth);
        let top = self.height.unwrap_or(self.depth_horizon);
        while v.index >= self.seq.xi(a as i64) / self.seq.xi(v.depth as i64) {
            a += 1;
            if a > top {
                return None;
            }
        }
        Some(((v.depth as u64) << 32) | a as u64)
    }

    fn orbit_representative(&self, label: OrbitLabel) -> Option<CanopyCoord> {
        let (w, a) = ((label >> 32) as u32, label as u32);
        if a == self.root_depth || a == w {
            return Some(CanopyCoord { depth: w, index: 0 });
        }
        // First depth-w descendant of the second child of the depth-a ancestor.
        (self.eps(a) == 2).then(|| CanopyCoord {
            depth: w,
            index: self.seq.xi(a as i64 - 1) / self.seq.xi(w as i64),
        })
    }

    fn orbit_size(&self, label: OrbitLabel) -> f64 {
        let (w, a) = ((label >> 32) as i64, (label as u32) as i64);
        let xi = |k: i64| self.seq.xi(k);
        if a == self.root_depth as i64 {
            (xi(a) / xi(w)) as f64
        } else if a == w {
            1.0
        } else {
            ((xi(a) - xi(a - 1)) / xi(w)) as f64
        }
    }
}

/// `T_n` rooted at its top vertex, or `T_∞` (when `n` is `None`) rooted at
/// its depth-0 spine vertex and materializable up to `depth_horizon`.
pub fn canopy_tree(n: Option<u32>, depth_horizon: u32) -> Result<RootedMultigraph> {
    Ok(match n {
        Some(n) => CanopyTree::finite(n)?.into_graph(),
        None => CanopyTree::infinite(depth_horizon, 0)?.into_graph(),
    })
}

/// Multiplies the multiplicity of every depth-`k` edge by `k^2`, where the
/// depth of an edge is the larger label of its endpoints.
pub struct Reinforced {
    inner: Arc<dyn NeighborOracle>,
    kind: String,
}

impl Reinforced {
    fn weight(&self, u: VertexId, v: VertexId) -> Result<u32> {
        let du = self.inner.label(u);
        let dv = self.inner.label(v);
        match (du, dv) {
            (Some(a), Some(b)) => {
                let k = a.max(b);
                u32::try_from(k * k).map_err(|_| Error::param(format!("edge depth {k} too large")))
            }
            _ => Err(Error::InvalidGraph("reinforcement needs depth labels".into())),
        }
    }
}

impl NeighborOracle for Reinforced {
    fn kind(&self) -> &str {
        &self.kind
    }

    fn origin(&self) -> VertexId {
        self.inner.origin()
    }

    fn neighbors(&self, v: VertexId) -> Result<Vec<(VertexId, u32)>> {
        self.inner
            .neighbors(v)?
            .into_iter()
            .map(|(w, m)| Ok((w, m * self.weight(v, w)?)))
            .collect()
    }

    fn distance(&self, u: VertexId, v: VertexId) -> Option<Result<u64>> {
        self.inner.distance(u, v)
    }

    fn ball_volume(&self, v: VertexId, r: u32) -> Option<Result<u128>> {
        self.inner.ball_volume(v, r)
    }

    /// Multiplicities depend only on depths, which automorphisms preserve.
    fn quotient(&self) -> Option<&dyn OrbitQuotient> {
        self.inner.quotient()
    }

    fn vertices(&self) -> Option<Vec<VertexId>> {
        self.inner.vertices()
    }

    fn label(&self, v: VertexId) -> Option<i64> {
        self.inner.label(v)
    }

    fn describe(&self, v: VertexId) -> String {
        self.inner.describe(v)
    }
}

/// `T^R`: replaces each depth-`k` edge by `k^2` parallel edges.
pub fn reinforce_edges(tree: &RootedMultigraph) -> Result<RootedMultigraph> {
    if tree.label(tree.root()).is_none() {
        return Err(Error::InvalidGraph("reinforcement needs a depth-labelled tree".into()));
    }
    let oracle = Reinforced {
        inner: Arc::clone(tree.oracle()),
        kind: format!("reinforced_{}", tree.kind()),
    };
    Ok(RootedMultigraph::new(Arc::new(oracle)).with_root(tree.root()))
}

/// Law of the depth of a degree-biased root of `T^R_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct RootDepthLaw {
    pub n: u32,
    /// Oriented edges whose origin has depth `k`, counted vertex by vertex.
    pub enumerated_counts: Vec<u128>,
    pub enumerated_total: u128,
    /// Numerators `k^2 ξ_n/ξ_{k-1} + (k+1)^2 ξ_n/ξ_k` of the closed form.
    pub closed_form_counts: Vec<u128>,
    /// Denominator `2 ξ_n Σ_{i<n} (i+1)^2 / ξ_i` of the closed form.
    pub closed_form_total: u128,
}

impl RootDepthLaw {
    pub fn probabilities(&self) -> Vec<f64> {
        self.enumerated_counts
            .iter()
            .map(|&c| c as f64 / self.enumerated_total as f64)
            .collect()
    }

    pub fn closed_form_probabilities(&self) -> Vec<f64> {
        self.closed_form_counts
            .iter()
            .map(|&c| c as f64 / self.closed_form_total as f64)
            .collect()
    }

    /// Whether enumeration and closed form agree exactly at depth `k`.
    pub fn agrees_at(&self, k: usize) -> bool {
        self.enumerated_counts[k] * self.closed_form_total
            == self.closed_form_counts[k] * self.enumerated_total
    }
}

/// Exact depth law of the degree-biased root of `T^R_n`, by enumerating every
/// vertex of `T^R_n`, alongside the closed-form values.
pub fn root_depth_distribution(n: u32) -> Result<RootDepthLaw> {
    let tree = CanopyTree::finite(n)?;
    let seq = tree.sequence().clone();
    let mut counts = vec![0u128; n as usize + 1];
    tree.for_each_vertex(|v| {
        let degree: u128 = tree
            .neighbors(v)?
            .iter()
            .map(|(w, m)| {
                let k = v.depth.max(w.depth) as u128;
                *m as u128 * k * k
            })
            .sum();
        counts[v.depth as usize] += degree;
        Ok(())
    })?;
    let total = counts.iter().sum();

    let xi_n = seq.xi(n as i64);
    let closed: Vec<u128> = (0..=n as i64)
        .map(|k| {
            let k2 = (k * k) as u128;
            let k1 = ((k + 1) * (k + 1)) as u128;
            k2 * (xi_n / seq.xi(k - 1)) + k1 * (xi_n / seq.xi(k))
        })
        .collect();
    let closed_total = 2 * (0..n as i64)
        .map(|i| ((i + 1) * (i + 1)) as u128 * (xi_n / seq.xi(i)))
        .sum::<u128>();
    Ok(RootDepthLaw {
        n,
        enumerated_counts: counts,
        enumerated_total: total,
        closed_form_counts: closed,
        closed_form_total: closed_total,
    })
}

/// Limiting depth law of the degree-biased root of `T^R_n` as `n → ∞`,
/// truncated to depths `0..=k_max` and renormalized. Returns the weights and
/// the truncated mass (relative to the untruncated normalization up to `k_max`).
pub fn limit_root_depth_law(k_max: u32) -> Result<(Vec<f64>, f64)> {
    let seq = EpsilonSequence::new(k_max as usize + 1)?;
    let weights: Vec<f64> = (0..=k_max as i64)
        .map(|k| {
            let k2 = (k * k) as f64;
            let k1 = ((k + 1) * (k + 1)) as f64;
            k2 / seq.xi(k - 1) as f64 + k1 / seq.xi(k) as f64
        })
        .collect();
    let kept: f64 = weights.iter().sum();
    // Tail of 2 Σ (i+1)^2/ξ_i beyond k_max, bounded with ξ_i >= c i^4.
    let (c, _) = seq.fitted_constants();
    let tail = 2.0 * (k_max as f64 + 1.0).powi(2) / (c * (k_max as f64).powi(4)) * k_max as f64;
    let total = kept + tail;
    Ok((weights.iter().map(|w| w / kept).collect(), tail / total))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_terms() {
        let s = EpsilonSequence::new(25).unwrap();
        assert_eq!(s.epsilon(1), 1);
        for k in 1..=18 {
            assert_eq!(s.xi(k), 1u128 << (k - 1), "k={k}");
        }
        assert_eq!(s.epsilon(19), 1);
        assert!((2..19).all(|k| s.epsilon(k) == 2));
    }

    #[test]
    fn t3_vertex_counts_by_depth() {
        let t = CanopyTree::finite(3).unwrap();
        let mut by_depth = [0usize; 4];
        t.for_each_vertex(|v| {
            by_depth[v.depth as usize] += 1;
            Ok(())
        })
        .unwrap();
        assert_eq!(by_depth, [4, 4, 2, 1]);
    }

    #[test]
    fn t3_root_depth_law() {
        let law = root_depth_distribution(3).unwrap();
        assert_eq!(law.enumerated_counts, vec![4, 20, 34, 18]);
        assert_eq!(law.enumerated_total, 76);
        assert_eq!(law.closed_form_total, 76);
        // The closed form adds a parent term at the top that does not exist.
        assert!((0..3).all(|k| law.agrees_at(k)));
        assert!(!law.agrees_at(3));
    }

    #[test]
    fn finite_tree_rejects_foreign_vertices() {
        let t = CanopyTree::finite(3).unwrap();
        assert!(t.neighbors(&CanopyCoord { depth: 2, index: 2 }).is_err());
        assert!(t.neighbors(&CanopyCoord { depth: 4, index: 0 }).is_err());
    }

    #[test]
    fn infinite_tree_respects_horizon() {
        let t = CanopyTree::infinite(5, 0).unwrap();
        assert!(t.neighbors(&CanopyCoord { depth: 5, index: 0 }).is_err());
        assert!(t.neighbors(&CanopyCoord { depth: 4, index: 0 }).is_ok());
    }

    #[test]
    fn lumped_walk_matches_plain_walk() {
        use crate::walk::ExactWalk;
        for (tree, reinforce) in [
            (CanopyTree::finite(6).unwrap(), false),
            (CanopyTree::infinite(400, 23).unwrap(), true),
        ] {
            let mut g = tree.into_graph();
            if reinforce {
                g = reinforce_edges(&g).unwrap();
            }
            let mut lumped = ExactWalk::new(&g, g.root()).unwrap();
            let mut plain = ExactWalk::plain(&g, g.root());
            assert!(lumped.is_lumped());
            for _ in 0..10 {
                lumped.step().unwrap();
                plain.step().unwrap();
                assert!((lumped.entropy() - plain.entropy()).abs() < 1e-10);
            }
            let total: f64 = lumped.atoms().iter().map(|a| a.size).sum();
            assert!(total <= plain.atoms().len() as f64 + 1e-9);
        }
    }
}
