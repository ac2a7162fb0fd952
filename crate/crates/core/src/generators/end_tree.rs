//! The 3-regular tree oriented by a distinguished end, optionally with the
//! grandson-to-grandfather edges that turn it into the grandfather graph.
//!
//! Vertices are `(level, index)` with `index >= 0`: level `l` vertices are the
//! dyadic intervals `[index * 2^l, (index + 1) * 2^l)`. The father of
//! `(l, j)` is `(l + 1, j >> 1)` and its sons are `(l - 1, 2j)`,
//! `(l - 1, 2j + 1)`. The vertices `(l, 0)` form a bi-infinite line whose
//! upward direction is the distinguished end. The origin is `(0, 0)`.
//!
//! The root stabilizer contains every level-preserving automorphism that
//! fixes the origin and the end, whose orbits are indexed by `(a, b)`: the
//! confluent of `x` with the origin sits `a` levels above the origin and `b`
//! levels above `x`.

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::graph::{Construction, LazyGraph, OrbitLabel, RootedMultigraph};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TreeCoord {
    pub level: i64,
    pub index: BigUint,
}

impl TreeCoord {
    pub fn new(level: i64, index: u64) -> Self {
        TreeCoord { level, index: BigUint::from(index) }
    }

    fn ancestor(&self, up: u64) -> TreeCoord {
        TreeCoord { level: self.level + up as i64, index: &self.index >> up }
    }

    fn descendant(&self, down: u64, offset: u64) -> TreeCoord {
        TreeCoord { level: self.level - down as i64, index: (&self.index << down) + offset }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EndTree {
    pub grandfather_edges: bool,
}

impl EndTree {
    pub fn grandfather() -> Self {
        EndTree { grandfather_edges: true }
    }

    pub fn binary() -> Self {
        EndTree { grandfather_edges: false }
    }

    /// Levels `(a, b)` from `u` and `v` up to their confluent.
    pub fn confluent_offsets(u: &TreeCoord, v: &TreeCoord) -> (u64, u64) {
        let (lo, hi, swapped) = if u.level <= v.level { (u, v, false) } else { (v, u, true) };
        let gap = (hi.level - lo.level) as u64;
        let lifted = &lo.index >> gap;
        let t = (lifted ^ &hi.index).bits();
        let (a_lo, a_hi) = (gap + t, t);
        if swapped {
            (a_hi, a_lo)
        } else {
            (a_lo, a_hi)
        }
    }

    /// Graph distance between two vertices whose confluent lies `a` levels
    /// above the first and `b` levels above the second.
    pub fn distance_from_offsets(&self, a: u64, b: u64) -> u64 {
        if self.grandfather_edges {
            a.div_ceil(2) + b.div_ceil(2)
        } else {
            a + b
        }
    }

    pub fn orbit_label(a: u64, b: u64) -> OrbitLabel {
        (a << 32) | b
    }

    pub fn orbit_offsets(label: OrbitLabel) -> (u64, u64) {
        (label >> 32, label & 0xFFFF_FFFF)
    }

    /// Size of the `(a, b)` orbit of the origin's stabilizer.
    pub fn orbit_len(a: u64, b: u64) -> f64 {
        match (a, b) {
            (0, b) => 2f64.powi(b as i32),
            (_, 0) => 1.0,
            (_, b) => 2f64.powi(b as i32 - 1),
        }
    }

    pub fn into_graph(self) -> RootedMultigraph {
        RootedMultigraph::from_oracle(LazyGraph::new(self))
    }
}

impl Construction for EndTree {
    type Coord = TreeCoord;

    fn kind(&self) -> &str {
        if self.grandfather_edges {
            "grandfather"
        } else {
            "regular_tree"
        }
    }

    fn origin(&self) -> TreeCoord {
        TreeCoord::new(0, 0)
    }

    fn neighbors(&self, v: &TreeCoord) -> Result<Vec<(TreeCoord, u32)>> {
        let mut out = Vec::with_capacity(8);
        out.push((v.ancestor(1), 1));
        out.push((v.descendant(1, 0), 1));
        out.push((v.descendant(1, 1), 1));
        if self.grandfather_edges {
            out.push((v.ancestor(2), 1));
            for c in 0..4 {
                out.push((v.descendant(2, c), 1));
            }
        }
        Ok(out)
    }

    fn distance(&self, u: &TreeCoord, v: &TreeCoord) -> Option<Result<u64>> {
        let (a, b) = Self::confluent_offsets(u, v);
        Some(Ok(self.distance_from_offsets(a, b)))
    }

    fn ball_volume(&self, v: &TreeCoord, r: u32) -> Option<Result<u128>> {
        // Vertex-transitive: count orbits around any vertex.
        let _ = v;
        let r = r as u64;
        let mut total = 0u128;
        for a in 0..=2 * r + 1 {
            for b in 0..=2 * r + 1 {
                if self.distance_from_offsets(a, b) <= r {
                    let len = Self::orbit_len(a, b);
                    if len >= u128::MAX as f64 {
                        return Some(Err(Error::horizon(format!("ball volume at radius {r} overflows u128"))));
                    }
                    match total.checked_add(len as u128) {
                        Some(t) => total = t,
                        None => return Some(Err(Error::horizon(format!("ball volume at radius {r} overflows u128")))),
                    }
                }
            }
        }
        Some(Ok(total))
    }

    fn label(&self, v: &TreeCoord) -> Option<i64> {
        Some(v.level)
    }

    fn orbit_of(&self, v: &TreeCoord) -> Option<OrbitLabel> {
        let (a, b) = Self::confluent_offsets(&self.origin(), v);
        Some(Self::orbit_label(a, b))
    }

    fn orbit_representative(&self, label: OrbitLabel) -> Option<TreeCoord> {
        let (a, b) = Self::orbit_offsets(label);
        Some(match (a, b) {
            (0, b) => TreeCoord::new(-(b as i64), 0),
            (a, 0) => TreeCoord::new(a as i64, 0),
            (a, b) => TreeCoord {
                level: a as i64 - b as i64,
                index: BigUint::from(1u8) << (b - 1),
            },
        })
    }

    fn orbit_size(&self, label: OrbitLabel) -> f64 {
        let (a, b) = Self::orbit_offsets(label);
        Self::orbit_len(a, b)
    }
}

/// The grandfather graph rooted at its origin (8-regular, transitive).
pub fn grandfather_graph() -> RootedMultigraph {
    EndTree::grandfather().into_graph()
}

/// The 3-regular tree rooted at its origin.
pub fn regular_tree() -> RootedMultigraph {
    EndTree::binary().into_graph()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neighbor_level_offsets() {
        let g = EndTree::grandfather();
        let v = TreeCoord::new(3, 5);
        let mut offsets: Vec<i64> =
            g.neighbors(&v).unwrap().iter().map(|(w, _)| w.level - v.level).collect();
        offsets.sort();
        assert_eq!(offsets, vec![-2, -2, -2, -2, -1, -1, 1, 2]);
    }

    #[test]
    fn confluent_offsets_examples() {
        let o = TreeCoord::new(0, 0);
        // sibling
        assert_eq!(EndTree::confluent_offsets(&o, &TreeCoord::new(0, 1)), (1, 1));
        // grandfather
        assert_eq!(EndTree::confluent_offsets(&o, &TreeCoord::new(2, 0)), (2, 0));
        // grandson
        assert_eq!(EndTree::confluent_offsets(&o, &TreeCoord::new(-2, 3)), (0, 2));
        // far cousin
        assert_eq!(EndTree::confluent_offsets(&TreeCoord::new(-1, 0), &TreeCoord::new(0, 3)), (3, 2));
    }

    #[test]
    fn three_regular_ball_volume() {
        let t = EndTree::binary();
        for r in 0..12u32 {
            let expect = 3 * (1u128 << r) - 2;
            assert_eq!(t.ball_volume(&t.origin(), r).unwrap().unwrap(), expect);
        }
    }

    #[test]
    fn representatives_lie_in_their_orbit() {
        let g = EndTree::grandfather();
        for a in 0..6 {
            for b in 0..6 {
                let label = EndTree::orbit_label(a, b);
                let rep = g.orbit_representative(label).unwrap();
                assert_eq!(g.orbit_of(&rep), Some(label));
            }
        }
    }
}
