//! Augmented Galton–Watson trees: two independent GW trees whose roots are
//! joined by an edge, rooted at the first root.
//!
//! A vertex is a side (0 or 1) plus the word of child indices leading to it.
//! Child counts are drawn from a hash of `(seed, vertex)`, so the tree is
//! grown lazily and identically on every expansion.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Construction, LazyGraph, RootedMultigraph};
use crate::hash::{mix64, seeded_hash, unit_interval};

pub const DEFAULT_MAX_CHILDREN: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Offspring {
    probs: Vec<f64>,
    cumulative: Vec<f64>,
    /// Mass dropped above the child-count cap before renormalizing.
    pub truncated_mass: f64,
}

impl Offspring {
    pub fn new(probs: &[f64]) -> Result<Self> {
        Self::with_cap(probs, DEFAULT_MAX_CHILDREN)
    }

    pub fn with_cap(probs: &[f64], max_children: usize) -> Result<Self> {
        if probs.is_empty() || probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::param("offspring probabilities must be finite and nonnegative"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::param(format!("offspring probabilities sum to {total}, not 1")));
        }
        let kept = &probs[..probs.len().min(max_children + 1)];
        let kept_mass: f64 = kept.iter().sum();
        if kept_mass <= 0.0 {
            return Err(Error::param("no offspring mass below the child-count cap"));
        }
        let probs: Vec<f64> = kept.iter().map(|p| p / kept_mass).collect();
        let mut acc = 0.0;
        let cumulative = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Ok(Offspring { probs, cumulative, truncated_mass: total - kept_mass })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn mean(&self) -> f64 {
        self.probs.iter().enumerate().map(|(k, p)| k as f64 * p).sum()
    }

    /// `p_0 = 1`: every tree is a single vertex.
    pub fn is_degenerate(&self) -> bool {
        self.probs[0] >= 1.0
    }

    pub fn is_truncated(&self) -> bool {
        self.truncated_mass > 0.0
    }

    /// Inverse-CDF draw from a uniform `u` in `[0, 1)`.
    pub fn quantile(&self, u: f64) -> usize {
        self.cumulative
            .iter()
            .position(|&c| u < c)
            .unwrap_or(self.probs.len() - 1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GwCoord {
    pub side: u8,
    pub word: Vec<u32>,
}

#[derive(Debug, Clone)]
pub struct AugmentedGwTree {
    offspring: Offspring,
    seed: u64,
    depth_horizon: u32,
}

impl AugmentedGwTree {
    pub fn new(offspring: Offspring, seed: u64, depth_horizon: u32) -> Self {
        AugmentedGwTree { offspring, seed, depth_horizon }
    }

    pub fn children(&self, v: &GwCoord) -> usize {
        self.offspring.quantile(unit_interval(mix64(seeded_hash(self.seed, v))))
    }

    pub fn into_graph(self) -> RootedMultigraph {
        RootedMultigraph::from_oracle(LazyGraph::new(self))
    }
}

impl Construction for AugmentedGwTree {
    type Coord = GwCoord;

    fn kind(&self) -> &str {
        "augmented_gw"
    }

    fn id_salt(&self) -> u64 {
        self.seed
    }

    fn origin(&self) -> GwCoord {
        GwCoord { side: 0, word: Vec::new() }
    }

    fn neighbors(&self, v: &GwCoord) -> Result<Vec<(GwCoord, u32)>> {
        if v.word.len() >= self.depth_horizon as usize {
            return Err(Error::horizon(format!(
                "Galton–Watson tree grown only to depth {}",
                self.depth_horizon
            )));
        }
        let mut out = Vec::new();
        match v.word.split_last() {
            Some((_, parent)) => out.push((GwCoord { side: v.side, word: parent.to_vec() }, 1)),
            None => out.push((GwCoord { side: 1 - v.side, word: Vec::new() }, 1)),
        }
        for c in 0..self.children(v) as u32 {
            let mut word = v.word.clone();
            word.push(c);
            out.push((GwCoord { side: v.side, word }, 1));
        }
        Ok(out)
    }

    fn distance(&self, u: &GwCoord, v: &GwCoord) -> Option<Result<u64>> {
        let (a, b) = (u.word.len() as u64, v.word.len() as u64);
        if u.side != v.side {
            return Some(Ok(a + b + 1));
        }
        let common = u.word.iter().zip(&v.word).take_while(|(x, y)| x == y).count() as u64;
        Some(Ok(a + b - 2 * common))
    }
}

/// One augmented GW tree; `flags` records degenerate or truncated offspring.
pub fn augmented_galton_watson(
    offspring: &Offspring,
    seed: u64,
    depth_horizon: u32,
) -> (RootedMultigraph, Vec<String>) {
    let mut flags = Vec::new();
    if offspring.is_degenerate() {
        flags.push("degenerate-offspring".to_string());
    }
    if offspring.is_truncated() {
        flags.push(format!("offspring-truncated:{:.3e}", offspring.truncated_mass));
    }
    (AugmentedGwTree::new(offspring.clone(), seed, depth_horizon).into_graph(), flags)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_when_every_vertex_has_one_child() {
        let off = Offspring::new(&[0.0, 1.0]).unwrap();
        let (g, flags) = augmented_galton_watson(&off, 7, 100);
        assert!(flags.is_empty());
        let (order, _) = g.bfs(g.root(), 10).unwrap();
        assert_eq!(order.len(), 21);
        assert!(order.iter().all(|&v| g.degree(v).unwrap() == 2));
    }

    #[test]
    fn degenerate_offspring_is_a_single_edge() {
        let off = Offspring::new(&[1.0]).unwrap();
        let (g, flags) = augmented_galton_watson(&off, 1, 10);
        assert_eq!(flags, vec!["degenerate-offspring"]);
        assert_eq!(g.bfs(g.root(), 5).unwrap().0.len(), 2);
    }

    #[test]
    fn truncation_renormalizes() {
        let off = Offspring::with_cap(&[0.25, 0.25, 0.5], 1).unwrap();
        assert_eq!(off.probs(), &[0.5, 0.5]);
        assert!((off.truncated_mass - 0.5).abs() < 1e-12);
    }

    #[test]
    fn closed_form_distance_matches_bfs() {
        let off = Offspring::new(&[0.2, 0.3, 0.5]).unwrap();
        let (g, _) = augmented_galton_watson(&off, 11, 50);
        let (order, dist) = g.bfs(g.root(), 5).unwrap();
        for (v, d) in order.iter().zip(dist) {
            assert_eq!(g.distance(g.root(), *v).unwrap(), d as u64);
        }
    }
}
