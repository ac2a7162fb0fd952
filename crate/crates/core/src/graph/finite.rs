use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::hash::StableMap;

use super::{NeighborOracle, RootedMultigraph, VertexId};

/// Explicit adjacency for a finite multigraph.
#[derive(Debug, Clone)]
pub struct FiniteGraph {
    kind: String,
    origin: VertexId,
    adj: StableMap<VertexId, Vec<(VertexId, u32)>>,
    order: Vec<VertexId>,
    labels: StableMap<VertexId, i64>,
    names: StableMap<VertexId, String>,
}

impl FiniteGraph {
    pub fn vertex_count(&self) -> usize {
        self.order.len()
    }

    pub fn edge_count(&self) -> u64 {
        self.adj.values().flatten().map(|&(_, m)| m as u64).sum::<u64>() / 2
    }
}

impl NeighborOracle for FiniteGraph {
    fn kind(&self) -> &str {
        &self.kind
    }

    fn origin(&self) -> VertexId {
        self.origin
    }

    fn neighbors(&self, v: VertexId) -> Result<Vec<(VertexId, u32)>> {
        self.adj.get(&v).cloned().ok_or(Error::UnknownVertex(v))
    }

    fn degree(&self, v: VertexId) -> Result<u64> {
        let n = self.adj.get(&v).ok_or(Error::UnknownVertex(v))?;
        Ok(n.iter().map(|&(_, m)| m as u64).sum())
    }

    fn vertices(&self) -> Option<Vec<VertexId>> {
        Some(self.order.clone())
    }

    fn label(&self, v: VertexId) -> Option<i64> {
        self.labels.get(&v).copied()
    }

    fn describe(&self, v: VertexId) -> String {
        self.names.get(&v).cloned().unwrap_or_else(|| format!("{v:?}"))
    }
}

/// Accumulates edges (summing multiplicities of repeated pairs).
#[derive(Debug, Default)]
pub struct FiniteGraphBuilder {
    kind: String,
    adj: BTreeMap<VertexId, BTreeMap<VertexId, u32>>,
    labels: StableMap<VertexId, i64>,
    names: StableMap<VertexId, String>,
}

impl FiniteGraphBuilder {
    pub fn new(kind: impl Into<String>) -> Self {
        FiniteGraphBuilder { kind: kind.into(), ..Default::default() }
    }

    pub fn add_vertex(&mut self, v: VertexId) -> &mut Self {
        self.adj.entry(v).or_default();
        self
    }

    pub fn add_edge(&mut self, u: VertexId, v: VertexId, multiplicity: u32) -> Result<&mut Self> {
        if u == v {
            return Err(Error::InvalidGraph(format!("loop at {u:?}")));
        }
        if multiplicity == 0 {
            return Err(Error::InvalidGraph(format!("zero multiplicity on {u:?}-{v:?}")));
        }
        *self.adj.entry(u).or_default().entry(v).or_default() += multiplicity;
        *self.adj.entry(v).or_default().entry(u).or_default() += multiplicity;
        Ok(self)
    }

    pub fn set_label(&mut self, v: VertexId, label: i64) -> &mut Self {
        self.labels.insert(v, label);
        self
    }

    pub fn set_name(&mut self, v: VertexId, name: impl Into<String>) -> &mut Self {
        self.names.insert(v, name.into());
        self
    }

    pub fn build(self, origin: VertexId) -> FiniteGraph {
        let order: Vec<VertexId> = self.adj.keys().copied().collect();
        let adj = self
            .adj
            .into_iter()
            .map(|(v, n)| (v, n.into_iter().collect()))
            .collect();
        FiniteGraph {
            kind: self.kind,
            origin,
            adj,
            order,
            labels: self.labels,
            names: self.names,
        }
    }

    pub fn build_rooted(self, root: VertexId) -> RootedMultigraph {
        RootedMultigraph::new(Arc::new(self.build(root)))
    }
}

impl FiniteGraph {
    /// Checks connectivity and that every vertex has an incident edge.
    pub fn validate(&self) -> Result<()> {
        if self.order.len() > 1 {
            if let Some(v) = self.order.iter().find(|v| self.adj[v].is_empty()) {
                return Err(Error::InvalidGraph(format!("isolated vertex {v:?}")));
            }
        }
        let g = RootedMultigraph::new(Arc::new(self.clone()));
        let (reached, _) = g.bfs(self.origin, u32::MAX)?;
        if reached.len() != self.order.len() {
            return Err(Error::InvalidGraph(format!(
                "disconnected: {} of {} vertices reachable",
                reached.len(),
                self.order.len()
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_edges_accumulate_symmetrically() {
        let mut b = FiniteGraphBuilder::new("t");
        b.add_edge(VertexId(1), VertexId(2), 2).unwrap();
        b.add_edge(VertexId(2), VertexId(1), 3).unwrap();
        let g = b.build(VertexId(1));
        assert_eq!(g.neighbors(VertexId(1)).unwrap(), vec![(VertexId(2), 5)]);
        assert_eq!(g.neighbors(VertexId(2)).unwrap(), vec![(VertexId(1), 5)]);
        assert_eq!(g.edge_count(), 5);
    }

    #[test]
    fn loops_and_disconnection_are_errors() {
        let mut b = FiniteGraphBuilder::new("t");
        assert!(b.add_edge(VertexId(1), VertexId(1), 1).is_err());
        b.add_edge(VertexId(1), VertexId(2), 1).unwrap();
        b.add_edge(VertexId(3), VertexId(4), 1).unwrap();
        assert!(b.build(VertexId(1)).validate().is_err());
    }
}
