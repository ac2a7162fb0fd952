use serde::Serialize;

use crate::error::Result;
use crate::generators::Ensemble;
use crate::graph::{ball_signature, BallSignature, RootedMultigraph, VertexId};
use crate::numeric::pairwise_sum;

use super::{replicas, Estimate};

const EXACT_ATOM_LIMIT: usize = 4096;

/// What a transport function may look at for the ordered pair `(a, b)`.
#[derive(Debug, Clone)]
pub struct PairContext {
    /// Radius-`r` ball around `a` with `b` marked.
    pub signature: BallSignature,
    pub distance: u64,
    pub multiplicity: u32,
    pub deg_first: u64,
    pub deg_second: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MtpReport {
    pub radius: u32,
    /// `E[Σ_x F(G, ρ, x)]`.
    pub sent: Estimate,
    /// `E[Σ_x F(G, x, ρ)]`.
    pub received: Estimate,
    pub difference: Estimate,
    pub passed: bool,
}

fn context(g: &RootedMultigraph, a: VertexId, b: VertexId, d: u64, r: u32) -> Result<PairContext> {
    Ok(PairContext {
        signature: ball_signature(g, a, r, Some(b))?,
        distance: d,
        multiplicity: if a == b { 0 } else { g.multiplicity(a, b)? },
        deg_first: g.degree(a)?,
        deg_second: g.degree(b)?,
    })
}

fn both_sides<F>(g: &RootedMultigraph, r: u32, f: &F) -> Result<(f64, f64)>
where
    F: Fn(&PairContext) -> f64,
{
    let rho = g.root();
    let (order, dist) = g.bfs(rho, r)?;
    let mut sent = Vec::with_capacity(order.len());
    let mut received = Vec::with_capacity(order.len());
    for (&x, &d) in order.iter().zip(&dist) {
        sent.push(f(&context(g, rho, x, d as u64, r)?));
        received.push(f(&context(g, x, rho, d as u64, r)?));
    }
    Ok((pairwise_sum(&sent), pairwise_sum(&received)))
}

/// Both sides of the mass-transport identity for a transport function `f`
/// supported on pairs at distance at most `r`.
pub fn mtp_test<F>(ensemble: &dyn Ensemble, r: u32, f: F, samples: usize, seed: u64) -> Result<MtpReport>
where
    F: Fn(&PairContext) -> f64 + Sync + Send,
{
    if let Some(law) = ensemble.exact_law() {
        let law = law?;
        if law.len() <= EXACT_ATOM_LIMIT {
            let mut s = Vec::new();
            let mut q = Vec::new();
            for (g, w) in &law {
                let (a, b) = both_sides(g, r, &f)?;
                s.push(w * a);
                q.push(w * b);
            }
            let (s, q) = (pairwise_sum(&s), pairwise_sum(&q));
            let diff = s - q;
            return Ok(MtpReport {
                radius: r,
                sent: Estimate::exact(s),
                received: Estimate::exact(q),
                difference: Estimate::exact(diff),
                passed: diff.abs() <= 1e-10 * s.abs().max(1.0),
            });
        }
    }
    let pairs = replicas(samples, seed, |s| both_sides(&ensemble.sample(s)?, r, &f))?;
    let sent = Estimate::from_samples(&pairs.iter().map(|p| p.0).collect::<Vec<_>>());
    let received = Estimate::from_samples(&pairs.iter().map(|p| p.1).collect::<Vec<_>>());
    let difference = Estimate::from_samples(&pairs.iter().map(|p| p.0 - p.1).collect::<Vec<_>>());
    let passed = difference.value.abs() <= 3.0 * difference.se + 1e-12;
    Ok(MtpReport { radius: r, sent, received, difference, passed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{finite_graph_ensemble, Rooting};
    use crate::graph::FiniteGraphBuilder;
    use crate::hash::stable_hash;

    #[test]
    fn uniform_rooting_transports_mass_exactly() {
        let mut b = FiniteGraphBuilder::new("kite");
        for (u, v, m) in [(0, 1, 1), (1, 2, 2), (2, 0, 1), (2, 3, 1), (3, 4, 3)] {
            b.add_edge(VertexId(u), VertexId(v), m).unwrap();
        }
        let e = finite_graph_ensemble(&b.build_rooted(VertexId(0)), Rooting::Uniform).unwrap();
        let f = |c: &PairContext| (stable_hash(&c.signature.code) % 97) as f64 / 97.0 + c.deg_first as f64;
        let rep = mtp_test(&e, 2, f, 0, 0).unwrap();
        assert!(rep.passed, "{rep:?}");
        let deg = mtp_test(&e, 1, |c: &PairContext| c.multiplicity as f64, 0, 0).unwrap();
        assert!((deg.sent.value - 16.0 / 5.0).abs() < 1e-12);
        assert!((deg.received.value - 16.0 / 5.0).abs() < 1e-12);
    }
}
