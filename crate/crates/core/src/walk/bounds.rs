use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{RootedMultigraph, VertexId};
use crate::hash::StableMap;
use crate::numeric::mean_se;
use crate::seed::derive_seed;

use super::exact::ExactWalk;
use super::step;

#[derive(Debug, Clone, Serialize)]
pub struct VaropoulosCarneReport {
    pub n: u32,
    pub degree_bound: u64,
    /// Largest `P(X_t = x) / (2 √M exp(-d(ρ, x)² / 2t))` over `1 <= t <= n`.
    pub max_ratio: f64,
    pub worst_time: u32,
    pub worst_distance: u64,
    pub atoms_checked: usize,
    pub passed: bool,
}

/// Checks `P(X_t = x) <= 2 √M exp(-d(ρ,x)² / 2t)` on the exact support for
/// every `t <= n`.
pub fn varopoulos_carne_check(
    graph: &RootedMultigraph,
    root: VertexId,
    n: u32,
    degree_bound: u64,
) -> Result<VaropoulosCarneReport> {
    let closed_form = graph.oracle().distance(root, root).is_some();
    let bfs: StableMap<VertexId, u64> = if closed_form {
        StableMap::default()
    } else {
        let (order, dist) = graph.bfs(root, n)?;
        order.into_iter().zip(dist.into_iter().map(u64::from)).collect()
    };
    let distance = |v: VertexId| -> Result<u64> {
        match bfs.get(&v) {
            Some(&d) => Ok(d),
            None if closed_form => graph.distance(root, v),
            None => Err(Error::InvalidGraph(format!("{v:?} outside the radius-{n} ball"))),
        }
    };
    let m = degree_bound as f64;
    let mut walk = ExactWalk::new(graph, root)?;
    let mut report = VaropoulosCarneReport {
        n,
        degree_bound,
        max_ratio: 0.0,
        worst_time: 0,
        worst_distance: 0,
        atoms_checked: 0,
        passed: true,
    };
    for t in 1..=n {
        walk.step()?;
        for atom in walk.atoms() {
            let deg = graph.degree(atom.vertex)?;
            if deg > degree_bound {
                return Err(Error::DegreeBoundViolated { vertex: atom.vertex, degree: deg, bound: degree_bound });
            }
            let d = distance(atom.vertex)?;
            let p = atom.mass / atom.size;
            let bound = 2.0 * m.sqrt() * (-((d * d) as f64) / (2.0 * t as f64)).exp();
            let ratio = p / bound;
            report.atoms_checked += 1;
            if ratio > report.max_ratio {
                report.max_ratio = ratio;
                report.worst_time = t;
                report.worst_distance = d;
            }
        }
    }
    report.passed = report.max_ratio <= 1.0;
    Ok(report)
}

/// Series resistance `Σ_{k = k_from + 1}^{k_to} k^{-2}` of the reinforced spine.
pub fn spine_resistance(k_from: u64, k_to: u64) -> Result<f64> {
    if k_from < 1 || k_from >= k_to {
        return Err(Error::param(format!("need 1 <= k_from < k_to, got {k_from}, {k_to}")));
    }
    // Smallest terms first.
    Ok((k_from + 1..=k_to).rev().map(|k| 1.0 / (k as f64 * k as f64)).sum())
}

#[derive(Debug, Clone, Serialize)]
pub struct ReturnReport {
    pub walks: usize,
    pub steps: usize,
    pub returned: usize,
    pub non_return_fraction: f64,
    pub standard_error: f64,
}

/// Fraction of `walks` walks of `steps` steps that never revisit their start.
///
/// `make` builds the graph (rooted at the start) once per walk, so lazy
/// graphs do not share intern tables between threads.
pub fn non_return_fraction<F>(make: F, steps: usize, walks: usize, master_seed: u64) -> Result<ReturnReport>
where
    F: Fn() -> Result<RootedMultigraph> + Sync,
{
    let outcomes: Vec<f64> = (0..walks as u64)
        .into_par_iter()
        .map(|i| {
            let g = make()?;
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(master_seed, i));
            let start = g.root();
            let mut v = start;
            for _ in 0..steps {
                v = step(&g, v, &mut rng)?;
                if v == start {
                    return Ok(0.0);
                }
            }
            Ok(1.0)
        })
        .collect::<Result<_>>()?;
    let (mean, se) = mean_se(&outcomes);
    Ok(ReturnReport {
        walks,
        steps,
        returned: outcomes.iter().filter(|&&x| x == 0.0).count(),
        non_return_fraction: mean,
        standard_error: se,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{grandfather_graph, lattice};

    #[test]
    fn basel_partial_sums() {
        let r = spine_resistance(1, 1000).unwrap();
        assert!(r < std::f64::consts::PI.powi(2) / 6.0);
        assert!(spine_resistance(1, 1_000_000).unwrap() - r < 1e-3);
        assert!(spine_resistance(3, 3).is_err());
    }

    #[test]
    fn bound_holds_on_small_cases() {
        let g = grandfather_graph();
        assert!(varopoulos_carne_check(&g, g.root(), 6, 8).unwrap().passed);
        let z = lattice(2).unwrap();
        assert!(varopoulos_carne_check(&z, z.root(), 8, 4).unwrap().passed);
        assert!(matches!(
            varopoulos_carne_check(&z, z.root(), 2, 3),
            Err(Error::DegreeBoundViolated { .. })
        ));
    }
}
