//! The Radon–Nikodym cocycle `Δ = dμ← / dμ→` on bi-rooted edge classes,
//! where `μ→` is the law of `(G, X_0, X_1)` and `μ←` that of `(G, X_1, X_0)`.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::generators::Ensemble;
use crate::graph::{ball_signature, BallSignature, RootedMultigraph, VertexId};
use crate::hash::StableSet;
use crate::numeric::pairwise_sum;
use crate::seed::derive_seed;
use crate::stats::Estimate;
use crate::walk::{simulate_path, step, WalkPath};

const EXACT_ATOM_LIMIT: usize = 4096;

#[derive(Debug, Clone, Serialize)]
pub struct ClassEntry {
    pub forward: f64,
    pub backward: f64,
    pub delta: f64,
    /// Class of the reversed pair, when observed.
    pub reverse: Option<BallSignature>,
    #[serde(skip)]
    witness: Option<(RootedMultigraph, VertexId, VertexId)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EdgeClassTable {
    pub radius: u32,
    pub degree_bound: u64,
    pub classes: BTreeMap<BallSignature, ClassEntry>,
    pub exact: bool,
    pub samples: usize,
    pub warnings: Vec<String>,
    /// Per-sample `log Δ(G, X_0, X_1)` (Monte Carlo tables only).
    #[serde(skip)]
    log_delta_samples: Vec<f64>,
}

struct Observation {
    forward: BallSignature,
    backward: BallSignature,
    weight: f64,
    witness: (RootedMultigraph, VertexId, VertexId),
}

fn observe_edges(g: &RootedMultigraph, r: u32, weight: f64) -> Result<Vec<Observation>> {
    let x = g.root();
    let nbrs = g.neighbors(x)?;
    let deg: u64 = nbrs.iter().map(|&(_, m)| m as u64).sum();
    nbrs.into_iter()
        .map(|(y, m)| {
            Ok(Observation {
                forward: ball_signature(g, x, r, Some(y))?,
                backward: ball_signature(g, y, r, Some(x))?,
                weight: weight * m as f64 / deg as f64,
                witness: (g.clone(), x, y),
            })
        })
        .collect()
}

impl EdgeClassTable {
    fn from_observations(
        radius: u32,
        degree_bound: u64,
        obs: Vec<Observation>,
        exact: bool,
        samples: usize,
    ) -> Self {
        let mut classes: BTreeMap<BallSignature, ClassEntry> = BTreeMap::new();
        let blank = || ClassEntry { forward: 0.0, backward: 0.0, delta: f64::NAN, reverse: None, witness: None };
        for o in &obs {
            let f = classes.entry(o.forward.clone()).or_insert_with(blank);
            f.forward += o.weight;
            f.reverse.get_or_insert_with(|| o.backward.clone());
            f.witness.get_or_insert_with(|| o.witness.clone());
            let b = classes.entry(o.backward.clone()).or_insert_with(blank);
            b.backward += o.weight;
            b.reverse.get_or_insert_with(|| o.forward.clone());
            b.witness.get_or_insert_with(|| (o.witness.0.clone(), o.witness.2, o.witness.1));
        }
        let mut warnings = Vec::new();
        for (sig, c) in classes.iter_mut() {
            if c.forward > 0.0 {
                c.delta = c.backward / c.forward;
            } else {
                c.delta = degree_bound as f64;
                warnings.push(format!("class {} seen only reversed; Δ set to {degree_bound}", sig.hex()));
            }
        }
        let mut table = EdgeClassTable {
            radius,
            degree_bound,
            classes,
            exact,
            samples,
            warnings,
            log_delta_samples: Vec::new(),
        };
        if !exact {
            // One walk step per sample: the forward class of the observed step.
            table.log_delta_samples = obs
                .iter()
                .filter(|o| o.weight > 0.0)
                .map(|o| table.classes[&o.forward].delta.ln())
                .collect();
        }
        table
    }

    pub fn delta(&self, class: &BallSignature) -> Result<f64> {
        self.classes
            .get(class)
            .map(|c| c.delta)
            .ok_or_else(|| Error::UnknownClass(class.hex()))
    }

    pub fn class_of(&self, g: &RootedMultigraph, x: VertexId, y: VertexId) -> Result<BallSignature> {
        ball_signature(g, x, self.radius, Some(y))
    }

    /// `Δ(G, x, y)` for adjacent `x`, `y`.
    pub fn delta_edge(&self, g: &RootedMultigraph, x: VertexId, y: VertexId) -> Result<f64> {
        self.delta(&self.class_of(g, x, y)?)
    }

    /// `Σ μ→ Δ`, equal to one for a Radon–Nikodym derivative.
    pub fn normalization(&self) -> f64 {
        pairwise_sum(&self.classes.values().filter(|c| c.forward > 0.0).map(|c| c.forward * c.delta).collect::<Vec<_>>())
    }

    pub fn forward_total(&self) -> f64 {
        pairwise_sum(&self.classes.values().map(|c| c.forward).collect::<Vec<_>>())
    }

    pub fn backward_total(&self) -> f64 {
        pairwise_sum(&self.classes.values().map(|c| c.backward).collect::<Vec<_>>())
    }

    /// Whether every `Δ` lies in `[1/M, M]`.
    pub fn within_bounds(&self) -> bool {
        let m = self.degree_bound as f64;
        self.classes.values().all(|c| c.delta >= 1.0 / m - 1e-12 && c.delta <= m + 1e-12)
    }

    /// `max |log Δ(c) + log Δ(reverse(c))|` over classes with a known reversal.
    pub fn inverse_symmetry_defect(&self) -> f64 {
        self.classes
            .values()
            .filter_map(|c| {
                let rev = self.classes.get(c.reverse.as_ref()?)?;
                Some((c.delta.ln() + rev.delta.ln()).abs())
            })
            .fold(0.0, f64::max)
    }

    /// Overwrites `Δ` of one class. Fault injection for tests.
    #[doc(hidden)]
    pub fn tamper(&mut self, class: &BallSignature, delta: f64) {
        if let Some(c) = self.classes.get_mut(class) {
            c.delta = delta;
        }
    }
}

/// Table of `μ→`, `μ←` and `Δ` at radius `r`: exact for small exact-law
/// ensembles (transitive graphs included), otherwise from `samples` walk steps.
pub fn estimate_delta(ensemble: &dyn Ensemble, r: u32, samples: usize, seed: u64) -> Result<EdgeClassTable> {
    if r < 1 {
        return Err(Error::param("edge classes need r >= 1"));
    }
    if let Some(law) = ensemble.exact_law() {
        let law = law?;
        if law.len() <= EXACT_ATOM_LIMIT {
            let mut obs = Vec::new();
            let mut max_deg = 0;
            for (g, w) in &law {
                max_deg = max_deg.max(g.degree(g.root())?);
                obs.extend(observe_edges(g, r, *w)?);
            }
            let m = ensemble.degree_bound().unwrap_or(max_deg);
            return Ok(EdgeClassTable::from_observations(r, m, obs, true, law.len()));
        }
    }
    let pairs = crate::stats::replicas(samples, seed, |s| {
        let g = ensemble.sample(s)?;
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(s, 0));
        let x = g.root();
        let y = step(&g, x, &mut rng)?;
        let deg = g.degree(x)?;
        Ok((
            Observation {
                forward: ball_signature(&g, x, r, Some(y))?,
                backward: ball_signature(&g, y, r, Some(x))?,
                weight: 1.0 / samples as f64,
                witness: (g.clone(), x, y),
            },
            deg,
        ))
    })?;
    let max_deg = pairs.iter().map(|p| p.1).max().unwrap_or(1);
    let mut table = EdgeClassTable::from_observations(
        r,
        ensemble.degree_bound().unwrap_or(max_deg),
        pairs.into_iter().map(|p| p.0).collect(),
        false,
        samples,
    );
    if ensemble.degree_bound().is_none() {
        table.warnings.push(format!("no declared degree bound; using the observed maximum {max_deg}"));
    }
    Ok(table)
}

/// `∏ Δ(x_i, x_{i+1})` along the path (1 for a path of length zero).
pub fn delta_along_path(table: &EdgeClassTable, g: &RootedMultigraph, path: &WalkPath) -> Result<f64> {
    Ok(log_delta_along(table, g, &path.vertices)?.exp())
}

fn log_delta_along(table: &EdgeClassTable, g: &RootedMultigraph, vertices: &[VertexId]) -> Result<f64> {
    let logs: Vec<f64> = vertices
        .windows(2)
        .map(|w| Ok(table.delta_edge(g, w[0], w[1])?.ln()))
        .collect::<Result<_>>()?;
    Ok(pairwise_sum(&logs))
}

#[derive(Debug, Clone, Serialize)]
pub struct ElogDelta {
    /// `E[log Δ(G, X_0, X_1)]` under `μ→`.
    pub value: Estimate,
    /// `|E log Δ| / log M`, a lower bound on the speed.
    pub ballistic_bound: f64,
}

pub fn elog_delta(table: &EdgeClassTable) -> ElogDelta {
    let value = if table.exact {
        Estimate::exact(pairwise_sum(
            &table.classes.values().filter(|c| c.forward > 0.0).map(|c| c.forward * c.delta.ln()).collect::<Vec<_>>(),
        ))
    } else {
        Estimate::from_samples(&table.log_delta_samples)
    };
    let ballistic_bound = value.value.abs() / (table.degree_bound as f64).ln();
    ElogDelta { value, ballistic_bound }
}

/// `max_x |deg(x)^{-1} Σ_{y ~ x} m(x, y) Δ(x, y) - 1|` over the given vertices.
pub fn harmonicity_check(table: &EdgeClassTable, g: &RootedMultigraph, vertices: &[VertexId]) -> Result<f64> {
    let mut worst = 0.0f64;
    for &x in vertices {
        let nbrs = g.neighbors(x)?;
        let deg: u64 = nbrs.iter().map(|&(_, m)| m as u64).sum();
        let terms: Vec<f64> = nbrs
            .iter()
            .map(|&(y, m)| Ok(m as f64 * table.delta_edge(g, x, y)?))
            .collect::<Result<_>>()?;
        worst = worst.max((pairwise_sum(&terms) / deg as f64 - 1.0).abs());
    }
    Ok(worst)
}

#[derive(Debug, Clone, Serialize)]
pub struct CycleReport {
    pub walk_cycles: usize,
    pub bfs_cycles: usize,
    /// `max |log ∏ Δ|` over all checked cycles.
    pub max_abs_log: f64,
    pub longest: usize,
}

/// Products of `Δ` around closed walks from the root: walks stopped at their
/// first return (at most `max_len` steps) and fundamental cycles of a BFS
/// tree of radius `max_len / 2`.
pub fn cycle_product_check(
    table: &EdgeClassTable,
    g: &RootedMultigraph,
    n_cycles: usize,
    max_len: usize,
    seed: u64,
) -> Result<CycleReport> {
    let root = g.root();
    let mut report = CycleReport { walk_cycles: 0, bfs_cycles: 0, max_abs_log: 0.0, longest: 0 };
    let record = |cycle: &[VertexId], report: &mut CycleReport| -> Result<()> {
        let l = log_delta_along(table, g, cycle)?.abs();
        report.max_abs_log = report.max_abs_log.max(l);
        report.longest = report.longest.max(cycle.len() - 1);
        Ok(())
    };
    for i in 0..n_cycles as u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, i));
        let mut cycle = vec![root];
        let mut v = root;
        for _ in 0..max_len {
            v = step(g, v, &mut rng)?;
            cycle.push(v);
            if v == root {
                break;
            }
        }
        if v == root {
            record(&cycle, &mut report)?;
            report.walk_cycles += 1;
        }
    }
    let (order, dist) = g.bfs(root, (max_len / 2) as u32)?;
    let index: crate::hash::StableMap<VertexId, usize> = order.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut parent = vec![usize::MAX; order.len()];
    for (i, &v) in order.iter().enumerate() {
        for (w, _) in g.neighbors(v)? {
            if let Some(&j) = index.get(&w) {
                if dist[j] == dist[i] + 1 && parent[j] == usize::MAX && j != 0 {
                    parent[j] = i;
                }
            }
        }
    }
    let to_root = |mut i: usize| {
        let mut p = vec![order[i]];
        while i != 0 {
            i = parent[i];
            p.push(order[i]);
        }
        p
    };
    let mut seen: StableSet<(usize, usize)> = StableSet::default();
    'outer: for (i, &v) in order.iter().enumerate() {
        for (w, _) in g.neighbors(v)? {
            let Some(&j) = index.get(&w) else { continue };
            if parent[j] == i || parent[i] == j || !seen.insert((i.min(j), i.max(j))) {
                continue;
            }
            let mut cycle: Vec<VertexId> = to_root(i).into_iter().rev().collect();
            cycle.extend(to_root(j));
            record(&cycle, &mut report)?;
            report.bfs_cycles += 1;
            if report.bfs_cycles >= n_cycles {
                break 'outer;
            }
        }
    }
    Ok(report)
}

/// `|log Δ(X_0, X_n)|` and its pathwise bound `log(M) d(X_0, X_n)`.
pub fn pathwise_log_delta(table: &EdgeClassTable, g: &RootedMultigraph, path: &WalkPath) -> Result<(f64, f64)> {
    let l = log_delta_along(table, g, &path.vertices)?.abs();
    let d = g.distance(path.start(), path.end())? as f64;
    Ok((l, (table.degree_bound as f64).ln() * d))
}

/// `max |log Δ_coarse - log Δ_fine|` over radius-`r + 1` classes that are the
/// only refinement of their radius-`r` class.
pub fn refinement_defect(coarse: &EdgeClassTable, fine: &EdgeClassTable) -> Result<f64> {
    let mut children: BTreeMap<BallSignature, Vec<f64>> = BTreeMap::new();
    for c in fine.classes.values() {
        let Some((g, x, y)) = &c.witness else { continue };
        let parent = coarse.class_of(g, *x, *y)?;
        children.entry(parent).or_default().push(c.delta);
    }
    let mut worst = 0.0f64;
    for (parent, deltas) in children {
        if deltas.len() == 1 {
            worst = worst.max((coarse.delta(&parent)?.ln() - deltas[0].ln()).abs());
        }
    }
    Ok(worst)
}

/// Walks used for the pathwise check, rooted at the graph root.
pub fn sample_walk(g: &RootedMultigraph, n: usize, seed: u64) -> Result<WalkPath> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = simulate_path(g, g.root(), n, &mut rng)?;
    p.seed = Some(seed);
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::FixedEnsemble;

    fn grandfather_table(r: u32) -> (EdgeClassTable, RootedMultigraph) {
        let e = FixedEnsemble::grandfather();
        (estimate_delta(&e, r, 0, 0).unwrap(), e.graph().clone())
    }

    #[test]
    fn grandfather_deltas() {
        let (t, _) = grandfather_table(2);
        let mut deltas: Vec<f64> = t.classes.values().map(|c| c.delta).collect();
        deltas.sort_by(f64::total_cmp);
        assert_eq!(deltas, vec![0.25, 0.5, 2.0, 4.0]);
        assert!((t.normalization() - 1.0).abs() < 1e-12);
        assert!(t.within_bounds());
        assert!(t.inverse_symmetry_defect() < 1e-12);
        let e = elog_delta(&t);
        assert!((e.value.value + 0.875 * 2f64.ln()).abs() < 1e-12);
        assert!((e.ballistic_bound - 7.0 / 24.0).abs() < 1e-12);
    }

    #[test]
    fn grandfather_cycles_and_harmonicity() {
        let (t, g) = grandfather_table(2);
        let (order, _) = g.bfs(g.root(), 2).unwrap();
        assert!(harmonicity_check(&t, &g, &order).unwrap() < 1e-12);
        let rep = cycle_product_check(&t, &g, 20, 8, 1).unwrap();
        assert!(rep.bfs_cycles > 0 && rep.max_abs_log < 1e-10, "{rep:?}");
    }

    #[test]
    fn tampering_breaks_cycle_products() {
        let (mut t, g) = grandfather_table(2);
        let son = t.classes.iter().find(|(_, c)| (c.delta - 0.5).abs() < 1e-12).unwrap().0.clone();
        t.tamper(&son, 0.6);
        let rep = cycle_product_check(&t, &g, 20, 8, 1).unwrap();
        assert!(rep.max_abs_log > 1e-3);
    }

    #[test]
    fn empty_path_has_unit_product() {
        let (t, g) = grandfather_table(2);
        let p = WalkPath { vertices: vec![g.root()], seed: None };
        assert_eq!(delta_along_path(&t, &g, &p).unwrap(), 1.0);
    }
}
