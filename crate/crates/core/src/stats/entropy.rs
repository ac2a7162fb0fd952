use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::generators::Ensemble;
use crate::graph::{RootedMultigraph, VertexId};
use crate::numeric::{pairwise_sum, phi};
use crate::walk::ExactWalk;

use super::{replicas, Estimate};

/// Ensembles with an exact law of at most this many atoms are averaged exactly.
const EXACT_ATOM_LIMIT: usize = 4096;

/// `ĥ_n = E[H_n(G, ρ)]` for `n = 0..=n_max`.
#[derive(Debug, Clone, Serialize)]
pub struct EntropySeries {
    pub n_max: u32,
    pub mean: Vec<f64>,
    pub se: Vec<f64>,
    pub samples: usize,
    pub exact: bool,
    #[serde(skip)]
    profiles: Vec<Vec<f64>>,
    #[serde(skip)]
    weights: Option<Vec<f64>>,
}

impl EntropySeries {
    fn from_profiles(n_max: u32, profiles: Vec<Vec<f64>>, weights: Option<Vec<f64>>) -> Self {
        let exact = weights.is_some();
        let mut s = EntropySeries {
            n_max,
            mean: Vec::new(),
            se: Vec::new(),
            samples: profiles.len(),
            exact,
            profiles,
            weights,
        };
        for n in 0..=n_max as usize {
            let e = s.linear(&[(n, 1.0)]);
            s.mean.push(e.value);
            s.se.push(e.se);
        }
        s
    }

    /// Estimate of `Σ c_i ĥ_i`, with a standard error that accounts for the
    /// correlation between times within each sample.
    pub fn linear(&self, terms: &[(usize, f64)]) -> Estimate {
        let stat = |p: &Vec<f64>| terms.iter().map(|&(i, c)| c * p[i]).sum::<f64>();
        match &self.weights {
            Some(w) => {
                let xs: Vec<f64> = self.profiles.iter().zip(w).map(|(p, w)| w * stat(p)).collect();
                Estimate { value: pairwise_sum(&xs), se: 0.0, samples: self.samples, exact: true }
            }
            None => Estimate::from_samples(&self.profiles.iter().map(stat).collect::<Vec<_>>()),
        }
    }

    /// `ĥ_{n+1} - ĥ_n`.
    pub fn increment(&self, n: usize) -> Estimate {
        self.linear(&[(n + 1, 1.0), (n, -1.0)])
    }
}

fn profile(graph: &RootedMultigraph, n_max: u32) -> Result<Vec<f64>> {
    let mut walk = ExactWalk::new(graph, graph.root())?;
    let mut out = vec![walk.entropy()];
    for _ in 0..n_max {
        walk.step()?;
        out.push(walk.entropy());
    }
    Ok(out)
}

/// Mean entropies `ĥ_0..ĥ_{n_max}` by exact propagation on each sampled graph
/// (or on each atom of a small exact law).
pub fn estimate_h_series(ensemble: &dyn Ensemble, n_max: u32, samples: usize, seed: u64) -> Result<EntropySeries> {
    if n_max < 1 {
        return Err(Error::param("n_max must be at least 1"));
    }
    if let Some(law) = ensemble.exact_law() {
        let law = law?;
        if law.len() <= EXACT_ATOM_LIMIT {
            let profiles = replicas_of(&law, n_max)?;
            let weights = law.iter().map(|a| a.1).collect();
            return Ok(EntropySeries::from_profiles(n_max, profiles, Some(weights)));
        }
    }
    let profiles = replicas(samples, seed, |s| profile(&ensemble.sample(s)?, n_max))?;
    Ok(EntropySeries::from_profiles(n_max, profiles, None))
}

fn replicas_of(law: &[(RootedMultigraph, f64)], n_max: u32) -> Result<Vec<Vec<f64>>> {
    use rayon::prelude::*;
    law.par_iter().map(|(g, _)| profile(g, n_max)).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct RateEstimate {
    /// Intercept of the tail increments `ĥ_{k+1} - ĥ_k` regressed on
    /// `1/(k + ½)`, clamped to `[0, last_increment]`.
    pub value: f64,
    pub se: f64,
    /// `min(intercept + 3 se, last_increment + 3 se_last)`.
    pub upper: f64,
    /// `ĥ_{n_max} - ĥ_{n_max - 1}`; increments decrease to `h`, so this is an
    /// upper estimate.
    pub last_increment: f64,
    /// `ĥ_{n_max} / n_max`, another upper estimate.
    pub ratio: f64,
    pub monotone: bool,
    /// Times `n` with `ĥ_{n+2} - ĥ_{n+1} > ĥ_{n+1} - ĥ_n` beyond 3 SE.
    pub violations: Vec<u32>,
    pub exact: bool,
}

impl RateEstimate {
    pub fn estimate(&self) -> Estimate {
        Estimate { value: self.value, se: self.se, samples: 0, exact: self.exact }
    }
}

/// `h` extrapolated from the tail increments of the series, with a
/// monotonicity check.
pub fn entropy_rate(series: &EntropySeries) -> Result<RateEstimate> {
    let n = series.n_max as usize;
    if n < 3 {
        return Err(Error::param("entropy_rate needs n_max >= 3"));
    }
    let last = series.increment(n - 1);
    let mut violations = Vec::new();
    for k in 0..n - 1 {
        let second = series.linear(&[(k + 2, 1.0), (k + 1, -2.0), (k, 1.0)]);
        let tol = if series.exact { 1e-12 } else { 3.0 * second.se };
        if second.value > tol {
            violations.push(k as u32);
        }
    }
    // Increments behave like h + c/k (the (d/2) log n term of a diffusive
    // part); the intercept removes it. It is linear in the ĥ, so its standard
    // error keeps the within-sample correlation.
    let ks: Vec<usize> = ((n / 2).max(1)..n).collect();
    let xs: Vec<f64> = ks.iter().map(|&k| 1.0 / (k as f64 + 0.5)).collect();
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let mut terms = Vec::new();
    for (&k, &x) in ks.iter().zip(&xs) {
        let w = 1.0 / m - mx * (x - mx) / sxx;
        terms.push((k + 1, w));
        terms.push((k, -w));
    }
    let icpt = series.linear(&terms);
    Ok(RateEstimate {
        value: icpt.value.clamp(0.0, last.value.max(0.0)),
        se: icpt.se,
        upper: icpt.upper(3.0).min(last.upper(3.0)).max(icpt.value.clamp(0.0, last.value.max(0.0))),
        last_increment: last.value,
        ratio: series.mean[n] / n as f64,
        monotone: violations.is_empty(),
        violations,
        exact: series.exact,
    })
}

/// `k ĥ_1 + ĥ_{n-k} - ĥ_n`, the expected conditional entropy of the first `k`
/// steps given the walk from time `n` on.
pub fn conditional_entropy_expectation(series: &EntropySeries, k: u32, n: u32) -> Result<Estimate> {
    if k < 1 || k > n || n > series.n_max {
        return Err(Error::param(format!("need 1 <= k <= n <= n_max, got k={k}, n={n}")));
    }
    let (k, n) = (k as usize, n as usize);
    Ok(series.linear(&[(1, k as f64), (n - k, 1.0), (n, -1.0)]))
}

/// `H(X_1, …, X_k | X_n)` from the exact law of all length-`n` paths.
pub fn direct_conditional_entropy(
    graph: &RootedMultigraph,
    root: VertexId,
    k: u32,
    n: u32,
    max_paths: usize,
) -> Result<f64> {
    if k < 1 || k > n {
        return Err(Error::param("need 1 <= k <= n"));
    }
    let mut paths: Vec<(Vec<VertexId>, f64)> = vec![(vec![root], 1.0)];
    for _ in 0..n {
        let mut next = Vec::new();
        for (p, w) in &paths {
            let nbrs = graph.neighbors(*p.last().unwrap())?;
            let deg: u64 = nbrs.iter().map(|&(_, m)| m as u64).sum();
            for (u, m) in nbrs {
                let mut q = p.clone();
                q.push(u);
                next.push((q, w * m as f64 / deg as f64));
            }
        }
        if next.len() > max_paths {
            return Err(Error::param(format!("more than {max_paths} paths")));
        }
        paths = next;
    }
    let mut joint: BTreeMap<Vec<VertexId>, f64> = BTreeMap::new();
    let mut end: BTreeMap<VertexId, f64> = BTreeMap::new();
    for (p, w) in paths {
        let mut key = p[1..=k as usize].to_vec();
        key.push(p[n as usize]);
        *joint.entry(key).or_default() += w;
        *end.entry(p[n as usize]).or_default() += w;
    }
    let h_joint = pairwise_sum(&joint.values().map(|&p| phi(p)).collect::<Vec<_>>());
    let h_end = pairwise_sum(&end.values().map(|&p| phi(p)).collect::<Vec<_>>());
    Ok(h_joint - h_end)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::FixedEnsemble;

    #[test]
    fn grandfather_series_is_exact() {
        let e = FixedEnsemble::grandfather();
        let s = estimate_h_series(&e, 4, 10, 0).unwrap();
        assert!(s.exact);
        assert_eq!(s.mean[0], 0.0);
        assert!((s.mean[1] - 8f64.ln()).abs() < 1e-12);
        assert!(s.se.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn conditional_entropy_identity_on_the_grandfather_graph() {
        let e = FixedEnsemble::grandfather();
        let g = e.graph().clone();
        let s = estimate_h_series(&e, 4, 1, 0).unwrap();
        for n in 1..=4 {
            for k in 1..=n.min(2) {
                let lhs = conditional_entropy_expectation(&s, k, n).unwrap().value;
                let rhs = direct_conditional_entropy(&g, g.root(), k, n, 10_000).unwrap();
                assert!((lhs - rhs).abs() < 1e-10, "k={k} n={n}: {lhs} vs {rhs}");
            }
        }
    }
}
