use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::Ensemble;
use crate::graph::{ball_signature, BallSignature, RootedMultigraph};
use crate::seed::derive_seed;
use crate::walk::{simulate_path, ExactWalk};

use super::replicas;

const EXACT_ATOM_LIMIT: usize = 4096;
const BOOTSTRAP_RESAMPLES: usize = 1000;

/// Which rooted object is classified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassMode {
    /// `(G, X_t)`.
    Rooted,
    /// `(G, X_t, X_{t+1})`.
    Forward,
    /// `(G, X_{t+1}, X_t)`.
    Backward,
}

/// Law of the radius-`r` signature of the walk-rooted graph at time `t`.
#[derive(Debug, Clone, Serialize)]
pub struct ClassDistribution {
    pub radius: u32,
    pub time: u32,
    pub mode: ClassMode,
    pub probs: BTreeMap<BallSignature, f64>,
    pub samples: usize,
    pub exact: bool,
    #[serde(skip)]
    observations: Vec<BallSignature>,
}

impl ClassDistribution {
    pub fn class_count(&self) -> usize {
        self.probs.len()
    }

    pub fn prob(&self, sig: &BallSignature) -> f64 {
        self.probs.get(sig).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.probs.values().sum()
    }
}

fn classify(
    g: &RootedMultigraph,
    mode: ClassMode,
    r: u32,
    at: crate::graph::VertexId,
    weight: f64,
    out: &mut BTreeMap<BallSignature, f64>,
) -> Result<()> {
    if mode == ClassMode::Rooted {
        *out.entry(ball_signature(g, at, r, None)?).or_default() += weight;
        return Ok(());
    }
    let nbrs = g.neighbors(at)?;
    let deg: u64 = nbrs.iter().map(|&(_, m)| m as u64).sum();
    for (u, m) in nbrs {
        let sig = match mode {
            ClassMode::Forward => ball_signature(g, at, r, Some(u))?,
            _ => ball_signature(g, u, r, Some(at))?,
        };
        *out.entry(sig).or_default() += weight * m as f64 / deg as f64;
    }
    Ok(())
}

/// Class law of `(G, X_t)` (or of the bi-rooted step at time `t`): exact for
/// small exact-law ensembles, Monte Carlo otherwise.
pub fn class_distribution(
    ensemble: &dyn Ensemble,
    t: u32,
    r: u32,
    samples: usize,
    seed: u64,
    mode: ClassMode,
) -> Result<ClassDistribution> {
    if r < 1 {
        return Err(Error::param("class distributions need r >= 1"));
    }
    if let Some(law) = ensemble.exact_law() {
        let law = law?;
        if law.len() <= EXACT_ATOM_LIMIT {
            let mut probs = BTreeMap::new();
            for (g, w) in &law {
                let mut walk = ExactWalk::new(g, g.root())?;
                for _ in 0..t {
                    walk.step()?;
                }
                for atom in walk.atoms() {
                    classify(g, mode, r, atom.vertex, w * atom.mass, &mut probs)?;
                }
            }
            return Ok(ClassDistribution {
                radius: r,
                time: t,
                mode,
                probs,
                samples: law.len(),
                exact: true,
                observations: Vec::new(),
            });
        }
    }
    let steps = t as usize + usize::from(mode != ClassMode::Rooted);
    let observations = replicas(samples, seed, |s| {
        let g = ensemble.sample(s)?;
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(s, 0));
        let path = simulate_path(&g, g.root(), steps, &mut rng)?;
        let x = path.vertices[t as usize];
        match mode {
            ClassMode::Rooted => ball_signature(&g, x, r, None),
            ClassMode::Forward => ball_signature(&g, x, r, Some(path.vertices[t as usize + 1])),
            ClassMode::Backward => ball_signature(&g, path.vertices[t as usize + 1], r, Some(x)),
        }
    })?;
    let mut probs = BTreeMap::new();
    let unit = 1.0 / samples as f64;
    for sig in &observations {
        *probs.entry(sig.clone()).or_default() += unit;
    }
    Ok(ClassDistribution { radius: r, time: t, mode, probs, samples, exact: false, observations })
}

/// `½ Σ |p - q|` over the union of classes.
pub fn total_variation(p: &ClassDistribution, q: &ClassDistribution) -> f64 {
    let mut diff: BTreeMap<&BallSignature, f64> = BTreeMap::new();
    for (k, v) in &p.probs {
        *diff.entry(k).or_default() += v;
    }
    for (k, v) in &q.probs {
        *diff.entry(k).or_default() -= v;
    }
    0.5 * diff.values().map(|d| d.abs()).sum::<f64>()
}

#[derive(Debug, Clone, Serialize)]
pub struct TvTest {
    pub radius: u32,
    pub tv: f64,
    /// Largest TV compatible with equal laws: `1e-12` for exact laws, else the
    /// 99th percentile of the pooled bootstrap.
    pub threshold: f64,
    pub passed: bool,
    pub exact: bool,
    pub samples: usize,
}

fn bootstrap_threshold(a: &ClassDistribution, b: &ClassDistribution, seed: u64) -> f64 {
    let mut index: BTreeMap<&BallSignature, usize> = BTreeMap::new();
    let pool: Vec<usize> = a
        .observations
        .iter()
        .chain(&b.observations)
        .map(|s| {
            let next = index.len();
            *index.entry(s).or_insert(next)
        })
        .collect();
    let k = index.len();
    let (na, nb) = (a.observations.len(), b.observations.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tvs: Vec<f64> = (0..BOOTSTRAP_RESAMPLES)
        .map(|_| {
            let mut diff = vec![0.0f64; k];
            for _ in 0..na {
                diff[pool[rng.random_range(0..pool.len())]] += 1.0 / na as f64;
            }
            for _ in 0..nb {
                diff[pool[rng.random_range(0..pool.len())]] -= 1.0 / nb as f64;
            }
            0.5 * diff.iter().map(|d| d.abs()).sum::<f64>()
        })
        .collect();
    tvs.sort_by(f64::total_cmp);
    tvs[(0.99 * (BOOTSTRAP_RESAMPLES - 1) as f64).round() as usize]
}

fn compare(a: ClassDistribution, b: ClassDistribution, seed: u64) -> TvTest {
    let tv = total_variation(&a, &b);
    let exact = a.exact && b.exact;
    let threshold = if exact { 1e-12 } else { bootstrap_threshold(&a, &b, seed) };
    TvTest { radius: a.radius, tv, threshold, passed: tv <= threshold, exact, samples: a.samples.max(b.samples) }
}

/// TV between the class laws of `(G, X_0)` and `(G, X_n)` at radius `r`.
pub fn stationarity_test(ensemble: &dyn Ensemble, n: u32, r: u32, samples: usize, seed: u64) -> Result<TvTest> {
    if n < 1 {
        return Err(Error::param("stationarity needs n >= 1"));
    }
    let a = class_distribution(ensemble, 0, r, samples, derive_seed(seed, 0), ClassMode::Rooted)?;
    let b = class_distribution(ensemble, n, r, samples, derive_seed(seed, 1), ClassMode::Rooted)?;
    Ok(compare(a, b, derive_seed(seed, 2)))
}

/// TV between the bi-rooted class laws of `(G, X_0, X_1)` and `(G, X_1, X_0)`.
pub fn reversibility_test(ensemble: &dyn Ensemble, r: u32, samples: usize, seed: u64) -> Result<TvTest> {
    let a = class_distribution(ensemble, 0, r, samples, derive_seed(seed, 0), ClassMode::Forward)?;
    let b = class_distribution(ensemble, 0, r, samples, derive_seed(seed, 1), ClassMode::Backward)?;
    Ok(compare(a, b, derive_seed(seed, 2)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{finite_graph_ensemble, FixedEnsemble, Rooting};
    use crate::graph::{FiniteGraphBuilder, VertexId};

    fn p3() -> RootedMultigraph {
        let mut b = FiniteGraphBuilder::new("p3");
        b.add_edge(VertexId(0), VertexId(1), 1).unwrap();
        b.add_edge(VertexId(1), VertexId(2), 1).unwrap();
        b.build_rooted(VertexId(0))
    }

    #[test]
    fn path_of_three_vertices() {
        let biased = finite_graph_ensemble(&p3(), Rooting::DegreeBiased).unwrap();
        let t = stationarity_test(&biased, 1, 1, 0, 0).unwrap();
        assert!(t.exact && t.tv.abs() < 1e-15 && t.passed);
        let uniform = finite_graph_ensemble(&p3(), Rooting::Uniform).unwrap();
        let t = stationarity_test(&uniform, 1, 1, 0, 0).unwrap();
        assert!((t.tv - 1.0 / 3.0).abs() < 1e-12 && !t.passed);
    }

    #[test]
    fn grandfather_is_stationary_but_not_reversible() {
        let e = FixedEnsemble::grandfather();
        assert!(stationarity_test(&e, 2, 2, 0, 0).unwrap().passed);
        let rev = reversibility_test(&e, 2, 0, 0).unwrap();
        assert!((rev.tv - 0.5).abs() < 1e-12);
    }
}
