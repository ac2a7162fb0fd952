use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::generators::Ensemble;
use crate::graph::RootedMultigraph;
use crate::numeric::pairwise_sum;
use crate::seed::derive_seed;
use crate::walk::{simulate_path, WalkPath};

use super::{replicas, Estimate};

fn sample_path(ensemble: &dyn Ensemble, seed: u64, n: usize) -> Result<(RootedMultigraph, WalkPath)> {
    let g = ensemble.sample(seed)?;
    let walk_seed = derive_seed(seed, 0);
    let mut rng = ChaCha8Rng::seed_from_u64(walk_seed);
    let mut path = simulate_path(&g, g.root(), n, &mut rng)?;
    path.seed = Some(walk_seed);
    Ok((g, path))
}

/// `E[D_n] / n` with `D_n = d(X_0, X_n)`.
pub fn speed_estimate(ensemble: &dyn Ensemble, n: usize, samples: usize, seed: u64) -> Result<Estimate> {
    if n < 1 {
        return Err(Error::param("speed needs n >= 1"));
    }
    let xs = replicas(samples, seed, |s| {
        let (g, path) = sample_path(ensemble, s, n)?;
        Ok(g.distance(path.start(), path.end())? as f64 / n as f64)
    })?;
    Ok(Estimate::from_samples(&xs))
}

#[derive(Debug, Clone, Serialize)]
pub struct RangeReport {
    pub n: usize,
    /// `E[R_n] / n`, `R_n = #{X_0, …, X_n}`.
    pub range: Estimate,
    /// Fraction of walks that do not revisit `X_0` during `1..=n`.
    pub non_return: Estimate,
    pub combined_se: f64,
    /// `range - non_return`.
    pub gap: f64,
    /// `|gap| <= 3 combined_se`.
    pub agree: bool,
}

/// Range per step and the non-return frequency, from the same walks.
pub fn range_estimate(ensemble: &dyn Ensemble, n: usize, samples: usize, seed: u64) -> Result<RangeReport> {
    if n < 1 {
        return Err(Error::param("range needs n >= 1"));
    }
    let pairs = replicas(samples, seed, |s| {
        let (_, path) = sample_path(ensemble, s, n)?;
        Ok((path.range() as f64 / n as f64, if path.returns() { 0.0 } else { 1.0 }))
    })?;
    let range = Estimate::from_samples(&pairs.iter().map(|p| p.0).collect::<Vec<_>>());
    let non_return = Estimate::from_samples(&pairs.iter().map(|p| p.1).collect::<Vec<_>>());
    let combined_se = range.se.hypot(non_return.se);
    let gap = range.value - non_return.value;
    Ok(RangeReport { n, range, non_return, combined_se, gap, agree: gap.abs() <= 3.0 * combined_se })
}

#[derive(Debug, Clone, Serialize)]
pub struct GrowthEstimate {
    pub n_max: u32,
    /// `E[log #B(ρ, n)]` for `n = 0..=n_max`.
    pub mean_log_volume: Vec<f64>,
    pub se: Vec<f64>,
    /// Least-squares slope of `log #B(ρ, n)` over `3 n_max/4 ..= n_max`.
    pub slope: Estimate,
    pub exact: bool,
    /// Some sampled finite graph was exhausted by the ball of radius `n_max`.
    pub saturated: bool,
}

/// Least-squares slope of `ys[lo..]` against the index.
pub(crate) fn tail_slope(ys: &[f64], lo: usize) -> f64 {
    let pts: Vec<(f64, f64)> = ys.iter().enumerate().skip(lo).map(|(i, &y)| (i as f64, y)).collect();
    let m = pts.len() as f64;
    let mx = pairwise_sum(&pts.iter().map(|p| p.0).collect::<Vec<_>>()) / m;
    let my = pairwise_sum(&pts.iter().map(|p| p.1).collect::<Vec<_>>()) / m;
    let sxy = pairwise_sum(&pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).collect::<Vec<_>>());
    let sxx = pairwise_sum(&pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).collect::<Vec<_>>());
    sxy / sxx
}

fn log_volumes(g: &RootedMultigraph, n_max: u32) -> Result<(Vec<f64>, bool)> {
    let vols = g.ball_volumes(g.root(), n_max)?;
    let saturated = match g.vertices() {
        Some(v) => *vols.last().unwrap() as usize == v.len(),
        None => false,
    };
    Ok((vols.iter().map(|&b| (b as f64).ln()).collect(), saturated))
}

/// Exponential growth rate `v` from the tail slope of `E[log #B(ρ, n)]`.
pub fn growth_estimate(ensemble: &dyn Ensemble, n_max: u32, samples: usize, seed: u64) -> Result<GrowthEstimate> {
    if n_max < 2 {
        return Err(Error::param("growth needs n_max >= 2"));
    }
    let lo = 3 * n_max as usize / 4;
    let (profiles, exact) = if ensemble.is_deterministic() {
        (vec![log_volumes(&ensemble.sample(seed)?, n_max)?], true)
    } else {
        (replicas(samples, seed, |s| log_volumes(&ensemble.sample(s)?, n_max))?, false)
    };
    let saturated = profiles.iter().any(|p| p.1);
    let column = |i: usize| profiles.iter().map(|p| p.0[i]).collect::<Vec<_>>();
    let mut mean_log_volume = Vec::new();
    let mut se = Vec::new();
    for i in 0..=n_max as usize {
        let e = Estimate::from_samples(&column(i));
        mean_log_volume.push(e.value);
        se.push(if exact { 0.0 } else { e.se });
    }
    let slopes: Vec<f64> = profiles.iter().map(|p| tail_slope(&p.0, lo)).collect();
    let slope = if exact { Estimate::exact(slopes[0]) } else { Estimate::from_samples(&slopes) };
    Ok(GrowthEstimate { n_max, mean_log_volume, se, slope, exact, saturated })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::FixedEnsemble;

    #[test]
    fn three_regular_tree_growth() {
        let e = FixedEnsemble::regular_tree();
        let g = growth_estimate(&e, 20, 1, 0).unwrap();
        assert!((g.slope.value - 2f64.ln()).abs() < 0.02);
    }

    #[test]
    fn plane_grows_slowly() {
        let e = FixedEnsemble::lattice(2).unwrap();
        assert!(growth_estimate(&e, 64, 1, 0).unwrap().slope.value < 0.05);
    }

    #[test]
    fn line_speed_is_small() {
        let e = FixedEnsemble::lattice(1).unwrap();
        let s = speed_estimate(&e, 400, 200, 1).unwrap();
        assert!(s.value < 0.1);
    }
}
