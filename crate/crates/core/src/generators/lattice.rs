use crate::error::{Error, Result};
use crate::graph::{Construction, LazyGraph, RootedMultigraph};

/// The hypercubic lattice `Z^d` with unit multiplicities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Lattice {
    pub dim: usize,
}

impl Construction for Lattice {
    type Coord = Vec<i64>;

    fn kind(&self) -> &str {
        "lattice"
    }

    fn origin(&self) -> Vec<i64> {
        vec![0; self.dim]
    }

    fn neighbors(&self, v: &Vec<i64>) -> Result<Vec<(Vec<i64>, u32)>> {
        let mut out = Vec::with_capacity(2 * self.dim);
        for i in 0..self.dim {
            for step in [-1, 1] {
                let mut w = v.clone();
                w[i] += step;
                out.push((w, 1));
            }
        }
        Ok(out)
    }

    fn distance(&self, u: &Vec<i64>, v: &Vec<i64>) -> Option<Result<u64>> {
        Some(Ok(u.iter().zip(v).map(|(a, b)| a.abs_diff(*b)).sum()))
    }

    fn ball_volume(&self, _v: &Vec<i64>, r: u32) -> Option<Result<u128>> {
        // #{x in Z^d : |x|_1 <= r} = sum_k C(d,k) C(r,k) 2^k
        let d = self.dim as u128;
        let r = r as u128;
        let mut total = 0u128;
        for k in 0..=d.min(r) {
            total += binomial(d, k) * binomial(r, k) * (1u128 << k);
        }
        Some(Ok(total))
    }
}

fn binomial(n: u128, k: u128) -> u128 {
    (0..k).fold(1u128, |acc, i| acc * (n - i) / (i + 1))
}

/// `Z^d` rooted at the origin.
pub fn lattice(dim: usize) -> Result<RootedMultigraph> {
    if dim == 0 {
        return Err(Error::param("lattice dimension must be at least 1"));
    }
    Ok(RootedMultigraph::from_oracle(LazyGraph::new(Lattice { dim })))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_volumes_match_bfs() {
        for d in 1..=3 {
            let g = lattice(d).unwrap();
            for r in 0..5 {
                let (bfs, _) = g.bfs(g.root(), r).unwrap();
                assert_eq!(g.ball_volume(g.root(), r).unwrap(), bfs.len() as u128, "d={d} r={r}");
            }
        }
    }

    #[test]
    fn zero_dimension_rejected() {
        assert!(lattice(0).is_err());
    }
}
