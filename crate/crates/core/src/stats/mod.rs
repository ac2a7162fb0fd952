//! Monte Carlo and exact estimators over ensembles.

mod classes;
mod entropy;
mod inequality;
mod mtp;
mod walks;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::seed::derive_seed;

pub use crate::generators::{bias_by_degree, unbias_by_degree};
pub use classes::{
    class_distribution, reversibility_test, stationarity_test, total_variation, ClassDistribution,
    ClassMode, TvTest,
};
pub use entropy::{
    conditional_entropy_expectation, direct_conditional_entropy, entropy_rate, estimate_h_series,
    EntropySeries, RateEstimate,
};
pub use inequality::{fundamental_inequality_report, InequalityConfig, InequalityReport, Verdict};
pub use mtp::{mtp_test, MtpReport, PairContext};
pub use walks::{growth_estimate, range_estimate, speed_estimate, GrowthEstimate, RangeReport};

/// Default "consistent with zero" threshold, in nats per step.
pub const ZERO_THRESHOLD: f64 = 0.02;

/// A scalar estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
    pub samples: usize,
    pub exact: bool,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Estimate { value, se: 0.0, samples: 1, exact: true }
    }

    pub fn from_samples(xs: &[f64]) -> Self {
        let (value, se) = crate::numeric::mean_se(xs);
        Estimate { value, se, samples: xs.len(), exact: false }
    }

    pub fn upper(&self, z: f64) -> f64 {
        self.value + z * self.se
    }

    pub fn lower(&self, z: f64) -> f64 {
        self.value - z * self.se
    }
}

/// Runs `f(replica_seed)` for every replica in parallel; results keep replica order.
pub(crate) fn replicas<T, F>(samples: usize, master: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    (0..samples as u64)
        .into_par_iter()
        .map(|i| f(derive_seed(master, i)))
        .collect()
}
