use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::Ensemble;
use crate::seed::derive_seed;

use super::{entropy_rate, estimate_h_series, growth_estimate, speed_estimate, Estimate, RateEstimate, ZERO_THRESHOLD};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InequalityConfig {
    pub entropy_n_max: u32,
    pub speed_n: usize,
    pub growth_n_max: u32,
    pub samples: usize,
    pub seed: u64,
    pub zero_threshold: f64,
}

impl Default for InequalityConfig {
    fn default() -> Self {
        InequalityConfig {
            entropy_n_max: 64,
            speed_n: 2000,
            growth_n_max: 64,
            samples: 1000,
            seed: 0,
            zero_threshold: ZERO_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    /// Some of `h`, `v`, `s` has its CI upper bound below the zero threshold.
    Liouville { via: Vec<String> },
    None,
}

#[derive(Debug, Clone, Serialize)]
pub struct InequalityReport {
    pub ensemble: String,
    pub s: Estimate,
    pub h: RateEstimate,
    pub v: Estimate,
    pub degree_bound: Option<u64>,
    /// `s²/2 <= h + lower_slack`.
    pub lower_holds: bool,
    pub lower_slack: f64,
    /// `h <= v s + upper_slack`.
    pub upper_holds: bool,
    pub upper_slack: f64,
    pub verdict: Verdict,
    pub flags: Vec<String>,
}

impl InequalityReport {
    /// Fails with [`Error::InequalityViolation`] when either side is violated.
    pub fn into_result(self) -> Result<Self> {
        if self.lower_holds && self.upper_holds {
            return Ok(self);
        }
        Err(Error::InequalityViolation(format!(
            "{}: s={:.4} h={:.4} v={:.4} (s²/2 <= h: {}, h <= vs: {})",
            self.ensemble, self.s.value, self.h.value, self.v.value, self.lower_holds, self.upper_holds
        )))
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "ensemble  {}", self.ensemble);
        let _ = writeln!(out, "speed     s = {:.5} ± {:.5}", self.s.value, self.s.se);
        let _ = writeln!(out, "entropy   h = {:.5} ± {:.5}", self.h.value, self.h.se);
        let _ = writeln!(out, "growth    v = {:.5} ± {:.5}", self.v.value, self.v.se);
        let _ = writeln!(
            out,
            "s²/2 <= h   {:.5} <= {:.5} (+{:.4})  {}",
            self.s.value * self.s.value / 2.0,
            self.h.value,
            self.lower_slack,
            if self.lower_holds { "ok" } else { "VIOLATED" }
        );
        let _ = writeln!(
            out,
            "h <= v s    {:.5} <= {:.5} (+{:.4})  {}",
            self.h.value,
            self.v.value * self.s.value,
            self.upper_slack,
            if self.upper_holds { "ok" } else { "VIOLATED" }
        );
        match &self.verdict {
            Verdict::Liouville { via } => {
                let _ = writeln!(out, "verdict   Liouville (via {})", via.join(", "));
            }
            Verdict::None => {
                let _ = writeln!(out, "verdict   none");
            }
        }
        for f in &self.flags {
            let _ = writeln!(out, "flag      {f}");
        }
        out
    }
}

/// Estimates `s`, `h`, `v`, checks `s²/2 <= h <= v s` and issues the
/// Liouville verdict when one of them is consistent with zero.
pub fn fundamental_inequality_report(ensemble: &dyn Ensemble, cfg: &InequalityConfig) -> Result<InequalityReport> {
    let series = estimate_h_series(ensemble, cfg.entropy_n_max, cfg.samples, derive_seed(cfg.seed, 0))?;
    let h = entropy_rate(&series)?;
    let s = speed_estimate(ensemble, cfg.speed_n, cfg.samples, derive_seed(cfg.seed, 1))?;
    let growth = growth_estimate(ensemble, cfg.growth_n_max, cfg.samples, derive_seed(cfg.seed, 2))?;
    let v = growth.slope;

    let thr = cfg.zero_threshold;
    let lower_slack = 3.0 * (s.value * s.se).hypot(h.se) + thr;
    let upper_slack = 3.0 * (h.se.hypot(v.value * s.se)).hypot(s.value * v.se) + thr;
    let lower_holds = s.value * s.value / 2.0 <= h.value + lower_slack;
    let upper_holds = h.value <= v.value * s.value + upper_slack;

    let mut via = Vec::new();
    if h.upper < thr {
        via.push("entropy".to_string());
    }
    if v.upper(3.0) < thr {
        via.push("growth".to_string());
    }
    if s.upper(3.0) < thr {
        via.push("speed".to_string());
    }
    let verdict = if via.is_empty() { Verdict::None } else { Verdict::Liouville { via } };

    let mut flags = ensemble.flags();
    if !h.monotone {
        flags.push(format!("non-monotone-increments:{:?}", h.violations));
    }
    if growth.saturated {
        flags.push("growth-saturated".into());
    }
    if ensemble.degree_bound().is_none() {
        flags.push("unbounded-degree".into());
    }
    Ok(InequalityReport {
        ensemble: ensemble.kind(),
        s,
        h,
        v,
        degree_bound: ensemble.degree_bound(),
        lower_holds,
        lower_slack,
        upper_holds,
        upper_slack,
        verdict,
        flags,
    })
}
