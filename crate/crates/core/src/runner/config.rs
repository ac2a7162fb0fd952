use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::{
    augmented_gw_ensemble, bias_by_degree, canopy_finite_graph, finite_graph_ensemble, reinforced_canopy_finite,
    unbias_by_degree, CanopyEnsemble, CanopyRoot, Ensemble, FixedEnsemble, LrpClusterEnsemble, LrpParams, Norm,
    Offspring, Rooting,
};
use crate::graph::{FiniteGraphBuilder, RootedMultigraph, VertexId};

pub const ENSEMBLE_KINDS: &[&str] = &[
    "grandfather",
    "regular_tree",
    "lattice",
    "path",
    "agw",
    "lrp_cluster",
    "canopy",
    "canopy_finite",
    "edge_list",
];

pub const OPERATIONS: &[&str] = &[
    "generate",
    "walk",
    "entropy",
    "speed",
    "range",
    "growth",
    "inequality",
    "stationarity",
    "reversibility",
    "mtp",
    "cocycle",
    "percolation",
];

/// One experiment, as a flat TOML document.
///
/// ```toml
/// ensemble = "agw"
/// offspring = [0.0, 0.5, 0.5]
/// operation = "entropy"
/// n_max = 10
/// samples = 1000
/// seed = 7
/// ```
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub ensemble: String,
    pub operation: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,

    // operation parameters
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zero_threshold: Option<f64>,
    /// `unit`, `degree` or `signature` (mtp only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transport: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_cycles: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_len: Option<usize>,

    // ensemble parameters
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub size: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offspring: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_children: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth_horizon: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reinforced: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root_depth: Option<u32>,
    /// Truncation of the limit root-depth law, used when `root_depth` is unset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limit_k_max: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub canopy_n: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_exp: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_width: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm: Option<Norm>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rooting: Option<Rooting>,
    /// `degree` or `inverse_degree`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bias: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree_cap: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_list: Option<PathBuf>,
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::ConfigInvalid(msg.into())
}

impl ExperimentConfig {
    pub fn new(ensemble: &str, operation: &str) -> Self {
        ExperimentConfig { ensemble: ensemble.into(), operation: operation.into(), ..Default::default() }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| invalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    /// Parses `text` and applies `key=value` overrides (values in TOML syntax,
    /// bare words taken as strings) before validation.
    pub fn from_toml_with_overrides(text: &str, overrides: &[(String, String)]) -> Result<Self> {
        let mut table: toml::Table = toml::from_str(text).map_err(|e| invalid(e.to_string()))?;
        for (k, v) in overrides {
            let value = match toml::from_str::<toml::Table>(&format!("v = {v}")) {
                Ok(mut t) => t.remove("v").expect("parsed key"),
                Err(_) => toml::Value::String(v.clone()),
            };
            table.insert(k.clone(), value);
        }
        let cfg: ExperimentConfig = table.try_into().map_err(|e: toml::de::Error| invalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if !ENSEMBLE_KINDS.contains(&self.ensemble.as_str()) {
            return Err(invalid(format!("unknown ensemble `{}` (known: {})", self.ensemble, ENSEMBLE_KINDS.join(", "))));
        }
        if !OPERATIONS.contains(&self.operation.as_str()) {
            return Err(invalid(format!("unknown operation `{}` (known: {})", self.operation, OPERATIONS.join(", "))));
        }
        if self.workers == Some(0) {
            return Err(invalid("workers must be positive"));
        }
        if self.samples == Some(0) {
            return Err(invalid("samples must be positive"));
        }
        if let Some(b) = &self.bias {
            if b != "degree" && b != "inverse_degree" {
                return Err(invalid(format!("bias must be `degree` or `inverse_degree`, got `{b}`")));
            }
        }
        if let Some(t) = &self.transport {
            if !["unit", "degree", "signature"].contains(&t.as_str()) {
                return Err(invalid(format!("transport must be unit, degree or signature, got `{t}`")));
            }
        }
        let need = |field: bool, name: &str| {
            if field {
                Ok(())
            } else {
                Err(invalid(format!("ensemble `{}` needs `{name}`", self.ensemble)))
            }
        };
        match self.ensemble.as_str() {
            "lattice" => need(self.dim.is_some(), "dim")?,
            "path" => need(self.size.is_some(), "size")?,
            "agw" => need(self.offspring.is_some(), "offspring")?,
            "lrp_cluster" => need(self.beta.is_some() && self.s_exp.is_some() && self.half_width.is_some(), "beta, s_exp, half_width")?,
            "canopy_finite" => need(self.canopy_n.is_some(), "canopy_n")?,
            "edge_list" => need(self.edge_list.is_some(), "edge_list")?,
            _ => {}
        }
        if self.operation == "percolation" && self.ensemble != "lrp_cluster" {
            return Err(invalid("operation `percolation` needs ensemble `lrp_cluster`"));
        }
        Ok(())
    }

    pub fn samples_or(&self, default: usize) -> usize {
        self.samples.unwrap_or(default)
    }

    pub fn lrp_params(&self) -> Result<LrpParams> {
        let p = LrpParams {
            dim: self.dim.unwrap_or(1),
            beta: self.beta.ok_or_else(|| invalid("missing beta"))?,
            s_exp: self.s_exp.ok_or_else(|| invalid("missing s_exp"))?,
            half_width: self.half_width.ok_or_else(|| invalid("missing half_width"))?,
            norm: self.norm.unwrap_or_default(),
        };
        p.validate()?;
        Ok(p)
    }
}

const DEFAULT_HORIZON: u32 = 100_000;
const DEFAULT_DEGREE_CAP: u64 = 1024;

fn path_graph(size: u64) -> Result<RootedMultigraph> {
    if size < 2 {
        return Err(Error::param("path needs size >= 2"));
    }
    let mut b = FiniteGraphBuilder::new("path");
    for i in 0..size - 1 {
        b.add_edge(VertexId(i), VertexId(i + 1), 1)?;
    }
    Ok(b.build_rooted(VertexId(0)))
}

/// The ensemble described by `cfg`, including any degree biasing.
pub fn build_ensemble(cfg: &ExperimentConfig) -> Result<Arc<dyn Ensemble>> {
    let horizon = cfg.depth_horizon.unwrap_or(DEFAULT_HORIZON);
    let rooting = cfg.rooting.unwrap_or(Rooting::Uniform);
    let base: Arc<dyn Ensemble> = match cfg.ensemble.as_str() {
        "grandfather" => Arc::new(FixedEnsemble::grandfather()),
        "regular_tree" => Arc::new(FixedEnsemble::regular_tree()),
        "lattice" => Arc::new(FixedEnsemble::lattice(cfg.dim.unwrap_or(1))?),
        "path" => Arc::new(finite_graph_ensemble(&path_graph(cfg.size.unwrap_or(3))?, rooting)?),
        "agw" => {
            let probs = cfg.offspring.as_deref().unwrap_or(&[]);
            match cfg.max_children {
                Some(cap) => Arc::new(crate::generators::AugmentedGwEnsemble::new(Offspring::with_cap(probs, cap)?, horizon)),
                None => Arc::new(augmented_gw_ensemble(probs, horizon)?),
            }
        }
        "lrp_cluster" => Arc::new(LrpClusterEnsemble::new(cfg.lrp_params()?)?),
        "canopy" => {
            let root = match (cfg.root_depth, cfg.limit_k_max) {
                (Some(d), _) => CanopyRoot::Depth(d),
                (None, k) => CanopyRoot::LimitLaw { k_max: k.unwrap_or(200) },
            };
            Arc::new(CanopyEnsemble::new(cfg.reinforced.unwrap_or(true), horizon, root)?)
        }
        "canopy_finite" => {
            let n = cfg.canopy_n.unwrap_or(5);
            let g = if cfg.reinforced.unwrap_or(true) { reinforced_canopy_finite(n)? } else { canopy_finite_graph(n)? };
            Arc::new(finite_graph_ensemble(&g, rooting)?)
        }
        "edge_list" => {
            let path = cfg.edge_list.as_ref().expect("validated");
            let file = std::io::BufReader::new(std::fs::File::open(path)?);
            let g = RootedMultigraph::read_edge_list(file)?;
            Arc::new(finite_graph_ensemble(&g, rooting)?)
        }
        other => return Err(invalid(format!("unknown ensemble `{other}`"))),
    };
    let cap = cfg.degree_cap.unwrap_or(DEFAULT_DEGREE_CAP);
    Ok(match cfg.bias.as_deref() {
        Some("degree") => Arc::new(bias_by_degree(base, cap)),
        Some("inverse_degree") => Arc::new(unbias_by_degree(base, cap)),
        _ => base,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_rejects() {
        let cfg = ExperimentConfig::from_toml_str("ensemble = \"grandfather\"\noperation = \"speed\"\nn = 200\nseed = 1").unwrap();
        assert_eq!(cfg.n, Some(200));
        assert!(ExperimentConfig::from_toml_str("ensemble = \"nope\"\noperation = \"speed\"").is_err());
        assert!(ExperimentConfig::from_toml_str("ensemble = \"grandfather\"\noperation = \"speed\"\nbogus = 1").is_err());
        assert!(ExperimentConfig::from_toml_str("ensemble = \"agw\"\noperation = \"speed\"").is_err());
    }

    #[test]
    fn overrides_and_round_trip() {
        let cfg = ExperimentConfig::from_toml_with_overrides(
            "ensemble = \"lattice\"\noperation = \"growth\"",
            &[("dim".into(), "2".into()), ("rooting".into(), "degree_biased".into())],
        )
        .unwrap();
        assert_eq!(cfg.dim, Some(2));
        assert_eq!(cfg.rooting, Some(Rooting::DegreeBiased));
        assert_eq!(ExperimentConfig::from_toml_str(&cfg.to_toml()).unwrap(), cfg);
    }
}
