use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::stats::Estimate;

use super::ExperimentConfig;

pub const RECORD_SCHEMA: &str = "ergolab.record/1";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scalar {
    pub value: f64,
    pub se: f64,
    pub exact: bool,
}

impl From<Estimate> for Scalar {
    fn from(e: Estimate) -> Self {
        Scalar { value: e.value, se: e.se, exact: e.exact }
    }
}

impl Scalar {
    pub fn exact(value: f64) -> Self {
        Scalar { value, se: 0.0, exact: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub n: Vec<u32>,
    pub mean: Vec<f64>,
    pub se: Vec<f64>,
}

impl Series {
    pub fn from_vecs(mean: Vec<f64>, se: Vec<f64>) -> Self {
        Series { n: (0..mean.len() as u32).collect(), mean, se }
    }
}

/// One experiment's output. Re-running `config` reproduces every field but
/// `wall_time_s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub schema: String,
    pub version: String,
    pub config: ExperimentConfig,
    pub ensemble_kind: String,
    pub operation: String,
    pub scalars: BTreeMap<String, Scalar>,
    pub series: BTreeMap<String, Series>,
    pub verdicts: BTreeMap<String, bool>,
    pub flags: Vec<String>,
    pub details: Value,
    pub wall_time_s: f64,
}

impl ResultRecord {
    pub fn new(config: &ExperimentConfig, ensemble_kind: String) -> Self {
        ResultRecord {
            schema: RECORD_SCHEMA.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config: config.clone(),
            ensemble_kind,
            operation: config.operation.clone(),
            scalars: BTreeMap::new(),
            series: BTreeMap::new(),
            verdicts: BTreeMap::new(),
            flags: Vec::new(),
            details: Value::Null,
            wall_time_s: 0.0,
        }
    }

    pub fn scalar(&mut self, name: &str, v: impl Into<Scalar>) -> &mut Self {
        self.scalars.insert(name.into(), v.into());
        self
    }

    pub fn verdict(&mut self, name: &str, ok: bool) -> &mut Self {
        self.verdicts.insert(name.into(), ok);
        self
    }

    pub fn passed(&self) -> bool {
        self.verdicts.values().all(|&v| v)
    }

    /// Equality ignoring wall time.
    pub fn same_numerics(&self, other: &ResultRecord) -> bool {
        ResultRecord { wall_time_s: 0.0, ..self.clone() } == ResultRecord { wall_time_s: 0.0, ..other.clone() }
    }
}

pub fn append_jsonl(path: &Path, record: &ResultRecord) -> Result<()> {
    let mut f = std::fs::OpenOptions::new().create(true).append(true).open(path)?;
    let mut line = serde_json::to_string(record)?;
    line.push('\n');
    f.write_all(line.as_bytes())?;
    Ok(())
}

pub(crate) fn csv_path(out: &Path, operation: &str) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("results");
    out.with_file_name(format!("{stem}.{operation}.csv"))
}

/// `series,n,mean,se` rows for every series in the record.
pub fn write_series_csv(path: &Path, record: &ResultRecord) -> Result<()> {
    let mut out = String::from("series,n,mean,se\n");
    for (name, s) in &record.series {
        for ((n, m), e) in s.n.iter().zip(&s.mean).zip(&s.se) {
            out.push_str(&format!("{name},{n},{m:e},{e:e}\n"));
        }
    }
    std::fs::write(path, out)?;
    Ok(())
}

fn schema_error(msg: impl Into<String>) -> Error {
    Error::ConfigInvalid(format!("record schema: {}", msg.into()))
}

/// Checks a JSON value against the record schema.
pub fn validate_record(v: &Value) -> Result<()> {
    let obj = v.as_object().ok_or_else(|| schema_error("not an object"))?;
    let expect = |key: &str, ok: fn(&Value) -> bool| -> Result<()> {
        match obj.get(key) {
            Some(x) if ok(x) => Ok(()),
            Some(_) => Err(schema_error(format!("`{key}` has the wrong type"))),
            None => Err(schema_error(format!("missing `{key}`"))),
        }
    };
    expect("schema", |x| x.as_str() == Some(RECORD_SCHEMA))?;
    expect("version", Value::is_string)?;
    expect("config", Value::is_object)?;
    expect("ensemble_kind", Value::is_string)?;
    expect("operation", Value::is_string)?;
    expect("scalars", Value::is_object)?;
    expect("series", Value::is_object)?;
    expect("verdicts", Value::is_object)?;
    expect("flags", Value::is_array)?;
    expect("wall_time_s", Value::is_number)?;
    if !obj.contains_key("details") {
        return Err(schema_error("missing `details`"));
    }
    for (name, s) in obj["scalars"].as_object().unwrap() {
        let ok = s.get("value").is_some_and(|x| x.is_number() || x.is_null())
            && s.get("se").is_some_and(|x| x.is_number() || x.is_null())
            && s.get("exact").is_some_and(Value::is_boolean);
        if !ok {
            return Err(schema_error(format!("scalar `{name}` needs value, se, exact")));
        }
    }
    for (name, s) in obj["series"].as_object().unwrap() {
        let len = |k: &str| s.get(k).and_then(Value::as_array).map(Vec::len);
        match (len("n"), len("mean"), len("se")) {
            (Some(a), Some(b), Some(c)) if a == b && b == c => {}
            _ => return Err(schema_error(format!("series `{name}` needs equal-length n, mean, se"))),
        }
    }
    if !obj["verdicts"].as_object().unwrap().values().all(Value::is_boolean) {
        return Err(schema_error("verdicts must be booleans"));
    }
    let cfg: ExperimentConfig =
        serde_json::from_value(obj["config"].clone()).map_err(|e| schema_error(format!("config: {e}")))?;
    cfg.validate()
}
