//! Experiment orchestration: configs, seeds, worker pools, result records and
//! the acceptance / invariant suites.

mod config;
pub mod criteria;
mod ops;
mod record;

pub use crate::seed::derive_seed;
pub use config::{build_ensemble, ExperimentConfig, ENSEMBLE_KINDS, OPERATIONS};
pub use criteria::{suite, Check, Criterion, CriterionOutcome, SuiteReport};
pub use ops::generate_edge_list;
pub use record::{append_jsonl, validate_record, write_series_csv, ResultRecord, Scalar, Series, RECORD_SCHEMA};

use crate::error::{Error, Result};

pub const SEED_ENV: &str = "ERGOLAB_SEED";

/// Seed precedence: explicit flag, then `ERGOLAB_SEED`, then the config.
pub fn resolve_seed(cfg: &mut ExperimentConfig, flag: Option<u64>) -> Result<()> {
    if let Some(s) = flag {
        cfg.seed = s;
    } else if let Ok(v) = std::env::var(SEED_ENV) {
        cfg.seed = v
            .trim()
            .parse()
            .map_err(|_| Error::ConfigInvalid(format!("{SEED_ENV}={v} is not a u64")))?;
    }
    Ok(())
}

/// Runs `f` on a dedicated pool of `workers` threads (the global pool if `None`).
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(f()),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| Error::ConfigInvalid(format!("worker pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Executes one experiment and, when `cfg.out` is set, appends its record to
/// that JSONL file (series go to a sibling CSV).
pub fn run(cfg: &ExperimentConfig) -> Result<ResultRecord> {
    cfg.validate()?;
    let record = with_workers(cfg.workers, || ops::execute(cfg))??;
    if let Some(out) = &cfg.out {
        append_jsonl(out, &record)?;
        if !record.series.is_empty() {
            write_series_csv(&record::csv_path(out, &record.operation), &record)?;
        }
    }
    Ok(record)
}

pub mod exit {
    pub const OK: i32 = 0;
    pub const CONFIG: i32 = 2;
    pub const VERDICT: i32 = 3;
    pub const RESOURCE: i32 = 4;
}

/// Process exit code for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::ConfigInvalid(_) | Error::InvalidParameter(_) | Error::Parse { .. } | Error::Json(_) => exit::CONFIG,
        Error::InequalityViolation(_) | Error::UnknownClass(_) => exit::VERDICT,
        _ => exit::RESOURCE,
    }
}

/// Process exit code for a finished record.
pub fn record_exit_code(record: &ResultRecord) -> i32 {
    if record.passed() {
        exit::OK
    } else {
        exit::VERDICT
    }
}
