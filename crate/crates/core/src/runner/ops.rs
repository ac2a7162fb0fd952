use std::time::Instant;

use serde_json::json;

use crate::cocycle::{cycle_product_check, elog_delta, estimate_delta, harmonicity_check};
use crate::error::{Error, Result};
use crate::generators::{cluster_of_origin, long_range_percolation};
use crate::hash::stable_hash;
use crate::seed::derive_seed;
use crate::stats::{
    entropy_rate, estimate_h_series, fundamental_inequality_report, growth_estimate, mtp_test, range_estimate,
    reversibility_test, speed_estimate, stationarity_test, InequalityConfig, PairContext, TvTest, Verdict,
    ZERO_THRESHOLD,
};
use crate::walk::simulate_seeded;

use super::record::{ResultRecord, Scalar, Series};
use super::{build_ensemble, ExperimentConfig};

pub(crate) fn execute(cfg: &ExperimentConfig) -> Result<ResultRecord> {
    let started = Instant::now();
    let ensemble = build_ensemble(cfg)?;
    let mut rec = ResultRecord::new(cfg, ensemble.kind());
    let e = ensemble.as_ref();
    let seed = cfg.seed;
    let samples = cfg.samples_or(1000);
    let r = cfg.r.unwrap_or(2);
    match cfg.operation.as_str() {
        "generate" => {
            let text = generate_edge_list(cfg)?;
            let edges = text.lines().skip(1).count();
            rec.scalar("edges", Scalar::exact(edges as f64));
            rec.details = json!({ "edge_list": text });
        }
        "walk" => {
            let g = e.sample(seed)?;
            let n = cfg.n.unwrap_or(100);
            let path = simulate_seeded(&g, g.root(), n, derive_seed(seed, 0))?;
            rec.scalar("distance", Scalar::exact(g.distance(path.start(), path.end())? as f64));
            rec.scalar("range", Scalar::exact(path.range() as f64));
            rec.scalar("returned", Scalar::exact(f64::from(u8::from(path.returns()))));
            rec.details = json!({
                "vertices": path.vertices.iter().map(|v| v.0).collect::<Vec<_>>(),
                "end": g.describe(path.end()),
            });
        }
        "entropy" => {
            let series = estimate_h_series(e, cfg.n_max.unwrap_or(16), samples, seed)?;
            let rate = entropy_rate(&series)?;
            rec.scalar("h", rate.estimate());
            rec.scalar("h_ratio", Scalar { value: rate.ratio, se: 0.0, exact: rate.exact });
            rec.series.insert("h_n".into(), Series::from_vecs(series.mean.clone(), series.se.clone()));
            rec.verdict("increments_monotone", rate.monotone);
            rec.details = json!({ "violations": rate.violations });
        }
        "speed" => {
            rec.scalar("s", speed_estimate(e, cfg.n.unwrap_or(200), samples, seed)?);
        }
        "range" => {
            let rep = range_estimate(e, cfg.n.unwrap_or(1000), samples, seed)?;
            rec.scalar("range_per_step", rep.range);
            rec.scalar("non_return", rep.non_return);
            rec.scalar("gap", Scalar { value: rep.gap, se: rep.combined_se, exact: false });
            rec.verdict("agree", rep.agree);
        }
        "growth" => {
            let g = growth_estimate(e, cfg.n_max.unwrap_or(64), samples, seed)?;
            rec.scalar("v", g.slope);
            rec.series.insert("log_volume".into(), Series::from_vecs(g.mean_log_volume.clone(), g.se.clone()));
            if g.saturated {
                rec.flags.push("growth-saturated".into());
            }
        }
        "inequality" => {
            let d = InequalityConfig::default();
            let ic = InequalityConfig {
                entropy_n_max: cfg.n_max.unwrap_or(d.entropy_n_max),
                growth_n_max: cfg.n_max.unwrap_or(d.growth_n_max),
                speed_n: cfg.n.unwrap_or(d.speed_n),
                samples,
                seed,
                zero_threshold: cfg.zero_threshold.unwrap_or(ZERO_THRESHOLD),
            };
            let rep = fundamental_inequality_report(e, &ic)?;
            rec.scalar("s", rep.s).scalar("h", rep.h.estimate()).scalar("v", rep.v);
            rec.verdict("lower_holds", rep.lower_holds).verdict("upper_holds", rep.upper_holds);
            rec.flags.extend(rep.flags.iter().cloned());
            rec.details = json!({
                "liouville": matches!(rep.verdict, Verdict::Liouville { .. }),
                "verdict": rep.verdict,
                "lower_slack": rep.lower_slack,
                "upper_slack": rep.upper_slack,
                "report": rep.render(),
            });
        }
        "stationarity" => {
            let t = stationarity_test(e, cfg.n.unwrap_or(1) as u32, r, samples, seed)?;
            tv_record(&mut rec, &t);
        }
        "reversibility" => {
            let t = reversibility_test(e, r, samples, seed)?;
            tv_record(&mut rec, &t);
        }
        "mtp" => {
            let kind = cfg.transport.clone().unwrap_or_else(|| "signature".into());
            let f = move |c: &PairContext| match kind.as_str() {
                "unit" => f64::from(c.distance == 1),
                "degree" => if c.distance == 1 { c.deg_second as f64 } else { 0.0 },
                _ => (stable_hash(&c.signature.code) % 1009) as f64 / 1009.0,
            };
            let rep = mtp_test(e, r, f, samples, seed)?;
            rec.scalar("sent", rep.sent).scalar("received", rep.received).scalar("difference", rep.difference);
            rec.verdict("balanced", rep.passed);
        }
        "cocycle" => {
            let table = estimate_delta(e, r, samples, seed)?;
            let el = elog_delta(&table);
            rec.scalar("elog_delta", el.value);
            rec.scalar("ballistic_bound", Scalar { value: el.ballistic_bound, se: el.value.se, exact: el.value.exact });
            rec.scalar("normalization", Scalar::exact(table.normalization()));
            rec.scalar("inverse_symmetry_defect", Scalar::exact(table.inverse_symmetry_defect()));
            let g = e.sample(derive_seed(seed, 1))?;
            let (ball, _) = g.bfs(g.root(), r)?;
            // Harmonicity and cycles need every incident class; skip when the
            // table is sampled and misses some.
            let harm = harmonicity_check(&table, &g, &ball);
            let cycles = cycle_product_check(&table, &g, cfg.n_cycles.unwrap_or(100), cfg.max_len.unwrap_or(12), derive_seed(seed, 2));
            rec.verdict("bounds", table.within_bounds());
            if table.exact {
                rec.verdict("normalized", (table.normalization() - 1.0).abs() < 1e-10);
                rec.verdict("inverse_symmetric", table.inverse_symmetry_defect() < 1e-10);
            }
            match harm {
                Ok(h) => {
                    rec.scalar("harmonicity_deviation", Scalar::exact(h));
                    if table.exact {
                        rec.verdict("harmonic", h < 1e-10);
                    }
                }
                Err(Error::UnknownClass(c)) => rec.flags.push(format!("harmonicity-skipped:unknown-class:{c}")),
                Err(err) => return Err(err),
            }
            match cycles {
                Ok(c) => {
                    rec.scalar("cycle_max_abs_log", Scalar::exact(c.max_abs_log));
                    if table.exact {
                        rec.verdict("cycles", c.max_abs_log < 1e-10);
                    }
                }
                Err(Error::UnknownClass(c)) => rec.flags.push(format!("cycles-skipped:unknown-class:{c}")),
                Err(err) => return Err(err),
            }
            rec.flags.extend(table.warnings.iter().cloned());
            rec.details = serde_json::to_value(&table)?;
        }
        "percolation" => {
            let params = cfg.lrp_params()?;
            let g = long_range_percolation(&params, seed)?;
            let vertices = (2 * params.half_width + 1).pow(params.dim as u32);
            let edges = g.edge_count();
            rec.scalar("edges", Scalar::exact(edges as f64));
            rec.scalar("mean_degree", Scalar::exact(2.0 * edges as f64 / vertices as f64));
            let cluster = cluster_of_origin(g).map(|c| c.vertices().map_or(0, |v| v.len())).unwrap_or(1);
            rec.scalar("origin_cluster_size", Scalar::exact(cluster as f64));
            rec.flags.extend(params.flags());
        }
        other => return Err(Error::ConfigInvalid(format!("unknown operation `{other}`"))),
    }
    rec.flags.extend(e.flags());
    rec.flags.sort();
    rec.flags.dedup();
    rec.wall_time_s = started.elapsed().as_secs_f64();
    Ok(rec)
}

fn tv_record(rec: &mut ResultRecord, t: &TvTest) {
    rec.scalar("tv", Scalar { value: t.tv, se: 0.0, exact: t.exact });
    rec.scalar("threshold", Scalar::exact(t.threshold));
    rec.verdict("passed", t.passed);
}

/// Edge list of one sample: the whole graph when finite, else the ball of
/// radius `r` (default 3) around the root.
pub fn generate_edge_list(cfg: &ExperimentConfig) -> Result<String> {
    let ensemble = build_ensemble(cfg)?;
    let g = ensemble.sample(cfg.seed)?;
    let g = if g.is_finite() { g } else { g.ball(g.root(), cfg.r.unwrap_or(3))? };
    let mut buf = Vec::new();
    g.write_edge_list(&mut buf)?;
    Ok(String::from_utf8(buf).expect("edge lists are ascii"))
}
