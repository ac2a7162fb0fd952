//! End-to-end runs of the `ergolab` binary and of `runner::run`.

use std::process::Command;

use ergolab::runner::{run, validate_record, ExperimentConfig, ResultRecord};

fn ergolab(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_ergolab"))
        .args(args)
        .env_remove("ERGOLAB_SEED")
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn record(stdout: &str) -> ResultRecord {
    serde_json::from_str(stdout.trim()).expect("one JSON record")
}

#[test]
fn grandfather_speed_record() {
    let mut cfg = ExperimentConfig::new("grandfather", "speed");
    cfg.n = Some(200);
    cfg.samples = Some(10_000);
    cfg.seed = 1;
    let rec = run(&cfg).unwrap();
    let s = rec.scalars["s"];
    assert!(s.se > 0.0 && s.value >= 7.0 / 24.0 - 3.0 * s.se);
    validate_record(&serde_json::to_value(&rec).unwrap()).unwrap();
    assert!(rec.same_numerics(&run(&cfg).unwrap()));
}

#[test]
fn z2_inequality_is_liouville() {
    let (code, out, _) = ergolab(&["inequality", "--ensemble", "lattice", "--set", "dim=2", "--set", "n_max=64"]);
    assert_eq!(code, 0);
    let rec = record(&out);
    assert_eq!(rec.details["liouville"], true);
    assert!(rec.scalars["h"].value < 0.05);
}

#[test]
fn outputs_jsonl_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("runs.jsonl");
    let cfg_path = dir.path().join("agw.toml");
    std::fs::write(&cfg_path, "ensemble = \"agw\"\noffspring = [0.0, 0.5, 0.5]\noperation = \"entropy\"\nn_max = 6\nsamples = 50\n")
        .unwrap();
    for seed in ["1", "2"] {
        let (code, _, err) =
            ergolab(&["entropy", "--config", cfg_path.to_str().unwrap(), "--seed", seed, "--out", out.to_str().unwrap()]);
        assert_eq!(code, 0, "{err}");
    }
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    for l in &lines {
        validate_record(&serde_json::from_str(l).unwrap()).unwrap();
    }
    let csv = std::fs::read_to_string(dir.path().join("runs.entropy.csv")).unwrap();
    assert!(csv.starts_with("series,n,mean,se\n"));
    assert_eq!(csv.lines().count(), 1 + 7);
}

#[test]
fn seed_precedence() {
    let run_with = |env: Option<&str>, flag: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_ergolab"));
        cmd.args(["walk", "--ensemble", "lattice", "--set", "dim=2", "--set", "n=20", "--set", "seed=5"]);
        cmd.env_remove("ERGOLAB_SEED");
        if let Some(e) = env {
            cmd.env("ERGOLAB_SEED", e);
        }
        if let Some(f) = flag {
            cmd.args(["--seed", f]);
        }
        let out = cmd.output().unwrap();
        record(&String::from_utf8(out.stdout).unwrap()).config.seed
    };
    assert_eq!(run_with(None, None), 5);
    assert_eq!(run_with(Some("9"), None), 9);
    assert_eq!(run_with(Some("9"), Some("11")), 11);
}

#[test]
fn generate_writes_an_edge_list() {
    let (code, out, _) = ergolab(&["generate", "--ensemble", "grandfather", "--set", "r=1"]);
    assert_eq!(code, 0);
    let g = ergolab::graph::RootedMultigraph::read_edge_list(out.as_bytes()).unwrap();
    assert_eq!(g.vertices().unwrap().len(), 9);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.txt");
    let (code, _, _) =
        ergolab(&["generate", "--ensemble", "path", "--set", "size=4", "--out", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(path).unwrap();
    let (root, edges) = text.split_once('\n').unwrap();
    assert!(root.starts_with("root "));
    assert_eq!(edges, "0 1 1\n1 2 1\n2 3 1\n");
}

#[test]
fn exit_codes() {
    // unknown key
    assert_eq!(ergolab(&["speed", "--ensemble", "grandfather", "--set", "bogus=1"]).0, 2);
    // unknown ensemble
    assert_eq!(ergolab(&["speed", "--ensemble", "nope"]).0, 2);
    // missing config file
    assert_eq!(ergolab(&["speed", "--config", "/nonexistent/x.toml"]).0, 4);
    // the grandfather graph is not reversible: failing verdict
    let (code, out, _) = ergolab(&["reversibility", "--ensemble", "grandfather", "--set", "r=2"]);
    assert_eq!(code, 3);
    assert_eq!(record(&out).verdicts["passed"], false);
    // walking past the materialized horizon of T_∞
    let args = ["walk", "--ensemble", "canopy", "--set", "depth_horizon=3", "--set", "root_depth=3", "--set", "n=50"];
    assert_eq!(ergolab(&args).0, 4);
}

#[test]
fn worker_count_does_not_change_estimates() {
    let mut cfg = ExperimentConfig::new("agw", "speed");
    cfg.offspring = Some(vec![0.0, 0.5, 0.5]);
    cfg.n = Some(40);
    cfg.samples = Some(200);
    cfg.workers = Some(1);
    let a = run(&cfg).unwrap();
    cfg.workers = Some(4);
    let b = run(&cfg).unwrap();
    assert_eq!(a.scalars, b.scalars);
}
