use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ergolab::error::{Error, Result};
use ergolab::runner::{self, exit, ExperimentConfig};

#[derive(Parser)]
#[command(name = "ergolab", version, about = "Experiments on stationary random rooted graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit the edge list of one sample (a ball around the root if infinite).
    Generate(Common),
    /// Simulate one walk path.
    Walk(Common),
    /// Mean entropy series H_n and the rate h.
    Entropy(Common),
    /// Rate of escape s.
    Speed(Common),
    /// Range per step against the non-return probability.
    Range(Common),
    /// Volume growth v.
    Growth(Common),
    /// Fundamental inequality report with the Liouville verdict.
    Inequality(Common),
    /// Stationarity of the rooted class law.
    Stationarity(Common),
    /// Reversibility of the doubly rooted class law.
    Reversibility(Common),
    /// Mass-transport principle with a signature-class function.
    Mtp(Common),
    /// Radon-Nikodym cocycle table and its consistency checks.
    Cocycle(Common),
    /// Sample a long-range percolation configuration.
    Percolation(Common),
    /// Run the `acceptance` or `invariants` suite.
    Suite {
        #[arg(value_parser = ["acceptance", "invariants"])]
        name: String,
        #[arg(long)]
        workers: Option<usize>,
        /// Write one JSON line per criterion here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// TOML experiment config.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Ensemble kind when no config is given.
    #[arg(long)]
    ensemble: Option<String>,
    /// Master seed (overrides ERGOLAB_SEED and the config).
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    /// JSONL record file (edge-list file for `generate`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Config overrides, `key=value` in TOML syntax.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn build_config(op: &str, c: &Common) -> Result<ExperimentConfig> {
    let text = match &c.config {
        Some(p) => std::fs::read_to_string(p)?,
        None => String::new(),
    };
    let mut overrides = Vec::new();
    for kv in &c.set {
        let (k, v) = kv.split_once('=').ok_or_else(|| Error::ConfigInvalid(format!("--set {kv}: expected KEY=VALUE")))?;
        overrides.push((k.trim().to_string(), v.trim().to_string()));
    }
    if let Some(e) = &c.ensemble {
        overrides.push(("ensemble".into(), format!("{e:?}")));
    }
    overrides.push(("operation".into(), format!("{op:?}")));
    if let Some(w) = c.workers {
        overrides.push(("workers".into(), w.to_string()));
    }
    let mut cfg = ExperimentConfig::from_toml_with_overrides(&text, &overrides)?;
    if op != "generate" {
        if let Some(o) = &c.out {
            cfg.out = Some(o.clone());
        }
    }
    runner::resolve_seed(&mut cfg, c.seed)?;
    Ok(cfg)
}

fn experiment(op: &str, c: &Common) -> Result<i32> {
    let cfg = build_config(op, c)?;
    if op == "generate" {
        let text = runner::generate_edge_list(&cfg)?;
        match &c.out {
            Some(p) => std::fs::write(p, text)?,
            None => print!("{text}"),
        }
        return Ok(exit::OK);
    }
    let record = runner::run(&cfg)?;
    println!("{}", serde_json::to_string(&record)?);
    if let Some(report) = record.details.get("report").and_then(|r| r.as_str()) {
        eprintln!("{report}");
    }
    Ok(runner::record_exit_code(&record))
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Generate(c) => experiment("generate", c),
        Command::Walk(c) => experiment("walk", c),
        Command::Entropy(c) => experiment("entropy", c),
        Command::Speed(c) => experiment("speed", c),
        Command::Range(c) => experiment("range", c),
        Command::Growth(c) => experiment("growth", c),
        Command::Inequality(c) => experiment("inequality", c),
        Command::Stationarity(c) => experiment("stationarity", c),
        Command::Reversibility(c) => experiment("reversibility", c),
        Command::Mtp(c) => experiment("mtp", c),
        Command::Cocycle(c) => experiment("cocycle", c),
        Command::Percolation(c) => experiment("percolation", c),
        Command::Suite { name, workers, out } => runner::with_workers(*workers, || runner::suite(name))
            .and_then(|r| r)
            .and_then(|report| {
                print!("{}", report.render());
                if let Some(p) = out {
                    // One JSON line per criterion.
                    let mut text = String::new();
                    for o in &report.outcomes {
                        text.push_str(&serde_json::to_string(o)?);
                        text.push('\n');
                    }
                    std::fs::write(p, text)?;
                }
                Ok(if report.passed() { exit::OK } else { exit::VERDICT })
            }),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(runner::exit_code(&e) as u8)
        }
    }
}
