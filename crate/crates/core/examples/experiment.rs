//! Config-driven runs: the same path the CLI takes.

use ergolab::runner::{run, ExperimentConfig};

fn main() -> ergolab::error::Result<()> {
    let cfg = ExperimentConfig::from_toml_str(
        r#"
        ensemble = "grandfather"
        operation = "range"
        n = 500
        samples = 2000
        seed = 11
        "#,
    )?;
    let record = run(&cfg)?;
    println!("{}", serde_json::to_string_pretty(&record)?);
    Ok(())
}
