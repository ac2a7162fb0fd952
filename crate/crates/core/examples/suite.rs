//! The invariant battery, as `ergolab suite invariants` runs it.

fn main() -> ergolab::error::Result<()> {
    let report = ergolab::runner::suite("invariants")?;
    print!("{}", report.render());
    Ok(())
}
