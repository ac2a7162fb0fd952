//! The acceptance matrix. Prints one PASS/FAIL line per criterion.
//!
//! Three checks are known to fail at desk scale; they are asserted to fail so
//! that a change in their status is noticed.

use std::collections::BTreeSet;
use std::io::Write;

use ergolab::runner::suite;

const EXPECTED_FAILURES: &[&str] = &["c4.reinforced_non_return_majority", "c4.gap", "c13.z2_halving"];

#[test]
fn acceptance_matrix() {
    let report = suite("acceptance").expect("suite runs");
    // Written to the raw handle so the matrix shows up without --nocapture.
    let mut err = std::io::stderr().lock();
    writeln!(err).unwrap();
    for o in &report.outcomes {
        writeln!(err, "{}", o.line()).unwrap();
        if let Some(e) = &o.error {
            writeln!(err, "       error: {e}").unwrap();
        }
        for c in &o.checks {
            writeln!(err, "       {} {}: {}", if c.passed { "ok  " } else { "FAIL" }, c.name, c.detail).unwrap();
        }
    }
    drop(err);
    assert_eq!(report.outcomes.len(), 13);
    let errors: Vec<_> = report.outcomes.iter().filter_map(|o| o.error.as_ref().map(|e| (&o.id, e))).collect();
    assert!(errors.is_empty(), "criteria errored: {errors:?}");
    let failed: BTreeSet<&str> =
        report.outcomes.iter().flat_map(|o| &o.checks).filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    let expected: BTreeSet<&str> = EXPECTED_FAILURES.iter().copied().collect();
    assert_eq!(failed, expected, "unexpected acceptance outcome");
}

#[test]
fn invariant_suite_passes() {
    let report = suite("invariants").expect("suite runs");
    print!("{}", report.render());
    assert!(report.passed());
}
