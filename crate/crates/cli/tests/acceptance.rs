//! Runs every acceptance criterion at its stated tolerance.

use std::io::Write;

use spectrum_eq::suite::{criteria, run_suite, SuiteOptions};

#[test]
fn acceptance() {
    let reports = run_suite(&SuiteOptions::default());
    assert_eq!(reports.len(), criteria().len());
    // Written to the raw handle so the lines show up without --nocapture.
    let mut err = std::io::stderr().lock();
    for r in &reports {
        writeln!(err, "{}", r.line()).unwrap();
        for c in r.checks.iter().filter(|c| !c.passed) {
            writeln!(err, "    failed: {} = {:e} (tolerance {:e})", c.label, c.measured, c.tolerance).unwrap();
        }
    }
    drop(err);
    let failed: Vec<_> = reports.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
