//! Runs every acceptance criterion and prints one line per criterion.

use std::io::Write;

use muskat_core::acceptance::{run_suite, DEFAULT_SEED, SUITES};

#[test]
fn acceptance_criteria() {
    // Summary lines go straight to stderr so they show without --nocapture.
    let mut err = std::io::stderr().lock();
    let mut failed = Vec::new();
    for name in SUITES {
        let report = run_suite(name, DEFAULT_SEED).expect("known suite");
        writeln!(err, "{}", report.summary_line()).unwrap();
        for c in &report.checks {
            println!("    {} {} = {:e} (want {})", if c.passed { "ok  " } else { "FAIL" }, c.label, c.value, c.bound);
        }
        if !report.passed() {
            failed.push(name);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
