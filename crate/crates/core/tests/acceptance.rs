//! One PASS/FAIL line per acceptance criterion, written straight to stdout
//! so the table shows up without `--nocapture`.

use std::io::Write;

use tempoly::reproduce::{reproduce, ReproduceOptions};

const SEED: u64 = 20240611;

#[test]
fn acceptance_criteria() {
    let opts = ReproduceOptions::new(SEED);
    let summary = reproduce(&opts, |r| {
        let mut out = std::io::stdout().lock();
        let _ = writeln!(out, "{}", r.line());
        let _ = out.flush();
    })
    .unwrap();
    let failed: Vec<String> = summary.criteria.iter().filter(|c| !c.pass).map(|c| c.line()).collect();
    assert!(failed.is_empty(), "failed criteria:\n{}", failed.join("\n"));
}
