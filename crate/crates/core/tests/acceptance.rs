//! The twelve acceptance criteria, one line each.

use std::io::Write;

use vexnorm::verify::acceptance;

#[test]
fn acceptance() {
    let results = acceptance::run_all();
    // Written to the raw handle so the lines show up without --nocapture.
    let mut out = std::io::stdout().lock();
    writeln!(out).unwrap();
    for r in &results {
        writeln!(out, "{r}").unwrap();
    }
    out.flush().unwrap();
    drop(out);
    let failed: Vec<u32> = results.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
