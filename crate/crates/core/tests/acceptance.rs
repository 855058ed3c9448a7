use std::io::Write;

use kazhdan_core::acceptance::{all_passed, disk_criterion, run_suite, Suite};
use kazhdan_core::curves::C64;

#[test]
fn acceptance_criteria() {
    let results = run_suite(Suite::Full, 0);
    // written to the raw handle so the lines show without --nocapture
    let mut err = std::io::stderr().lock();
    for r in &results {
        writeln!(err, "{}", r.line()).unwrap();
    }
    assert_eq!(results.len(), 9);
    assert!(
        all_passed(&results),
        "at least one acceptance criterion failed"
    );
}

#[test]
fn tampered_disk_density_fails() {
    let tampered = |z: C64| 1.01 * 2.0 / (std::f64::consts::PI * (1.0 - z.norm_sqr()).powi(2));
    let (ok, detail) = disk_criterion(&tampered, 0).unwrap();
    assert!(!ok, "tampered density passed: {detail}");
}
