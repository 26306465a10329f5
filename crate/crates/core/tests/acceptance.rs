//! Acceptance suite: one test per criterion, each printing a single
//! `criterion N [PASS|FAIL] ...` line. Run with `--nocapture` to see the
//! lines of passing criteria.

use dpkit::harness::{run_experiment, ExperimentConfig, Report};

fn criterion(number: u32, experiment: &str) -> Report {
    let cfg = ExperimentConfig::defaults(experiment).expect("registered experiment");
    let report = run_experiment(&cfg).unwrap_or_else(|e| panic!("{experiment}: {e}"));
    let details: Vec<String> = report
        .checks
        .iter()
        .map(|c| format!("{}{}: {}", if c.pass { "" } else { "FAILED " }, c.label, c.measured))
        .collect();
    println!(
        "criterion {number:>2} [{}] {experiment}: {}",
        report.verdict(),
        details.join("; ")
    );
    report
}

fn assert_passed(report: &Report) {
    let failed: Vec<_> = report.checks.iter().filter(|c| !c.pass).collect();
    assert!(failed.is_empty(), "{}: failing checks {failed:#?}", report.config.name);
}

#[test]
fn criterion_01_sauer_audit() {
    assert_passed(&criterion(1, "sauer-audit"));
}

#[test]
fn criterion_02_dual_law() {
    assert_passed(&criterion(2, "dual-law"));
}

#[test]
fn criterion_03_oracle_against_brute_force() {
    assert_passed(&criterion(3, "oracle-brute"));
}

#[test]
fn criterion_04_ddlo_depth() {
    assert_passed(&criterion(4, "ddlo-depth"));
}

#[test]
fn criterion_05_eqtree_depth() {
    assert_passed(&criterion(5, "eqtree-depth"));
}

#[test]
fn criterion_06_equivalence_round_trip() {
    assert_passed(&criterion(6, "round-trip"));
}

#[test]
fn criterion_07_alternation_bound_audit() {
    assert_passed(&criterion(7, "alt-audit"));
}

#[test]
fn criterion_08_subadditivity_probe() {
    assert_passed(&criterion(8, "subadditivity"));
}

#[test]
fn criterion_09_density_exponents() {
    assert_passed(&criterion(9, "density-fit"));
}

#[test]
fn criterion_10_switch_point_construction() {
    assert_passed(&criterion(10, "switch-points"));
}

#[test]
fn criterion_11_determinism() {
    assert_passed(&criterion(11, "determinism"));
}
