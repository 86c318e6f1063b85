//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line.
//! Run with `cargo test -p dctc-core --test acceptance -- --nocapture`.

use std::time::Duration;

use dctc_core::validation::{run_check, ValidationOptions};

fn criterion(id: usize, time_limit: Option<Duration>) {
    let report = run_check(id, &ValidationOptions::default()).expect("known check");
    let in_time = time_limit.is_none_or(|limit| report.elapsed < limit);
    let line = if in_time {
        report.to_string()
    } else {
        format!("{report} [over the {:?} limit]", time_limit.unwrap())
    };
    println!("{}", line.replacen("PASS", if in_time { "PASS" } else { "FAIL" }, 1));
    assert!(report.passed && in_time, "criterion {id} failed: {}", report.detail);
}

#[test]
fn criterion_01_fixed_point_structure() {
    criterion(1, Some(Duration::from_secs(30)));
}

#[test]
fn criterion_02_clone_readout() {
    criterion(2, None);
}

#[test]
fn criterion_03_decoherence() {
    criterion(3, None);
}

#[test]
fn criterion_04_coherent_variant() {
    criterion(4, None);
}

#[test]
fn criterion_05_tomography_round_trip() {
    criterion(5, None);
}

#[test]
fn criterion_06_fidelity_convergence() {
    criterion(6, Some(Duration::from_secs(600)));
}

#[test]
fn criterion_07_hoeffding() {
    criterion(7, None);
}

#[test]
fn criterion_08_dense_structured_equivalence() {
    criterion(8, None);
}

#[test]
fn criterion_09_discrimination() {
    criterion(9, None);
}

#[test]
fn criterion_10_nonlinearity_witness() {
    criterion(10, None);
}
