//! One test per acceptance criterion. Each prints a PASS/FAIL line with its
//! measurements and timing, then asserts the outcome.

use std::io::Write;
use std::sync::Mutex;

use adoptlab::verify::{run_criterion, CriterionResult};

// Criteria carry wall-clock budgets, so they run one at a time.
static SERIAL: Mutex<()> = Mutex::new(());

fn criterion(id: u8) -> CriterionResult {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let r = run_criterion(id).expect("known criterion");
    // Written to the raw stream so the line shows for passing tests too.
    let _ = writeln!(std::io::stderr(), "{}", r.line());
    r
}

fn assert_passes(id: u8) {
    let r = criterion(id);
    assert!(r.passed(), "{}", r.line());
}

#[test]
fn c01_bistability() {
    assert_passes(1);
}

#[test]
fn c02_tipping_point() {
    assert_passes(2);
}

#[test]
fn c03_comparative_statics() {
    assert_passes(3);
}

#[test]
fn c04_cost_ratchet() {
    assert_passes(4);
}

#[test]
fn c05_trust_game() {
    assert_passes(5);
}

#[test]
fn c06_trust_cost_interaction() {
    assert_passes(6);
}

#[test]
fn c07_coordination() {
    assert_passes(7);
}

#[test]
fn c08_technology_type() {
    assert_passes(8);
}

#[test]
fn c09_sequencing() {
    assert_passes(9);
}

#[test]
fn c10_numerical_hygiene() {
    assert_passes(10);
}
