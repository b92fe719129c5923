//! One test per acceptance criterion. Each prints a single
//! `criterion N [name]: PASS|FAIL (detail)` line; tolerances live in
//! `zeno_lab::validate`.
//!
//! A process-wide lock serialises the checks so the timed ones measure an
//! otherwise idle process. Lines go straight to stderr so they show up
//! for passing tests too.

use std::io::Write;
use std::sync::Mutex;

use zeno_lab::validate::{self, Check};
use zeno_lab::Result;

static SERIAL: Mutex<()> = Mutex::new(());

fn run(check: fn() -> Result<Check>) {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let c = check().expect("check could not be evaluated");
    let _ = writeln!(std::io::stderr(), "{c}");
    assert!(c.passed, "{c}");
}

#[test]
fn criterion_01_identity_suite() {
    run(validate::identity_suite);
}

#[test]
fn criterion_02_rank_one_suite() {
    run(validate::rank_one_suite);
}

#[test]
fn criterion_03_chain_rule() {
    run(validate::chain_rule_suite);
}

#[test]
fn criterion_04_variance_bounds() {
    run(validate::variance_bounds);
}

#[test]
fn criterion_05_reference_surface_point() {
    run(validate::reference_pstar);
}

#[test]
fn criterion_06_scaling_arithmetic() {
    run(validate::scaling_arithmetic);
}

#[test]
fn criterion_07_fisher_oracle_equivalence() {
    run(validate::fisher_oracles);
}

#[test]
fn criterion_08_monte_carlo_statistics() {
    run(validate::monte_carlo_statistics);
}

#[test]
fn criterion_09_crb_saturation() {
    run(validate::crb_saturation);
}

#[test]
fn criterion_10_determinism() {
    run(validate::determinism);
}
