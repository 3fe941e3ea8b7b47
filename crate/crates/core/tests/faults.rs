//! The invariant suites must catch deliberately injected faults.

use pclass_core::selftest::{run_suite, Faults, SUITES};

#[test]
fn clean_build_passes_the_fast_suites() {
    for name in ["padic", "teichmuller", "dlog", "von_staudt", "snf"] {
        let r = run_suite(name, Faults::default()).unwrap();
        assert!(r.ok(), "{name}: {:?}", r.failures);
        assert!(r.passed > 0, "{name} ran no checks");
    }
}

#[test]
fn mutated_bernoulli_recurrence_fails_kummer() {
    let faults = Faults {
        bernoulli: true,
        ..Faults::default()
    };
    let r = run_suite("kummer", faults).unwrap();
    assert!(!r.ok());
    assert!(r.failures.iter().any(|f| f.contains("Kummer")), "{:?}", r.failures);
}

#[test]
fn flipped_stickelberger_sign_fails_interpolation() {
    let faults = Faults {
        stickelberger_sign: true,
        ..Faults::default()
    };
    let r = run_suite("interpolation", faults).unwrap();
    assert!(!r.ok());
    let clean = run_suite("interpolation", Faults::default()).unwrap();
    assert!(clean.ok(), "{:?}", clean.failures);
}

#[test]
fn unknown_suite_is_a_usage_error() {
    assert!(run_suite("nope", Faults::default()).is_err());
    assert_eq!(SUITES.len(), 10);
}
