//! Swapping the FLMI `min` for a `max` must be caught by the self-test.

use smisel::verify::{run_verify, VerifyOptions};
use smisel_core::smi::fault;

#[test]
fn verify_catches_min_to_max_swap() {
    let opts = VerifyOptions { trials: 30, ..VerifyOptions::default() };
    assert!(run_verify(&opts).unwrap().passed());

    fault::set_flmi_min_to_max(true);
    let outcome = run_verify(&opts);
    fault::set_flmi_min_to_max(false);

    let outcome = outcome.unwrap();
    assert!(!outcome.passed());
    let failed: Vec<&str> = outcome.results.iter().filter(|r| !r.passed()).map(|r| r.name).collect();
    assert!(failed.contains(&"flmi-saturation-bound"), "{failed:?}");
}
