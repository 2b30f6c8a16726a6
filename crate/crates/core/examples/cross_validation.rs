//! Cross-validate the combinatorial tightness checkers against numeric
//! rank over a batch of generated instances, then prove the harness can
//! detect disagreement at all by sabotaging a matrix entry.
//!
//! Run with `cargo run --example cross_validation`.

use gain_rigidity::crossval::{cross_validate, CrossValOptions};
use gain_rigidity::group::GroupTag;
use gain_rigidity::moves::{Norm, Setting};

fn main() {
    let opts = CrossValOptions { instances: 6, max_moves: 5, trials: 10, seed: 7, ..Default::default() };
    for setting in [
        Setting::new(Norm::Lq(3.0), GroupTag::Z2).unwrap(),
        Setting::new(Norm::Lq(1.5), GroupTag::Cs).unwrap(),
        Setting::new(Norm::Linf, GroupTag::Z2xCs).unwrap(),
    ] {
        let report = cross_validate(&setting, &opts);
        println!(
            "{}: {} instances, {} pairs, {} mismatches, {} ms",
            report.setting,
            report.instances,
            report.pairs_checked,
            report.mismatches.len(),
            report.elapsed_ms
        );
        assert!(report.ok(), "{:?}", report.mismatches);
    }

    // Flipping a single matrix entry must surface as a mismatch; a harness
    // that stayed green here would be checking nothing.
    let sabotage = CrossValOptions { sabotage: true, ..opts };
    let report = cross_validate(&Setting::new(Norm::Lq(3.0), GroupTag::Z2).unwrap(), &sabotage);
    println!("\nwith an injected fault: {} mismatches, e.g.", report.mismatches.len());
    println!("  {}", report.mismatches[0].description);
    assert!(!report.ok());
}
