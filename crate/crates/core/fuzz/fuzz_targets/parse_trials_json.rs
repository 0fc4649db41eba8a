#![no_main]

use gazekit::dataset::{build_splits, SplitFractions};
use gazekit::trial::parse_trials_json;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(trials) = parse_trials_json(data) {
        let a = build_splits(&trials, SplitFractions::default(), 0).expect("checked trials split");
        for t in &trials {
            if let Some(src) = &t.source_trial_id {
                assert_eq!(a.split_of[&t.trial_id], a.split_of[src]);
            }
        }
    }
});
