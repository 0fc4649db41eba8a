#![no_main]

use gazekit::fixation::parse_fixations_json;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(segs) = parse_fixations_json(data) {
        assert!(segs.windows(2).all(|w| w[0].end_index < w[1].start_index));
        let text = gazekit::json::to_string(&segs);
        assert_eq!(parse_fixations_json(text.as_bytes()).expect("written segments parse"), segs);
    }
});
