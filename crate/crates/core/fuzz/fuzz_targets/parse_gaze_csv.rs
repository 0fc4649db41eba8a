#![no_main]

use gazekit::trace::{parse_gaze_csv, write_gaze_csv};
use gazekit::Coords;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    for coords in [Coords::Pixel, Coords::Normalized] {
        if let Ok(trace) = parse_gaze_csv(data, 1280, 1024, coords) {
            assert!(!trace.is_empty());
            assert!(trace.samples().windows(2).all(|w| w[0].t < w[1].t));
            let mut out = Vec::new();
            write_gaze_csv(&trace, &mut out).unwrap();
            let back = parse_gaze_csv(&out, 1280, 1024, Coords::Pixel).expect("written trace parses");
            assert_eq!(back.len(), trace.len());
        }
    }
});
