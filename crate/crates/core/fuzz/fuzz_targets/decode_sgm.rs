#![no_main]

use gazekit::spatial::{decode_sgm, decode_sgm_raw, encode_sgm};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok((w, h, values)) = decode_sgm_raw(data) {
        assert_eq!(values.len(), w * h);
    }
    if let Ok(grid) = decode_sgm(data) {
        assert_eq!(encode_sgm(&grid), data);
    }
});
