#![no_main]

use libfuzzer_sys::fuzz_target;
use tm_core::scoring::protocol::parse_similarity_reply;
use tm_core::scoring::scale_similarity;

fuzz_target!(|data: &[u8]| {
    if data.len() > 4 * 1024 {
        return;
    }
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(cos) = parse_similarity_reply(text) {
        assert!(cos.is_finite());
        assert!(scale_similarity(cos, (0.15, 0.40)) <= 100);
    }
});
