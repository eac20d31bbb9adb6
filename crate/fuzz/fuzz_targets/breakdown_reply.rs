#![no_main]

use libfuzzer_sys::fuzz_target;
use tm_core::scoring::lexical_score;
use tm_core::scoring::protocol::parse_breakdown_reply;

fuzz_target!(|data: &[u8]| {
    if data.len() > 16 * 1024 {
        return;
    }
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(breakdown) = parse_breakdown_reply(text) {
        assert!(lexical_score(&breakdown, text) <= 100);
    }
});
