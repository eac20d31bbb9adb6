#![no_main]

use libfuzzer_sys::fuzz_target;
use tm_core::scoring::protocol::parse_score_reply;

fuzz_target!(|data: &[u8]| {
    if data.len() > 16 * 1024 || data.is_empty() {
        return;
    }
    let expected = usize::from(data[0] % 16);
    let Ok(text) = std::str::from_utf8(&data[1..]) else {
        return;
    };
    if let Ok(scores) = parse_score_reply(text, expected) {
        assert_eq!(scores.len(), expected);
        assert!(scores.iter().all(|s| *s <= 100));
    }
});
