#![no_main]

use libfuzzer_sys::fuzz_target;
use tm_core::scoring::ReplayBackend;

fuzz_target!(|data: &[u8]| {
    if data.len() > 64 * 1024 {
        return;
    }
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(replay) = ReplayBackend::parse_jsonl(text) {
        assert!(replay.len() <= text.lines().filter(|l| !l.trim().is_empty()).count());
    }
});
