#![no_main]

use libfuzzer_sys::fuzz_target;
use tm_core::annotate::AnnotationSet;
use tm_core::dom::{parse_document, serialize, ParseOptions};
use tm_core::rendering::{render, RenderConfig, RenderMode};
use tm_core::scoring::{Channel, ScoreMap};

fuzz_target!(|data: &[u8]| {
    if data.len() > 64 * 1024 || data.is_empty() {
        return;
    }
    let Ok(tree) = parse_document(&data[1..], &ParseOptions::default()) else {
        return;
    };
    // scores and threshold derived from the first byte
    let mut scores = ScoreMap::new();
    for id in tree.ids() {
        scores.insert(id, ((id.0 as u64 * 37 + data[0] as u64) % 101) as u8, Channel::Text).unwrap();
    }
    let plain = serialize(&tree, &AnnotationSet::new()).unwrap();
    parse_document(plain.as_bytes(), &ParseOptions::default()).unwrap();
    for mode in [RenderMode::Gradient, RenderMode::Opacity, RenderMode::Filter] {
        let config = RenderConfig { threshold: data[0] % 101, ..RenderConfig::with_mode(mode) };
        let set = render(&tree, &scores, &config).unwrap();
        let html = serialize(&tree, &set).unwrap();
        parse_document(html.as_bytes(), &ParseOptions::default()).unwrap();
    }
});
