#![no_main]

use libfuzzer_sys::fuzz_target;
use tm_core::dom::{build_text_batches, extract_visuals, parse_document, ParseOptions};

fuzz_target!(|data: &[u8]| {
    if data.len() > 64 * 1024 {
        return;
    }
    let Ok(tree) = parse_document(data, &ParseOptions::default()) else {
        return;
    };
    for node in tree.nodes() {
        assert!(!matches!(node.tag.as_str(), "script" | "style" | "noscript"));
        if let Some(p) = node.parent {
            assert!(p < node.id);
            assert!(tree.subtree(p).contains(&node.id.0));
        }
    }
    let batches = build_text_batches(&tree, std::num::NonZeroUsize::new(200).unwrap());
    assert!(batches.items().all(|i| i.text.trim().chars().count() >= 3));
    let _ = extract_visuals(&tree);
});
