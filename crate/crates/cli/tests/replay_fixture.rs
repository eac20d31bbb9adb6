//! The checked-in replay fixture is the recording of a scripted backend
//! that answers the way chat models tend to: fenced JSON, real icon labels,
//! and an image-similarity channel. Set `TM_REGENERATE_FIXTURES=1` to
//! rewrite it after a prompt change.

use std::path::PathBuf;

use tm_core::dom::ParseOptions;
use tm_core::pipeline::analyze_page;
use tm_core::scoring::{
    decompose_task, BackendError, Capabilities, LexicalBackend, RecordingBackend, ReplayBackend, ScorerBackend,
    ScorerRequest, ScoringConfig,
};

const TASK: &str = "I want to buy the cheapest 4 pack low sugar vanilla greek yogurt";

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

struct ModelStyle;

impl ScorerBackend for ModelStyle {
    fn capabilities(&self) -> Capabilities {
        Capabilities::ALL
    }

    fn complete(&self, request: &ScorerRequest<'_>) -> Result<String, BackendError> {
        let fence = |body: String| format!("```json\n{body}\n```");
        match *request {
            ScorerRequest::Breakdown { .. } => Ok(fence(
                r#"{"entity": "vanilla greek yogurt", "constraints": ["cheapest", "4 pack", "low sugar"], "actions": ["filter", "sort by price", "add to cart"], "default": ["price", "pack size"], "fallback": ["search bar"]}"#
                    .to_string(),
            )),
            ScorerRequest::SvgLabels { paths } => {
                let names = ["search", "cart", "menu", "user"];
                let labels: Vec<&str> = (0..paths.len()).map(|i| names[i % names.len()]).collect();
                Ok(serde_json::to_string(&labels).unwrap())
            }
            ScorerRequest::ImageSimilarity { source, .. } => {
                // stable pseudo-similarity in [0.10, 0.46)
                let h = source.bytes().fold(7u32, |a, b| a.wrapping_mul(31).wrapping_add(u32::from(b)));
                Ok(format!("{:.3}", 0.10 + f64::from(h % 37) * 0.01))
            }
            _ => LexicalBackend.complete(request).map(fence),
        }
    }
}

fn record() -> String {
    let recorder = RecordingBackend::new(ModelStyle);
    let config = ScoringConfig::default();
    let context = decompose_task(TASK, &recorder, &config).unwrap();
    let html = std::fs::read(root().join("fixtures/pages/grocery.html")).unwrap();
    analyze_page(&html, &context, &recorder, &config, &ParseOptions::default()).unwrap();
    let mut out = Vec::new();
    recorder.write_jsonl(&mut out).unwrap();
    String::from_utf8(out).unwrap()
}

#[test]
fn replay_fixture_is_current() {
    let path = root().join("fixtures/replay/grocery.jsonl");
    let fresh = record();
    if std::env::var_os("TM_REGENERATE_FIXTURES").is_some() {
        std::fs::write(&path, &fresh).unwrap();
    }
    let stored = std::fs::read_to_string(&path).unwrap();
    assert_eq!(stored, fresh, "fixture is stale; rerun with TM_REGENERATE_FIXTURES=1");

    let replay = ReplayBackend::parse_jsonl(&stored).unwrap();
    assert!(replay.capabilities().image_embedding);
}
