//! One page through parse, candidate extraction and every scoring channel.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dom::{
    build_text_batches, extract_visuals, parse_document, DomError, ElementTree, ParseOptions, VisualElement,
    VisualKind,
};
use crate::scoring::{
    label_and_score_icons, score_iframes, score_images, score_text_batches, MeteredBackend, ScoreMap,
    ScorerBackend, ScoringConfig, ScoringError, TaskContext,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PipelineError {
    #[error(transparent)]
    Dom(#[from] DomError),
    #[error(transparent)]
    Scoring(#[from] ScoringError),
}

impl PipelineError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, PipelineError::Scoring(e) if e.is_retryable())
    }
}

/// Content the engine can't see into.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnsupportedContent {
    pub canvas: bool,
    pub webgl: bool,
}

impl UnsupportedContent {
    pub fn any(&self) -> bool {
        self.canvas || self.webgl
    }

    pub fn detect(tree: &ElementTree) -> Self {
        let canvas = tree.nodes().iter().any(|n| n.tag == "canvas");
        let webgl = tree
            .nodes()
            .iter()
            .flat_map(|n| n.raw_fragments())
            .any(|raw| raw.to_ascii_lowercase().contains("webgl"));
        Self { canvas, webgl }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PageStats {
    pub node_count: usize,
    pub text_count: usize,
    pub image_count: usize,
    pub svg_count: usize,
    pub iframe_count: usize,
    /// Text nodes sent to the scorer.
    pub batched: usize,
    pub pruned_fraction: f64,
    pub batch_count: usize,
    pub latency_ms: u64,
    pub backend_calls: u64,
    /// Character-based estimates (4 chars per token).
    pub input_tokens_est: u64,
    pub output_tokens_est: u64,
    pub unsupported: UnsupportedContent,
}

#[derive(Debug, Clone)]
pub struct PageAnalysis {
    pub tree: ElementTree,
    pub visuals: Vec<VisualElement>,
    pub scores: ScoreMap,
    pub stats: PageStats,
}

fn of_kind(visuals: &[VisualElement], kind: VisualKind) -> Vec<VisualElement> {
    visuals.iter().filter(|v| v.kind == kind).cloned().collect()
}

/// Parses `html` and scores every candidate against `context`.
pub fn analyze_page(
    html: &[u8],
    context: &TaskContext,
    backend: &dyn ScorerBackend,
    config: &ScoringConfig,
    parse: &ParseOptions,
) -> Result<PageAnalysis, PipelineError> {
    let started = Instant::now();
    config.validate()?;
    let tree = parse_document(html, parse)?;
    let metered = MeteredBackend::new(backend);

    let batches = build_text_batches(&tree, config.batch_size());
    let visuals = extract_visuals(&tree);
    let images = of_kind(&visuals, VisualKind::Image);
    let icons = of_kind(&visuals, VisualKind::SvgIcon);
    let iframes = of_kind(&visuals, VisualKind::Iframe);

    let mut scores = score_text_batches(context, &batches.batches, &metered, config)?;
    scores.extend(score_images(context, &images, &metered, config)?)?;
    scores.extend(label_and_score_icons(context, &icons, &metered, config)?)?;
    scores.extend(score_iframes(context, &iframes, &metered, config)?)?;

    let counts = metered.counts();
    let svg_count = tree.nodes().iter().filter(|n| n.tag == "svg").count();
    let stats = PageStats {
        node_count: tree.len(),
        text_count: batches.text_nodes,
        image_count: images.len(),
        svg_count,
        iframe_count: iframes.len(),
        batched: batches.batched(),
        pruned_fraction: batches.pruned_fraction(),
        batch_count: batches.batches.len(),
        latency_ms: started.elapsed().as_millis() as u64,
        backend_calls: counts.calls,
        input_tokens_est: counts.input_tokens_est(),
        output_tokens_est: counts.output_tokens_est(),
        unsupported: UnsupportedContent::detect(&tree),
    };
    Ok(PageAnalysis { tree, visuals, scores, stats })
}
