use rayon::prelude::*;
use tracing::debug;

use super::backend::{BackendError, RequestKind, ScorerBackend, ScorerRequest};
use super::protocol::{self, ProtocolError};
use super::{Channel, Score, ScoreMap, ScoringConfig, ScoringError, TaskContext};
use crate::dom::{NodeId, ScoringBatchItem, VisualElement, VisualKind, MIN_TEXT_CHARS};

/// Sends `request`, validating the reply with `parse`. A failed call or a
/// malformed reply is retried `retry_limit` times before giving up.
fn call_validated<T>(
    backend: &dyn ScorerBackend,
    request: &ScorerRequest<'_>,
    retry_limit: u32,
    parse: impl Fn(&str) -> Result<T, ProtocolError>,
) -> Result<T, ScoringError> {
    let kind = request.kind();
    if !backend.capabilities().supports(kind) {
        return Err(ScoringError::Unsupported(kind));
    }
    let mut last = None;
    for attempt in 0..=retry_limit {
        match backend.complete(request) {
            Ok(reply) => match parse(&reply) {
                Ok(value) => return Ok(value),
                Err(e) => {
                    debug!(?kind, attempt, error = %e, "malformed reply");
                    last = Some(match kind {
                        RequestKind::Breakdown => ScoringError::SchemaViolation(e.to_string()),
                        _ => ScoringError::BatchProtocolViolation { kind, detail: e.to_string() },
                    });
                }
            },
            Err(BackendError::Unsupported(k)) => return Err(ScoringError::Unsupported(k)),
            Err(e) => {
                debug!(?kind, attempt, error = %e, "backend call failed");
                last = Some(ScoringError::BackendUnavailable(e.to_string()));
            }
        }
    }
    Err(last.expect("at least one attempt"))
}

/// Decomposes `task` into its five-part breakdown.
pub fn decompose_task(
    task: &str,
    backend: &dyn ScorerBackend,
    config: &ScoringConfig,
) -> Result<TaskContext, ScoringError> {
    let task = task.trim();
    if task.is_empty() {
        return Err(ScoringError::EmptyTask);
    }
    let breakdown = call_validated(backend, &ScorerRequest::Breakdown { task }, config.retry_limit, |r| {
        protocol::parse_breakdown_reply(r)
    })?;
    Ok(TaskContext { task: task.to_string(), breakdown })
}

fn score_items(
    context: &TaskContext,
    items: &[ScoringBatchItem],
    backend: &dyn ScorerBackend,
    config: &ScoringConfig,
) -> Result<Vec<u8>, ScoringError> {
    let request = ScorerRequest::TextBatch { context, items };
    call_validated(backend, &request, config.retry_limit, |r| protocol::parse_score_reply(r, items.len()))
}

/// Scores every batched text element. Batches run concurrently; the result
/// does not depend on scheduling.
pub fn score_text_batches(
    context: &TaskContext,
    batches: &[Vec<ScoringBatchItem>],
    backend: &dyn ScorerBackend,
    config: &ScoringConfig,
) -> Result<ScoreMap, ScoringError> {
    let results: Vec<Vec<u8>> = batches
        .par_iter()
        .filter(|b| !b.is_empty())
        .map(|batch| score_items(context, batch, backend, config))
        .collect::<Result<_, _>>()?;
    let mut map = ScoreMap::new();
    for (batch, scores) in batches.iter().filter(|b| !b.is_empty()).zip(results) {
        for (item, score) in batch.iter().zip(scores) {
            map.insert(item.element_id, score, Channel::Text)?;
        }
    }
    Ok(map)
}

/// Cosine similarity mapped linearly from `range` onto 0..=100, clamped.
pub fn scale_similarity(cosine: f64, range: (f64, f64)) -> u8 {
    let (lo, hi) = range;
    let unit = ((cosine - lo) / (hi - lo)).clamp(0.0, 1.0);
    (unit * 100.0).round() as u8
}

/// Combines the alt-text and image-embedding channels of one image.
pub fn combine_image_score(alt: Option<u8>, image: Option<u8>, config: &ScoringConfig) -> Score {
    match (alt, image) {
        (Some(a), Some(i)) => {
            let raw = config.alt_weight * f64::from(a) + config.image_weight * f64::from(i);
            // snap float noise so exact halves round up
            let snapped = (raw * 1e6).round() / 1e6;
            Score { score: snapped.round().clamp(0.0, 100.0) as u8, channel: Channel::CombinedImage }
        }
        (None, Some(i)) => Score { score: i, channel: Channel::ImageEmbedding },
        (Some(a), None) => Score { score: a, channel: Channel::Alt },
        (None, None) => Score { score: config.missing_embedding_default, channel: Channel::ImageEmbedding },
    }
}

fn usable_alt(visual: &VisualElement) -> Option<&str> {
    visual.alt_text.as_deref().map(str::trim).filter(|a| !a.is_empty())
}

enum ChannelOutcome<T> {
    Value(T),
    NotOffered,
    Failed(String),
}

fn image_similarity(
    context: &TaskContext,
    visual: &VisualElement,
    backend: &dyn ScorerBackend,
    config: &ScoringConfig,
) -> Result<ChannelOutcome<u8>, ScoringError> {
    let Some(source) = visual.source.as_deref() else {
        return Ok(ChannelOutcome::NotOffered);
    };
    if !backend.capabilities().image_embedding {
        return Ok(ChannelOutcome::NotOffered);
    }
    let request = ScorerRequest::ImageSimilarity { task: &context.task, source };
    match call_validated(backend, &request, config.retry_limit, protocol::parse_similarity_reply) {
        Ok(cos) => Ok(ChannelOutcome::Value(scale_similarity(cos, config.similarity_range))),
        Err(ScoringError::BackendUnavailable(e)) => Ok(ChannelOutcome::Failed(e)),
        Err(ScoringError::Unsupported(_)) => Ok(ChannelOutcome::NotOffered),
        Err(e) => Err(e),
    }
}

/// Scores images: alt texts go out in batches, each image with a source is
/// compared by embedding, and the two channels are combined.
pub fn score_images(
    context: &TaskContext,
    images: &[VisualElement],
    backend: &dyn ScorerBackend,
    config: &ScoringConfig,
) -> Result<Vec<(NodeId, Score)>, ScoringError> {
    let images: Vec<&VisualElement> = images.iter().filter(|v| v.kind == VisualKind::Image).collect();
    if images.is_empty() {
        return Ok(Vec::new());
    }

    let with_alt: Vec<(usize, String)> = images
        .iter()
        .enumerate()
        .filter_map(|(i, v)| usable_alt(v).map(|a| (i, a.to_string())))
        .collect();
    let mut alt_scores: Vec<ChannelOutcome<u8>> = images.iter().map(|_| ChannelOutcome::NotOffered).collect();
    if !with_alt.is_empty() && backend.capabilities().alt_batch {
        for chunk in with_alt.chunks(config.batch_size().get()) {
            let alts: Vec<String> = chunk.iter().map(|(_, a)| a.clone()).collect();
            let request = ScorerRequest::AltBatch { context, alts: &alts };
            match call_validated(backend, &request, config.retry_limit, |r| protocol::parse_score_reply(r, alts.len())) {
                Ok(scores) => {
                    for ((i, _), s) in chunk.iter().zip(scores) {
                        alt_scores[*i] = ChannelOutcome::Value(s);
                    }
                }
                Err(ScoringError::BackendUnavailable(e)) => {
                    for (i, _) in chunk {
                        alt_scores[*i] = ChannelOutcome::Failed(e.clone());
                    }
                }
                Err(e) => return Err(e),
            }
        }
    }

    let embeddings: Vec<ChannelOutcome<u8>> = images
        .par_iter()
        .map(|v| image_similarity(context, v, backend, config))
        .collect::<Result<_, _>>()?;

    let mut out = Vec::with_capacity(images.len());
    for ((visual, alt), image) in images.iter().zip(alt_scores).zip(embeddings) {
        if let (ChannelOutcome::Failed(a), ChannelOutcome::Failed(b)) = (&alt, &image) {
            return Err(ScoringError::BackendUnavailable(format!("alt: {a}; image: {b}")));
        }
        let value = |o: ChannelOutcome<u8>| match o {
            ChannelOutcome::Value(v) => Some(v),
            _ => None,
        };
        out.push((visual.element_id, combine_image_score(value(alt), value(image), config)));
    }
    Ok(out)
}

/// Scores a single image.
pub fn score_image(
    context: &TaskContext,
    visual: &VisualElement,
    backend: &dyn ScorerBackend,
    config: &ScoringConfig,
) -> Result<Score, ScoringError> {
    if visual.kind != VisualKind::Image {
        return Err(ScoringError::InvalidConfig(format!("node {} is not an image", visual.element_id)));
    }
    let scored = score_images(context, std::slice::from_ref(visual), backend, config)?;
    Ok(scored[0].1)
}

/// Labels SVG icons from their path data, then scores the labels.
pub fn label_and_score_icons(
    context: &TaskContext,
    icons: &[VisualElement],
    backend: &dyn ScorerBackend,
    config: &ScoringConfig,
) -> Result<Vec<(NodeId, Score)>, ScoringError> {
    let icons: Vec<(NodeId, String)> = icons
        .iter()
        .filter(|v| v.kind == VisualKind::SvgIcon)
        .filter_map(|v| v.path_data.clone().map(|d| (v.element_id, d)))
        .collect();
    let chunks: Vec<&[(NodeId, String)]> = icons.chunks(config.batch_size().get()).collect();
    let scored: Vec<Vec<(NodeId, Score)>> = chunks
        .par_iter()
        .map(|chunk| {
            let paths: Vec<String> = chunk.iter().map(|(_, d)| d.clone()).collect();
            let labels = call_validated(backend, &ScorerRequest::SvgLabels { paths: &paths }, config.retry_limit, |r| {
                protocol::parse_label_reply(r, paths.len())
            })?;
            let scores = call_validated(
                backend,
                &ScorerRequest::IconBatch { context, labels: &labels },
                config.retry_limit,
                |r| protocol::parse_score_reply(r, labels.len()),
            )?;
            Ok(chunk
                .iter()
                .zip(scores)
                .map(|((id, _), s)| (*id, Score { score: s, channel: Channel::Icon }))
                .collect())
        })
        .collect::<Result<_, ScoringError>>()?;
    Ok(scored.into_iter().flatten().collect())
}

/// Iframes are scored by title through the text channel; a missing or short
/// title scores 0.
pub fn score_iframes(
    context: &TaskContext,
    iframes: &[VisualElement],
    backend: &dyn ScorerBackend,
    config: &ScoringConfig,
) -> Result<Vec<(NodeId, Score)>, ScoringError> {
    let iframes: Vec<&VisualElement> = iframes.iter().filter(|v| v.kind == VisualKind::Iframe).collect();
    let items: Vec<ScoringBatchItem> = iframes
        .iter()
        .filter_map(|v| {
            let title = v.alt_text.as_deref()?.split_whitespace().collect::<Vec<_>>().join(" ");
            (title.chars().count() >= MIN_TEXT_CHARS).then(|| ScoringBatchItem {
                element_id: v.element_id,
                tag: "iframe".into(),
                text: title,
                order_index: v.element_id.0,
            })
        })
        .collect();
    let mut titled = std::collections::HashMap::new();
    for chunk in items.chunks(config.batch_size().get()) {
        for (item, s) in chunk.iter().zip(score_items(context, chunk, backend, config)?) {
            titled.insert(item.element_id, s);
        }
    }
    Ok(iframes
        .iter()
        .map(|v| {
            let score = titled.get(&v.element_id).copied().unwrap_or(0);
            (v.element_id, Score { score, channel: Channel::IframeTitle })
        })
        .collect())
}
