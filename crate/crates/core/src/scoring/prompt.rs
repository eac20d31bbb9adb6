//! Prompt templates sent to remote scorers.

use super::TaskContext;
use crate::dom::ScoringBatchItem;

pub const BREAKDOWN_TEMPLATE: &str = include_str!("../../prompts/breakdown.txt");
pub const TEXT_BATCH_TEMPLATE: &str = include_str!("../../prompts/text_batch.txt");
pub const ALT_BATCH_TEMPLATE: &str = include_str!("../../prompts/alt_batch.txt");
pub const SVG_LABELS_TEMPLATE: &str = include_str!("../../prompts/svg_labels.txt");
pub const ICON_BATCH_TEMPLATE: &str = include_str!("../../prompts/icon_batch.txt");

fn fill(template: &str, pairs: &[(&str, &str)]) -> String {
    // Single pass so that substituted values are never re-scanned.
    let mut out = String::with_capacity(template.len());
    let mut rest = template.trim_end();
    'outer: while let Some(start) = rest.find('{') {
        for (key, value) in pairs {
            if rest[start + 1..].starts_with(key) && rest[start + 1 + key.len()..].starts_with('}') {
                out.push_str(&rest[..start]);
                out.push_str(value);
                rest = &rest[start + key.len() + 2..];
                continue 'outer;
            }
        }
        out.push_str(&rest[..=start]);
        rest = &rest[start + 1..];
    }
    out.push_str(rest);
    out
}

fn numbered<'a>(lines: impl Iterator<Item = String> + 'a) -> String {
    let mut out = String::new();
    for (i, line) in lines.enumerate() {
        out.push('\n');
        out.push_str(&format!("{}. {}", i + 1, line));
    }
    out
}

pub fn breakdown(task: &str) -> String {
    fill(BREAKDOWN_TEMPLATE, &[("task", task)])
}

/// Text elements carry id, document order and tag so the model can infer
/// grouping.
pub fn numbered_elements(items: &[ScoringBatchItem]) -> String {
    numbered(
        items
            .iter()
            .map(|i| format!("[id={} order={} tag={}] {}", i.element_id, i.order_index, i.tag, i.text)),
    )
}

pub fn text_batch(context: &TaskContext, items: &[ScoringBatchItem]) -> String {
    fill(
        TEXT_BATCH_TEMPLATE,
        &[
            ("task", &context.task),
            ("taskBreakdown", &context.breakdown.to_json()),
            ("len(batch)", &items.len().to_string()),
            ("numbered_elements", &numbered_elements(items)),
        ],
    )
}

pub fn alt_batch(context: &TaskContext, alts: &[String]) -> String {
    fill(
        ALT_BATCH_TEMPLATE,
        &[
            ("task", &context.task),
            ("taskBreakdown", &context.breakdown.to_json()),
            ("numbered_alts", &numbered(alts.iter().cloned())),
        ],
    )
}

pub fn svg_labels(paths: &[String]) -> String {
    fill(
        SVG_LABELS_TEMPLATE,
        &[
            ("len(paths)", &paths.len().to_string()),
            ("numbered_paths", &numbered(paths.iter().cloned())),
        ],
    )
}

pub fn icon_batch(context: &TaskContext, labels: &[String]) -> String {
    fill(
        ICON_BATCH_TEMPLATE,
        &[
            ("task", &context.task),
            ("taskBreakdown", &context.breakdown.to_json()),
            ("len(batch)", &labels.len().to_string()),
            ("numbered_elements", &numbered(labels.iter().cloned())),
        ],
    )
}

/// Not a chat prompt: identifies an embedding-similarity request.
pub fn image_similarity(task: &str, source: &str) -> String {
    format!("image-similarity\ntask: {task}\nsource: {source}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dom::NodeId;
    use crate::scoring::TaskBreakdown;

    fn ctx() -> TaskContext {
        TaskContext { task: "buy {yogurt}".into(), breakdown: TaskBreakdown::entity_only("yogurt") }
    }

    #[test]
    fn breakdown_prompt_keeps_json_braces() {
        let p = breakdown("find a tent");
        assert!(p.starts_with("Given the user's task: find a tent, break it down"));
        assert!(p.contains("\"entity\": \"...\","));
        assert!(!p.contains("{task}"));
    }

    #[test]
    fn text_batch_prompt_fills_every_placeholder() {
        let items = vec![
            ScoringBatchItem { element_id: NodeId(4), tag: "h2".into(), text: "Greek yogurt".into(), order_index: 4 },
            ScoringBatchItem { element_id: NodeId(9), tag: "span".into(), text: "$4.99".into(), order_index: 9 },
        ];
        let p = text_batch(&ctx(), &items);
        assert!(p.starts_with("User Task: buy {yogurt}\nTask Steps: {\"entity\":\"yogurt\""));
        assert!(p.contains("Return only an array with 2 scores."));
        assert!(p.ends_with("Text elements to score: \n1. [id=4 order=4 tag=h2] Greek yogurt\n2. [id=9 order=9 tag=span] $4.99"));
        // substituted values are not rescanned
        assert!(!p.contains("{numbered_elements}"));
    }

    #[test]
    fn svg_and_icon_prompts() {
        let p = svg_labels(&["M0 0".into(), "M1 1".into(), "M2 2".into()]);
        assert!(p.contains("Only return a list of 3 names"));
        assert!(p.ends_with("SVG paths: \n1. M0 0\n2. M1 1\n3. M2 2"));
        let p = icon_batch(&ctx(), &["search".into()]);
        assert!(p.contains("Return only an array with 1 scores."));
        assert!(p.ends_with("Icons to score: \n1. search"));
    }
}
