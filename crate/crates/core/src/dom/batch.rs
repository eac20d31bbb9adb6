use std::num::NonZeroUsize;

use serde::{Deserialize, Serialize};

use super::{ElementNode, ElementTree, NodeId};

/// Minimum trimmed character count for a text element to be scored.
pub const MIN_TEXT_CHARS: usize = 3;

/// Tags scored through a visual channel rather than as text.
const VISUAL_TAGS: [&str; 3] = ["img", "svg", "iframe"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoringBatchItem {
    pub element_id: NodeId,
    pub tag: String,
    /// Owned text with whitespace runs collapsed.
    pub text: String,
    pub order_index: u32,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TextBatches {
    pub batches: Vec<Vec<ScoringBatchItem>>,
    /// Candidate nodes owning any text at all (whitespace included).
    pub text_nodes: usize,
    /// Text nodes left out by the short-text rule.
    pub pruned: usize,
}

impl TextBatches {
    pub fn batched(&self) -> usize {
        self.text_nodes - self.pruned
    }

    pub fn pruned_fraction(&self) -> f64 {
        if self.text_nodes == 0 {
            0.0
        } else {
            self.pruned as f64 / self.text_nodes as f64
        }
    }

    pub fn items(&self) -> impl Iterator<Item = &ScoringBatchItem> {
        self.batches.iter().flatten()
    }
}

/// Whether a node's text is eligible for the text channel at all: visible
/// content (head metadata other than `title` is not) and not an image, svg
/// or iframe.
pub fn is_scoring_candidate(node: &ElementNode) -> bool {
    (!node.in_head() || node.tag == "title") && !VISUAL_TAGS.contains(&node.tag.as_str())
}

/// Partitions text-bearing nodes with at least three trimmed characters into
/// document-ordered batches of at most `batch_size` items.
pub fn build_text_batches(tree: &ElementTree, batch_size: NonZeroUsize) -> TextBatches {
    let mut out = TextBatches::default();
    let mut current = Vec::new();
    for node in tree.nodes() {
        if node.text.is_empty() || !is_scoring_candidate(node) {
            continue;
        }
        out.text_nodes += 1;
        if node.text.trim().chars().count() < MIN_TEXT_CHARS {
            out.pruned += 1;
            continue;
        }
        current.push(ScoringBatchItem {
            element_id: node.id,
            tag: node.tag.clone(),
            text: node.text.split_whitespace().collect::<Vec<_>>().join(" "),
            order_index: node.order_index,
        });
        if current.len() == batch_size.get() {
            out.batches.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        out.batches.push(current);
    }
    out
}
