//! Deterministic token-overlap scorer for offline use and tests.
//!
//! Breakdown tokens are weighted 3 (entity), 2 (constraints) and 1 (actions,
//! defaults, fallbacks), a token keeping its highest weight. An element scores
//! `round(100 * matched / total)` where `matched` sums the weights of distinct
//! breakdown tokens present in the element and `total` sums all of them.

use std::collections::{BTreeMap, BTreeSet};

use super::backend::{BackendError, Capabilities, RequestKind, ScorerBackend, ScorerRequest};
use super::TaskBreakdown;

/// Leading words stripped from a task to form the entity.
const LEADING_STOP_WORDS: &[&str] = &[
    "i", "im", "i'm", "want", "wanna", "would", "like", "need", "to", "buy", "find", "get", "show", "me",
    "search", "for", "look", "looking", "purchase", "order", "please", "help", "the", "a", "an", "what",
    "which", "how", "where", "when", "is", "are", "can", "could", "you", "my", "some", "tell",
];

pub(crate) fn tokenize(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
}

fn token_weights(breakdown: &TaskBreakdown) -> BTreeMap<String, u32> {
    let mut weights = BTreeMap::new();
    let mut add = |text: &str, w: u32| {
        for token in tokenize(text) {
            let slot = weights.entry(token).or_insert(0);
            *slot = (*slot).max(w);
        }
    };
    add(&breakdown.entity, 3);
    for c in &breakdown.constraints {
        add(c, 2);
    }
    for t in breakdown.actions.iter().chain(&breakdown.defaults).chain(&breakdown.fallbacks) {
        add(t, 1);
    }
    weights
}

/// Lexical relevance of `text` to `breakdown`, in 0..=100.
pub fn lexical_score(breakdown: &TaskBreakdown, text: &str) -> u8 {
    let weights = token_weights(breakdown);
    score_with(&weights, text)
}

fn score_with(weights: &BTreeMap<String, u32>, text: &str) -> u8 {
    let total: u64 = weights.values().map(|w| u64::from(*w)).sum();
    if total == 0 {
        return 0;
    }
    let present: BTreeSet<String> = tokenize(text).collect();
    let matched: u64 = present.iter().filter_map(|t| weights.get(t)).map(|w| u64::from(*w)).sum();
    // round half up in integers
    let score = (200 * matched + total) / (2 * total);
    score.min(100) as u8
}

/// Entity is the task minus its leading stop words; other fields are empty.
pub(crate) fn rule_based_breakdown(task: &str) -> TaskBreakdown {
    let words: Vec<&str> = task.split_whitespace().collect();
    let skip = words
        .iter()
        .take_while(|w| {
            let norm: String = w.chars().filter(|c| c.is_alphanumeric() || *c == '\'').collect::<String>().to_lowercase();
            norm.is_empty() || LEADING_STOP_WORDS.contains(&norm.as_str())
        })
        .count();
    let entity = if skip == words.len() {
        task.trim().to_string()
    } else {
        words[skip..].join(" ")
    };
    TaskBreakdown::entity_only(entity)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LexicalBackend;

impl LexicalBackend {
    pub fn new() -> Self {
        Self
    }
}

impl ScorerBackend for LexicalBackend {
    fn capabilities(&self) -> Capabilities {
        Capabilities { image_embedding: false, ..Capabilities::ALL }
    }

    fn complete(&self, request: &ScorerRequest<'_>) -> Result<String, BackendError> {
        let scores = |breakdown: &TaskBreakdown, texts: &mut dyn Iterator<Item = &str>| {
            let weights = token_weights(breakdown);
            let v: Vec<u8> = texts.map(|t| score_with(&weights, t)).collect();
            serde_json::to_string(&v).expect("scores serialize")
        };
        match *request {
            ScorerRequest::Breakdown { task } => Ok(rule_based_breakdown(task).to_json()),
            ScorerRequest::TextBatch { context, items } => {
                Ok(scores(&context.breakdown, &mut items.iter().map(|i| i.text.as_str())))
            }
            ScorerRequest::AltBatch { context, alts } => {
                Ok(scores(&context.breakdown, &mut alts.iter().map(String::as_str)))
            }
            ScorerRequest::IconBatch { context, labels } => {
                Ok(scores(&context.breakdown, &mut labels.iter().map(String::as_str)))
            }
            ScorerRequest::SvgLabels { paths } => {
                Ok(serde_json::to_string(&vec!["icon"; paths.len()]).expect("labels serialize"))
            }
            ScorerRequest::ImageSimilarity { .. } => Err(BackendError::Unsupported(RequestKind::ImageSimilarity)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn yogurt() -> TaskBreakdown {
        TaskBreakdown {
            entity: "vanilla greek yogurt".into(),
            constraints: vec!["low sugar".into(), "cheapest".into()],
            actions: vec!["search".into()],
            defaults: vec!["price".into()],
            fallbacks: vec![],
        }
    }

    #[test]
    fn reference_example() {
        // denom = 3*3 + 2*3 + 1 + 1 = 17; matched vanilla, greek, yogurt = 9
        assert_eq!(lexical_score(&yogurt(), "Vanilla Greek Yogurt 4 pack"), 53);
    }

    #[test]
    fn no_overlap_scores_zero() {
        assert_eq!(lexical_score(&yogurt(), "Contact us"), 0);
    }

    #[test]
    fn all_tokens_score_hundred() {
        assert_eq!(lexical_score(&yogurt(), "vanilla greek yogurt low sugar cheapest search price"), 100);
    }

    #[test]
    fn repeated_tokens_count_once() {
        assert_eq!(lexical_score(&yogurt(), "yogurt yogurt yogurt"), lexical_score(&yogurt(), "yogurt"));
    }

    #[test]
    fn token_takes_max_weight() {
        let b = TaskBreakdown {
            entity: "sugar".into(),
            constraints: vec!["sugar free".into()],
            actions: vec![],
            defaults: vec![],
            fallbacks: vec![],
        };
        // sugar: 3, free: 2 -> total 5; "sugar" alone = 3/5 = 60
        assert_eq!(lexical_score(&b, "Sugar"), 60);
    }

    #[test]
    fn breakdown_strips_leading_verbs() {
        let b = rule_based_breakdown("I want to buy the cheapest 4 pack low sugar vanilla greek yogurt");
        assert_eq!(b.entity, "cheapest 4 pack low sugar vanilla greek yogurt");
        assert!(b.constraints.is_empty() && b.actions.is_empty());
        assert_eq!(rule_based_breakdown("  buy the  ").entity, "buy the");
    }

    #[test]
    fn empty_breakdown_tokens() {
        assert_eq!(lexical_score(&TaskBreakdown::entity_only("!!!"), "anything"), 0);
    }
}
