//! Turns scores into presentation annotations.
//!
//! Gradient colors every scored node by its own score. Opacity first lifts
//! each node to the maximum score in its subtree, then fades by that value.
//! Filter hides every node outside the ancestor closure of the nodes scoring
//! at or above the threshold.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annotate::{AnnotationSet, Hsl, StyleAdditions};
use crate::cache::{PageKey, ScoreCache};
use crate::dom::{ElementTree, NodeId};
use crate::scoring::ScoreMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RenderMode {
    Gradient,
    Opacity,
    Filter,
}

impl FromStr for RenderMode {
    type Err = RenderError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gradient" => Ok(Self::Gradient),
            "opacity" => Ok(Self::Opacity),
            "filter" => Ok(Self::Filter),
            other => Err(RenderError::InvalidConfig(format!("unknown mode {other:?}"))),
        }
    }
}

impl fmt::Display for RenderMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Gradient => "gradient",
            Self::Opacity => "opacity",
            Self::Filter => "filter",
        })
    }
}

/// Where the gradient color goes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColorFill {
    #[default]
    Outline,
    Background,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RenderConfig {
    pub mode: RenderMode,
    /// Filter mode only.
    pub threshold: u8,
    pub opacity_floor: f64,
    pub saturation: f64,
    pub lightness: f64,
    pub container_tags: Vec<String>,
    pub fill: ColorFill,
}

pub const DEFAULT_THRESHOLD: u8 = 70;

impl Default for RenderConfig {
    fn default() -> Self {
        Self {
            mode: RenderMode::Gradient,
            threshold: DEFAULT_THRESHOLD,
            opacity_floor: 0.1,
            saturation: 85.0,
            lightness: 75.0,
            container_tags: ["div", "body", "section", "header", "footer", "nav", "main", "aside", "ul", "ol", "table"]
                .map(String::from)
                .to_vec(),
            fill: ColorFill::Outline,
        }
    }
}

impl RenderConfig {
    pub fn with_mode(mode: RenderMode) -> Self {
        Self { mode, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), RenderError> {
        let bad = |m: &str| Err(RenderError::InvalidConfig(m.to_string()));
        if self.threshold > 100 {
            return bad("threshold must be within 0..=100");
        }
        if !(0.0..1.0).contains(&self.opacity_floor) {
            return bad("opacity_floor must be in [0, 1)");
        }
        if !(0.0..=100.0).contains(&self.saturation) || !(0.0..=100.0).contains(&self.lightness) {
            return bad("saturation and lightness are percentages");
        }
        Ok(())
    }

    fn is_container(&self, tag: &str) -> bool {
        self.container_tags.iter().any(|t| t == tag)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RenderError {
    #[error("no scores cached for this page")]
    MissingScores,
    #[error("invalid render config: {0}")]
    InvalidConfig(String),
}

/// One score per node in id order; unscored nodes are 0.
pub fn dense_scores(tree: &ElementTree, scores: &ScoreMap) -> Vec<u8> {
    tree.ids().map(|id| scores.get(id).unwrap_or(0)).collect()
}

/// Bottom-up subtree maximum. Children have larger ids than their parent,
/// so one reverse sweep sees every child before its parent.
pub fn propagate_max(tree: &ElementTree, scores: &[u8]) -> Vec<u8> {
    assert_eq!(scores.len(), tree.len(), "one score per node");
    let mut out = scores.to_vec();
    for node in tree.nodes().iter().rev() {
        if let Some(p) = node.parent {
            let s = out[node.id.index()];
            let slot = &mut out[p.index()];
            *slot = (*slot).max(s);
        }
    }
    out
}

pub fn gradient_hue(score: u8) -> f64 {
    120.0 - 1.2 * f64::from(score.min(100))
}

pub fn render_gradient(tree: &ElementTree, scores: &ScoreMap, config: &RenderConfig) -> AnnotationSet {
    let mut set = AnnotationSet::new();
    for node in tree.nodes() {
        if node.in_head() {
            continue;
        }
        let mut style = StyleAdditions {
            transparent_border: config.is_container(&node.tag),
            ..StyleAdditions::default()
        };
        if let Some(score) = scores.get(node.id) {
            let color = Hsl { hue: gradient_hue(score), saturation: config.saturation, lightness: config.lightness };
            match config.fill {
                ColorFill::Outline => style.outline = Some(color),
                ColorFill::Background => style.background = Some(color),
            }
        }
        if !style.is_empty() {
            set.style(node.id, style);
        }
    }
    set
}

pub fn render_opacity(tree: &ElementTree, scores: &ScoreMap, config: &RenderConfig) -> AnnotationSet {
    let propagated = propagate_max(tree, &dense_scores(tree, scores));
    let mut set = AnnotationSet::new();
    for node in tree.nodes() {
        if node.in_head() {
            continue;
        }
        let opacity = (f64::from(propagated[node.id.index()]) / 100.0).max(config.opacity_floor).min(1.0);
        set.style(node.id, StyleAdditions { opacity: Some(opacity), ..StyleAdditions::default() });
    }
    set
}

/// Nodes kept visible at `threshold`: every node scoring at least the
/// threshold, all of their ancestors, and the root down to `body`.
pub fn retained_set(tree: &ElementTree, scores: &[u8], threshold: u8) -> Vec<bool> {
    assert_eq!(scores.len(), tree.len(), "one score per node");
    // a node is retained iff its subtree holds a qualifying node
    let lifted = propagate_max(tree, scores);
    let mut keep: Vec<bool> = lifted.iter().map(|s| *s >= threshold).collect();
    if !keep.is_empty() {
        keep[0] = true;
        for &c in &tree.root().children {
            if tree.node(c).tag == "body" {
                keep[c.index()] = true;
            }
        }
    }
    keep
}

pub fn render_filter(tree: &ElementTree, scores: &ScoreMap, config: &RenderConfig) -> AnnotationSet {
    let keep = retained_set(tree, &dense_scores(tree, scores), config.threshold);
    let mut set = AnnotationSet::new();
    for node in tree.nodes() {
        if keep[node.id.index()] {
            continue;
        }
        let topmost = node.parent.is_none_or(|p| keep[p.index()]);
        set.hide(node.id, topmost);
    }
    set
}

pub fn render(tree: &ElementTree, scores: &ScoreMap, config: &RenderConfig) -> Result<AnnotationSet, RenderError> {
    config.validate()?;
    Ok(match config.mode {
        RenderMode::Gradient => render_gradient(tree, scores, config),
        RenderMode::Opacity => render_opacity(tree, scores, config),
        RenderMode::Filter => render_filter(tree, scores, config),
    })
}

/// Renders a cached page again under a new config without rescoring.
pub fn rerender(
    cache: &ScoreCache,
    key: &PageKey,
    config: &RenderConfig,
) -> Result<(AnnotationSet, std::sync::Arc<crate::cache::CachedPage>), RenderError> {
    let page = cache.get(key).ok_or(RenderError::MissingScores)?;
    if page.tree.digest() != page.digest {
        return Err(RenderError::MissingScores);
    }
    let set = render(&page.tree, &page.scores, config)?;
    Ok((set, page))
}

/// Ids of hidden nodes whose parent is visible.
pub fn hidden_roots(tree: &ElementTree, set: &AnnotationSet) -> Vec<NodeId> {
    let hidden: HashSet<NodeId> = set.hidden_ids().collect();
    tree.ids()
        .filter(|id| hidden.contains(id) && tree.node(*id).parent.is_none_or(|p| !hidden.contains(&p)))
        .collect()
}
