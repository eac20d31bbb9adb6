//! Per-node presentation changes produced by rendering and applied on
//! serialization.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::dom::NodeId;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hsl {
    pub hue: f64,
    pub saturation: f64,
    pub lightness: f64,
}

impl Hsl {
    pub fn css(&self) -> String {
        format!(
            "hsl({:.1}, {}%, {}%)",
            self.hue,
            trim_float(self.saturation),
            trim_float(self.lightness)
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StyleAdditions {
    pub outline: Option<Hsl>,
    pub background: Option<Hsl>,
    pub opacity: Option<f64>,
    pub transparent_border: bool,
}

impl StyleAdditions {
    pub fn is_empty(&self) -> bool {
        self.outline.is_none() && self.background.is_none() && self.opacity.is_none() && !self.transparent_border
    }

    pub fn css(&self) -> String {
        let mut out = String::new();
        if let Some(color) = &self.outline {
            let _ = write!(out, "outline: 2px solid {}; ", color.css());
        }
        if let Some(color) = &self.background {
            let _ = write!(out, "background-color: {}; ", color.css());
        }
        if let Some(opacity) = self.opacity {
            let _ = write!(out, "opacity: {}; ", trim_float(opacity));
        }
        if self.transparent_border {
            out.push_str("border-color: transparent; ");
        }
        out.truncate(out.trim_end().len());
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HiddenMarker {
    /// Set on the topmost node of each hidden subtree.
    pub inert: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Annotation {
    Styled(StyleAdditions),
    Hidden(HiddenMarker),
}

/// One annotation per node; a node is either styled or hidden, never both.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AnnotationSet {
    entries: BTreeMap<NodeId, Annotation>,
}

impl AnnotationSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, id: NodeId, annotation: Annotation) -> Option<Annotation> {
        self.entries.insert(id, annotation)
    }

    pub fn style(&mut self, id: NodeId, style: StyleAdditions) {
        self.entries.insert(id, Annotation::Styled(style));
    }

    pub fn hide(&mut self, id: NodeId, inert: bool) {
        self.entries.insert(id, Annotation::Hidden(HiddenMarker { inert }));
    }

    pub fn get(&self, id: NodeId) -> Option<&Annotation> {
        self.entries.get(&id)
    }

    pub fn is_hidden(&self, id: NodeId) -> bool {
        matches!(self.entries.get(&id), Some(Annotation::Hidden(_)))
    }

    pub fn hidden_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.entries
            .iter()
            .filter(|(_, a)| matches!(a, Annotation::Hidden(_)))
            .map(|(id, _)| *id)
    }

    pub fn hidden_count(&self) -> usize {
        self.hidden_ids().count()
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, &Annotation)> {
        self.entries.iter().map(|(id, a)| (*id, a))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub(crate) fn trim_float(value: f64) -> String {
    let s = format!("{value:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s.is_empty() || s == "-" {
        "0".to_string()
    } else {
        s.to_string()
    }
}
