//! Element tree: the engine's own copy of a page's DOM.
//!
//! Every element gets an engine-assigned id equal to its pre-order position,
//! a lowercase tag, the text it owns directly, and parent/child links. Script,
//! style and noscript subtrees never become nodes; they are kept as opaque
//! markup so that serialization can reproduce them.

mod batch;
mod parse;
mod serialize;
mod visuals;

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use batch::{build_text_batches, is_scoring_candidate, ScoringBatchItem, TextBatches, MIN_TEXT_CHARS};
pub use parse::{decode_html, parse_document, ParseOptions};
pub use serialize::serialize;
pub use visuals::{extract_visuals, VisualElement, VisualKind};

/// Tags that are dropped from the tree together with their subtrees.
pub const EXCLUDED_TAGS: [&str; 3] = ["script", "style", "noscript"];

/// Attribute carrying the engine id on serialized output.
pub const ID_ATTRIBUTE: &str = "data-tm-id";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DomError {
    #[error("document contains no parseable element")]
    EmptyDocument,
    #[error("cannot decode input: {0}")]
    EncodingError(String),
    #[error("annotation targets unknown node {0}")]
    DanglingAnnotation(NodeId),
    #[error("malformed tree: {0}")]
    MalformedTree(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) enum Namespace {
    Html,
    Svg,
    MathMl,
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Content {
    Text(String),
    Child(NodeId),
    /// Pre-serialized markup (comments, excluded elements).
    Raw(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Doctype {
    pub name: String,
    pub public_id: String,
    pub system_id: String,
}

#[derive(Debug, Clone)]
pub struct ElementNode {
    pub id: NodeId,
    pub tag: String,
    /// Text owned directly by this element (its text children, concatenated).
    pub text: String,
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
    pub order_index: u32,
    pub relevance: bool,
    pub score: Option<u8>,
    pub(crate) namespace: Namespace,
    pub(crate) attrs: Vec<(String, String)>,
    pub(crate) content: Vec<Content>,
    pub(crate) in_head: bool,
}

impl ElementNode {
    pub fn attr(&self, name: &str) -> Option<&str> {
        self.attrs
            .iter()
            .find(|(k, _)| k == name)
            .map(|(_, v)| v.as_str())
    }

    pub fn attrs(&self) -> impl Iterator<Item = (&str, &str)> {
        self.attrs.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// True for `head` and everything below it.
    pub fn in_head(&self) -> bool {
        self.in_head
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    /// Excluded markup (script, style, noscript, comments) kept under this node.
    pub fn raw_fragments(&self) -> impl Iterator<Item = &str> {
        self.content.iter().filter_map(|c| match c {
            Content::Raw(s) => Some(s.as_str()),
            _ => None,
        })
    }
}

#[derive(Debug, Clone)]
pub struct ElementTree {
    nodes: Vec<ElementNode>,
    pub(crate) doctype: Option<Doctype>,
    pub(crate) prologue: Vec<String>,
    pub(crate) epilogue: Vec<String>,
}

impl ElementTree {
    pub fn root(&self) -> &ElementNode {
        &self.nodes[0]
    }

    pub fn root_id(&self) -> NodeId {
        NodeId(0)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn get(&self, id: NodeId) -> Option<&ElementNode> {
        self.nodes.get(id.index())
    }

    /// Panics if `id` is not part of this tree.
    pub fn node(&self, id: NodeId) -> &ElementNode {
        &self.nodes[id.index()]
    }

    pub fn contains(&self, id: NodeId) -> bool {
        id.index() < self.nodes.len()
    }

    /// Nodes in pre-order.
    pub fn nodes(&self) -> &[ElementNode] {
        &self.nodes
    }

    pub fn ids(&self) -> impl DoubleEndedIterator<Item = NodeId> + ExactSizeIterator {
        (0..self.nodes.len() as u32).map(NodeId)
    }

    pub fn doctype(&self) -> Option<&Doctype> {
        self.doctype.as_ref()
    }

    pub fn ancestors(&self, id: NodeId) -> Ancestors<'_> {
        Ancestors {
            tree: self,
            next: self.node(id).parent,
        }
    }

    /// Ids of `id` and all its descendants. Pre-order ids make a subtree a
    /// contiguous range.
    pub fn subtree(&self, id: NodeId) -> std::ops::Range<u32> {
        id.0..id.0 + self.subtree_len(id) as u32
    }

    fn subtree_len(&self, id: NodeId) -> usize {
        let mut end = id;
        while let Some(&last) = self.node(end).children.last() {
            end = last;
        }
        (end.0 - id.0) as usize + 1
    }

    /// Compares tag structure, sibling order and owned text.
    pub fn same_structure(&self, other: &ElementTree) -> bool {
        self.nodes.len() == other.nodes.len()
            && self.nodes.iter().zip(&other.nodes).all(|(a, b)| {
                a.tag == b.tag && a.parent == b.parent && a.children == b.children && a.text == b.text
            })
    }

    /// First structural difference, for diagnostics.
    pub fn structure_diff(&self, other: &ElementTree) -> Option<String> {
        for (a, b) in self.nodes.iter().zip(&other.nodes) {
            if a.tag != b.tag || a.parent != b.parent || a.children != b.children || a.text != b.text {
                return Some(format!(
                    "node {}: <{}> parent {:?} children {:?} text {:?} vs <{}> parent {:?} children {:?} text {:?}",
                    a.id, a.tag, a.parent, a.children, a.text, b.tag, b.parent, b.children, b.text
                ));
            }
        }
        (self.nodes.len() != other.nodes.len())
            .then(|| format!("node count {} vs {}", self.nodes.len(), other.nodes.len()))
    }

    /// Hex SHA-256 over tags, links and text.
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        for node in &self.nodes {
            hasher.update(node.tag.as_bytes());
            hasher.update([0]);
            hasher.update(node.parent.map_or(u32::MAX, |p| p.0).to_le_bytes());
            hasher.update((node.text.len() as u64).to_le_bytes());
            hasher.update(node.text.as_bytes());
        }
        hex::encode(hasher.finalize())
    }

    /// Copy of the tree with `score` and `relevance` filled in.
    pub fn with_scores(&self, scores: impl Fn(NodeId) -> Option<u8>, threshold: u8) -> ElementTree {
        let mut copy = self.clone();
        for node in &mut copy.nodes {
            node.score = scores(node.id);
            node.relevance = node.score.is_some_and(|s| s >= threshold);
        }
        copy
    }

    pub(crate) fn check_links(&self) -> Result<(), DomError> {
        for (i, node) in self.nodes.iter().enumerate() {
            if node.id.index() != i || node.order_index as usize != i {
                return Err(DomError::MalformedTree(format!("node {i} has id {}", node.id)));
            }
            if i == 0 && node.parent.is_some() {
                return Err(DomError::MalformedTree("root has a parent".into()));
            }
            if i > 0 {
                let Some(p) = node.parent else {
                    return Err(DomError::MalformedTree(format!("second root at {i}")));
                };
                if !self.nodes[p.index()].children.contains(&node.id) {
                    return Err(DomError::MalformedTree(format!("{i} missing from parent {p}")));
                }
            }
            for c in &node.children {
                if self.nodes.get(c.index()).and_then(|n| n.parent) != Some(node.id) {
                    return Err(DomError::MalformedTree(format!("child {c} of {i} disagrees")));
                }
            }
        }
        Ok(())
    }
}

pub struct Ancestors<'a> {
    tree: &'a ElementTree,
    next: Option<NodeId>,
}

impl Iterator for Ancestors<'_> {
    type Item = NodeId;

    fn next(&mut self) -> Option<NodeId> {
        let id = self.next?;
        self.next = self.tree.node(id).parent;
        Some(id)
    }
}

/// Incremental pre-order construction of an [`ElementTree`].
///
/// Opening an excluded tag (`script`, `style`, `noscript`) skips it and
/// everything inside until the matching `close`.
#[derive(Debug, Default)]
pub struct TreeBuilder {
    nodes: Vec<ElementNode>,
    stack: Vec<NodeId>,
    skip_depth: usize,
    extra_roots: usize,
    doctype: Option<Doctype>,
    prologue: Vec<String>,
    epilogue: Vec<String>,
}

impl TreeBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn open(&mut self, tag: &str) -> Option<NodeId> {
        self.open_ns(tag, Namespace::Html)
    }

    pub(crate) fn open_ns(&mut self, tag: &str, namespace: Namespace) -> Option<NodeId> {
        let tag = tag.to_ascii_lowercase();
        if self.skip_depth > 0 || EXCLUDED_TAGS.contains(&tag.as_str()) {
            self.skip_depth += 1;
            return None;
        }
        let parent = self.stack.last().copied();
        if parent.is_none() && !self.nodes.is_empty() {
            self.extra_roots += 1;
        }
        let id = NodeId(self.nodes.len() as u32);
        let in_head = tag == "head" || parent.is_some_and(|p| self.nodes[p.index()].in_head);
        if let Some(p) = parent {
            let parent_node = &mut self.nodes[p.index()];
            parent_node.children.push(id);
            parent_node.content.push(Content::Child(id));
        }
        self.nodes.push(ElementNode {
            id,
            tag,
            text: String::new(),
            parent,
            children: Vec::new(),
            order_index: id.0,
            relevance: false,
            score: None,
            namespace,
            attrs: Vec::new(),
            content: Vec::new(),
            in_head,
        });
        self.stack.push(id);
        Some(id)
    }

    /// Adds an attribute to the most recently opened element.
    pub fn attr(&mut self, name: &str, value: &str) {
        if self.skip_depth > 0 {
            return;
        }
        if let Some(&top) = self.stack.last() {
            self.nodes[top.index()].attrs.push((name.to_string(), value.to_string()));
        }
    }

    pub fn text(&mut self, text: &str) {
        if self.skip_depth > 0 || text.is_empty() {
            return;
        }
        if let Some(&top) = self.stack.last() {
            let node = &mut self.nodes[top.index()];
            node.text.push_str(text);
            match node.content.last_mut() {
                Some(Content::Text(t)) => t.push_str(text),
                _ => node.content.push(Content::Text(text.to_string())),
            }
        }
    }

    pub(crate) fn raw(&mut self, markup: String) {
        if self.skip_depth > 0 {
            return;
        }
        match self.stack.last() {
            Some(&top) => self.nodes[top.index()].content.push(Content::Raw(markup)),
            None if self.nodes.is_empty() => self.prologue.push(markup),
            None => self.epilogue.push(markup),
        }
    }

    pub(crate) fn doctype(&mut self, doctype: Doctype) {
        self.doctype = Some(doctype);
    }

    pub fn close(&mut self) {
        if self.skip_depth > 0 {
            self.skip_depth -= 1;
        } else {
            self.stack.pop();
        }
    }

    pub fn finish(self) -> Result<ElementTree, DomError> {
        if self.nodes.is_empty() {
            return Err(DomError::EmptyDocument);
        }
        if self.extra_roots > 0 {
            return Err(DomError::MalformedTree(format!(
                "{} elements outside the root",
                self.extra_roots
            )));
        }
        Ok(ElementTree {
            nodes: self.nodes,
            doctype: self.doctype,
            prologue: self.prologue,
            epilogue: self.epilogue,
        })
    }
}
