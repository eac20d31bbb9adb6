use ego_tree::iter::Edge;
use encoding_rs::Encoding;
use once_cell::sync::Lazy;
use regex::bytes::Regex;
use scraper::{Html, Node};

use super::serialize::{escape_attr, escape_text, is_void, raw_text_parent};
use super::{DomError, Doctype, ElementTree, Namespace, TreeBuilder, ID_ATTRIBUTE};

const HTML_NS: &str = "http://www.w3.org/1999/xhtml";
const SVG_NS: &str = "http://www.w3.org/2000/svg";
const MATHML_NS: &str = "http://www.w3.org/1998/Math/MathML";

static META_CHARSET: Lazy<Regex> = Lazy::new(|| {
    Regex::new(r#"(?i)<meta[^>]*?charset\s*=\s*["']?\s*([A-Za-z0-9_\-:.]+)"#).unwrap()
});

#[derive(Debug, Clone, Default)]
pub struct ParseOptions {
    /// Encoding label used when the input is neither UTF-8 nor declares a
    /// charset. Without it such input is rejected.
    pub fallback_encoding: Option<String>,
}

/// Decodes page bytes: BOM first, then a `<meta charset>` declaration in the
/// first 1024 bytes, then UTF-8, then the configured fallback.
pub fn decode_html(bytes: &[u8], options: &ParseOptions) -> Result<String, DomError> {
    if let Some((encoding, bom_len)) = Encoding::for_bom(bytes) {
        return strict_decode(encoding, &bytes[bom_len..]);
    }
    let head = &bytes[..bytes.len().min(1024)];
    if let Some(label) = META_CHARSET.captures(head).and_then(|c| c.get(1)) {
        // output_encoding() maps in-band UTF-16 declarations to UTF-8.
        if let Some(encoding) = Encoding::for_label(label.as_bytes()).map(Encoding::output_encoding) {
            if let Ok(text) = strict_decode(encoding, bytes) {
                return Ok(text);
            }
        }
    }
    if let Ok(text) = std::str::from_utf8(bytes) {
        return Ok(text.to_string());
    }
    match &options.fallback_encoding {
        Some(label) => {
            let encoding = Encoding::for_label(label.as_bytes())
                .ok_or_else(|| DomError::EncodingError(format!("unknown encoding label {label:?}")))?;
            strict_decode(encoding, bytes)
        }
        None => Err(DomError::EncodingError(
            "input is not valid UTF-8 and declares no usable charset".into(),
        )),
    }
}

fn strict_decode(encoding: &'static Encoding, bytes: &[u8]) -> Result<String, DomError> {
    encoding
        .decode_without_bom_handling_and_without_replacement(bytes)
        .map(|cow| cow.into_owned())
        .ok_or_else(|| DomError::EncodingError(format!("malformed {} input", encoding.name())))
}

/// Parses HTML bytes with browser-grade error recovery into an element tree
/// rooted at the document element.
pub fn parse_document(html: &[u8], options: &ParseOptions) -> Result<ElementTree, DomError> {
    let text = decode_html(html, options)?;
    let document = Html::parse_document(&text);
    let mut builder = TreeBuilder::new();

    let mut excluded_depth = 0usize;
    let mut excluded_root = None;
    let mut raw = String::new();

    for edge in document.tree.root().traverse() {
        match edge {
            Edge::Open(node) => {
                if excluded_depth > 0 {
                    excluded_depth += 1;
                    open_raw(&node, &mut raw);
                    continue;
                }
                match node.value() {
                    Node::Element(el) => {
                        let tag = el.name.local.to_ascii_lowercase();
                        if super::EXCLUDED_TAGS.contains(&&*tag) {
                            excluded_depth = 1;
                            excluded_root = Some(node.id());
                            raw.clear();
                            open_raw(&node, &mut raw);
                            continue;
                        }
                        builder.open_ns(&tag, namespace_of(el.name.ns.as_ref()));
                        for (name, value) in &el.attrs {
                            let qualified = attr_name(name);
                            if qualified != ID_ATTRIBUTE {
                                builder.attr(&qualified, value);
                            }
                        }
                    }
                    Node::Text(t) => builder.text(t),
                    Node::Comment(c) => builder.raw(format!("<!--{}-->", &**c)),
                    Node::Doctype(d) => builder.doctype(Doctype {
                        name: d.name().to_string(),
                        public_id: d.public_id().to_string(),
                        system_id: d.system_id().to_string(),
                    }),
                    Node::Document | Node::Fragment | Node::ProcessingInstruction(_) => {}
                }
            }
            Edge::Close(node) => {
                if excluded_depth > 0 {
                    excluded_depth -= 1;
                    close_raw(&node, &mut raw);
                    if excluded_depth == 0 && excluded_root == Some(node.id()) {
                        builder.raw(std::mem::take(&mut raw));
                    }
                    continue;
                }
                if node.value().is_element() {
                    builder.close();
                }
            }
        }
    }

    let tree = builder.finish()?;
    if is_vacuous(&tree) {
        return Err(DomError::EmptyDocument);
    }
    debug_assert!(tree.check_links().is_ok());
    Ok(tree)
}

fn is_vacuous(tree: &ElementTree) -> bool {
    tree.nodes()
        .iter()
        .all(|n| matches!(n.tag.as_str(), "html" | "head" | "body") && n.text.trim().is_empty())
}

fn namespace_of(ns: &str) -> Namespace {
    match ns {
        HTML_NS => Namespace::Html,
        SVG_NS => Namespace::Svg,
        MATHML_NS => Namespace::MathMl,
        _ => Namespace::Other,
    }
}

fn attr_name(name: &html5ever::QualName) -> String {
    match &name.prefix {
        Some(prefix) => format!("{}:{}", &**prefix, &*name.local),
        None => name.local.to_string(),
    }
}

// Serialization of excluded subtrees straight from the parser's tree.

fn open_raw(node: &ego_tree::NodeRef<'_, Node>, out: &mut String) {
    match node.value() {
        Node::Element(el) => {
            out.push('<');
            out.push_str(&el.name.local.to_ascii_lowercase());
            for (name, value) in &el.attrs {
                out.push(' ');
                out.push_str(&attr_name(name));
                out.push_str("=\"");
                out.push_str(&escape_attr(value));
                out.push('"');
            }
            out.push('>');
        }
        Node::Text(t) => {
            let parent_raw = node.parent().and_then(|p| {
                p.value()
                    .as_element()
                    .map(|e| namespace_of(e.name.ns.as_ref()) == Namespace::Html && raw_text_parent(&e.name.local))
            });
            if parent_raw == Some(true) {
                out.push_str(t);
            } else {
                out.push_str(&escape_text(t));
            }
        }
        Node::Comment(c) => {
            out.push_str("<!--");
            out.push_str(c);
            out.push_str("-->");
        }
        _ => {}
    }
}

fn close_raw(node: &ego_tree::NodeRef<'_, Node>, out: &mut String) {
    if let Node::Element(el) = node.value() {
        let html = namespace_of(el.name.ns.as_ref()) == Namespace::Html;
        if !(html && is_void(&el.name.local)) {
            out.push_str("</");
            out.push_str(&el.name.local.to_ascii_lowercase());
            out.push('>');
        }
    }
}
