use crate::annotate::{Annotation, AnnotationSet};

use super::{Content, DomError, ElementNode, ElementTree, Namespace, NodeId, ID_ATTRIBUTE};

const VOID_ELEMENTS: [&str; 16] = [
    "area", "base", "basefont", "bgsound", "br", "col", "embed", "frame", "hr", "img", "input", "keygen",
    "link", "meta", "source", "track",
];

pub(crate) fn is_void(tag: &str) -> bool {
    VOID_ELEMENTS.contains(&tag) || tag == "wbr" || tag == "param"
}

/// Elements whose text children are written without escaping.
pub(crate) fn raw_text_parent(tag: &str) -> bool {
    matches!(
        tag,
        "style" | "script" | "xmp" | "iframe" | "noembed" | "noframes" | "plaintext" | "noscript"
    )
}

pub(crate) fn escape_text(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for ch in text.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '\u{a0}' => out.push_str("&nbsp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            c => out.push(c),
        }
    }
    out
}

pub(crate) fn escape_attr(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for ch in text.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '\u{a0}' => out.push_str("&nbsp;"),
            '"' => out.push_str("&quot;"),
            c => out.push(c),
        }
    }
    out
}

/// Writes the tree back out as HTML with every element carrying its engine
/// id, plus the given annotations. Hidden nodes stay in place.
pub fn serialize(tree: &ElementTree, annotations: &AnnotationSet) -> Result<String, DomError> {
    if let Some((id, _)) = annotations.iter().find(|(id, _)| !tree.contains(*id)) {
        return Err(DomError::DanglingAnnotation(id));
    }

    let mut out = String::new();
    if let Some(doctype) = &tree.doctype {
        out.push_str("<!DOCTYPE ");
        out.push_str(&doctype.name);
        if !doctype.public_id.is_empty() {
            out.push_str(&format!(" PUBLIC \"{}\"", doctype.public_id));
            if !doctype.system_id.is_empty() {
                out.push_str(&format!(" \"{}\"", doctype.system_id));
            }
        } else if !doctype.system_id.is_empty() {
            out.push_str(&format!(" SYSTEM \"{}\"", doctype.system_id));
        }
        out.push('>');
    }
    for raw in &tree.prologue {
        out.push_str(raw);
    }

    // (node, next content index)
    let mut stack: Vec<(NodeId, usize)> = Vec::new();
    write_start_tag(&mut out, tree.root(), annotations.get(tree.root_id()));
    if !is_void_node(tree.root()) {
        stack.push((tree.root_id(), 0));
    }

    while let Some((id, index)) = stack.pop() {
        let node = tree.node(id);
        let Some(item) = node.content.get(index) else {
            out.push_str("</");
            out.push_str(&node.tag);
            out.push('>');
            continue;
        };
        stack.push((id, index + 1));
        match item {
            Content::Text(text) => {
                let leading_newline_dropped = node.namespace == Namespace::Html
                    && matches!(node.tag.as_str(), "pre" | "textarea" | "listing");
                if index == 0 && leading_newline_dropped && text.starts_with('\n') {
                    out.push('\n');
                }
                if node.namespace == Namespace::Html && raw_text_parent(&node.tag) {
                    out.push_str(text);
                } else {
                    out.push_str(&escape_text(text));
                }
            }
            Content::Raw(raw) => out.push_str(raw),
            Content::Child(child) => {
                let child_node = tree.node(*child);
                write_start_tag(&mut out, child_node, annotations.get(*child));
                if !is_void_node(child_node) {
                    stack.push((*child, 0));
                }
            }
        }
    }

    for raw in &tree.epilogue {
        out.push_str(raw);
    }
    Ok(out)
}

fn is_void_node(node: &ElementNode) -> bool {
    node.namespace == Namespace::Html && is_void(&node.tag)
}

fn write_start_tag(out: &mut String, node: &ElementNode, annotation: Option<&Annotation>) {
    let mut attrs: Vec<(String, String)> = node.attrs.clone();

    let mut set = |name: &str, value: String| match attrs.iter_mut().find(|(k, _)| k == name) {
        Some(slot) => slot.1 = value,
        None => attrs.push((name.to_string(), value)),
    };

    let extra_style = match annotation {
        Some(Annotation::Styled(style)) if !style.is_empty() => Some(style.css()),
        Some(Annotation::Hidden(marker)) => {
            set("aria-hidden", "true".into());
            set("tabindex", "-1".into());
            if marker.inert {
                set("inert", String::new());
            }
            Some("display: none !important;".to_string())
        }
        _ => None,
    };
    if let Some(extra) = extra_style {
        let merged = match node.attr("style").map(str::trim) {
            Some(existing) if !existing.is_empty() => {
                let sep = if existing.ends_with(';') { " " } else { "; " };
                format!("{existing}{sep}{extra}")
            }
            _ => extra,
        };
        set("style", merged);
    }
    set(ID_ATTRIBUTE, node.id.to_string());

    out.push('<');
    out.push_str(&node.tag);
    for (name, value) in &attrs {
        out.push(' ');
        out.push_str(name);
        out.push_str("=\"");
        out.push_str(&escape_attr(value));
        out.push('"');
    }
    out.push('>');
}
