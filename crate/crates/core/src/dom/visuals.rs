use serde::{Deserialize, Serialize};

use super::{ElementTree, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VisualKind {
    Image,
    SvgIcon,
    Iframe,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VisualElement {
    pub element_id: NodeId,
    pub kind: VisualKind,
    pub source: Option<String>,
    /// `alt` for images, `title` for iframes.
    pub alt_text: Option<String>,
    /// `d` of the first `path` inside an SVG.
    pub path_data: Option<String>,
}

/// Collects images, iframes and SVG icons in document order.
///
/// An `svg` without any `path d` cannot be labelled and is left out; it is
/// then unscored like any other node.
pub fn extract_visuals(tree: &ElementTree) -> Vec<VisualElement> {
    let mut out = Vec::new();
    for node in tree.nodes() {
        let owned = |name: &str| node.attr(name).map(str::to_string);
        match node.tag.as_str() {
            "img" => out.push(VisualElement {
                element_id: node.id,
                kind: VisualKind::Image,
                source: owned("src"),
                alt_text: owned("alt"),
                path_data: None,
            }),
            "iframe" => out.push(VisualElement {
                element_id: node.id,
                kind: VisualKind::Iframe,
                source: owned("src"),
                alt_text: owned("title"),
                path_data: None,
            }),
            "svg" => {
                let path_data = tree
                    .subtree(node.id)
                    .skip(1)
                    .map(|i| tree.node(NodeId(i)))
                    .filter(|n| n.tag == "path")
                    .find_map(|n| n.attr("d"))
                    .map(str::to_string);
                if path_data.is_some() {
                    out.push(VisualElement {
                        element_id: node.id,
                        kind: VisualKind::SvgIcon,
                        source: None,
                        alt_text: None,
                        path_data,
                    });
                }
            }
            _ => {}
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dom::{parse_document, ParseOptions};

    fn visuals(html: &str) -> Vec<VisualElement> {
        extract_visuals(&parse_document(html.as_bytes(), &ParseOptions::default()).unwrap())
    }

    #[test]
    fn image_attributes_are_copied() {
        let v = visuals(r#"<body><img src="a.png" alt="red tent"></body>"#);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, VisualKind::Image);
        assert_eq!(v[0].source.as_deref(), Some("a.png"));
        assert_eq!(v[0].alt_text.as_deref(), Some("red tent"));
        assert_eq!(v[0].path_data, None);
    }

    #[test]
    fn svg_path_data() {
        let v = visuals(r#"<body><svg><g><path d="M0 0L4 4"/></g><path d="M9 9"/></svg></body>"#);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, VisualKind::SvgIcon);
        assert_eq!(v[0].path_data.as_deref(), Some("M0 0L4 4"));
    }

    #[test]
    fn missing_alt_stays_absent() {
        let v = visuals(r#"<body><img src="b.png"></body>"#);
        assert_eq!(v[0].alt_text, None);
    }

    #[test]
    fn iframe_title_and_pathless_svg() {
        let v = visuals(r#"<body><iframe src="ad.html" title="Sponsored ad"></iframe><svg><circle r=1 /></svg><iframe></iframe></body>"#);
        assert_eq!(v.len(), 2);
        assert_eq!(v[0].kind, VisualKind::Iframe);
        assert_eq!(v[0].alt_text.as_deref(), Some("Sponsored ad"));
        assert_eq!(v[1].alt_text, None);
        assert_eq!(v[1].source, None);
    }
}
