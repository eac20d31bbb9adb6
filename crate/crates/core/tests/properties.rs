use proptest::prelude::*;
use proptest::test_runner::Config;

use tm_core::annotate::{Annotation, AnnotationSet};
use tm_core::dom::{parse_document, serialize, ElementTree, NodeId, ParseOptions, TreeBuilder};
use tm_core::rendering::{
    gradient_hue, hidden_roots, propagate_max, render, render_gradient, render_opacity, ColorFill, RenderConfig,
    RenderMode,
};
use tm_core::scoring::{lexical_score, Channel, ScoreMap, TaskBreakdown};

// Tags whose markup never closes or moves anything implicitly, so every
// random shape serializes to markup that parses back to itself.
const BODY_TAGS: &[&str] = &["div", "section", "span", "article", "aside", "nav", "em"];

#[derive(Debug, Clone)]
struct Shape {
    /// parent of body node k+1, as an index into 0..=k
    parents: Vec<usize>,
    tags: Vec<usize>,
    scores: Vec<Option<u8>>,
}

fn shape() -> impl Strategy<Value = Shape> {
    (1usize..60).prop_flat_map(|n| {
        let parents = (0..n).map(|k| 0..=k).collect::<Vec<_>>();
        let tags = proptest::collection::vec(0..BODY_TAGS.len(), n + 1);
        let scores = proptest::collection::vec(proptest::option::weighted(0.8, 0u8..=100), n + 4);
        (parents, tags, scores).prop_map(|(parents, tags, scores)| Shape { parents, tags, scores })
    })
}

/// html > (head > title), body > random subtree; body is node 3.
fn build(shape: &Shape) -> (ElementTree, ScoreMap) {
    let n = shape.parents.len() + 1;
    let mut kids = vec![Vec::new(); n];
    for (k, &p) in shape.parents.iter().enumerate() {
        kids[p].push(k + 1);
    }
    let mut b = TreeBuilder::new();
    b.open("html");
    b.open("head");
    b.open("title");
    b.text("t");
    b.close();
    b.close();
    b.open("body");
    let mut stack = vec![(0usize, 0usize)];
    while let Some((node, next)) = stack.pop() {
        if next < kids[node].len() {
            stack.push((node, next + 1));
            let child = kids[node][next];
            b.open(BODY_TAGS[shape.tags[child]]);
            b.text(&format!("n{child}"));
            stack.push((child, 0));
        } else {
            b.close();
        }
    }
    b.close();
    let tree = b.finish().unwrap();
    let mut scores = ScoreMap::new();
    for id in tree.ids() {
        if let Some(s) = shape.scores[id.index()] {
            scores.insert(id, s, Channel::Text).unwrap();
        }
    }
    (tree, scores)
}

fn subtree_max(tree: &ElementTree, scores: &ScoreMap, id: NodeId) -> u8 {
    let own = scores.get(id).unwrap_or(0);
    tree.node(id).children.iter().map(|c| subtree_max(tree, scores, *c)).fold(own, u8::max)
}

fn style_of(set: &AnnotationSet, id: NodeId) -> Option<&tm_core::annotate::StyleAdditions> {
    match set.get(id) {
        Some(Annotation::Styled(s)) => Some(s),
        _ => None,
    }
}

fn config(mode: RenderMode) -> RenderConfig {
    RenderConfig::with_mode(mode)
}

proptest! {
    #![proptest_config(Config::with_cases(256))]

    #[test]
    fn gradient_depends_only_on_own_score_and_tag(shape in shape(), fill in prop_oneof![Just(ColorFill::Outline), Just(ColorFill::Background)]) {
        let (tree, scores) = build(&shape);
        let cfg = RenderConfig { fill, ..config(RenderMode::Gradient) };
        let set = render_gradient(&tree, &scores, &cfg);
        for node in tree.nodes() {
            let style = style_of(&set, node.id);
            if node.in_head() {
                prop_assert!(set.get(node.id).is_none());
                continue;
            }
            let color = style.and_then(|s| match fill {
                ColorFill::Outline => s.outline,
                ColorFill::Background => s.background,
            });
            match scores.get(node.id) {
                Some(s) => prop_assert_eq!(color.map(|c| c.hue), Some(gradient_hue(s))),
                None => prop_assert!(color.is_none()),
            }
            prop_assert_eq!(style.is_some_and(|s| s.transparent_border), cfg.container_tags.contains(&node.tag));
            prop_assert!(style.is_none_or(|s| s.opacity.is_none()));
        }
    }

    #[test]
    fn gradient_change_is_local(shape in shape(), pick in any::<prop::sample::Index>(), new in 0u8..=100) {
        let (tree, scores) = build(&shape);
        let target = NodeId(pick.index(tree.len()) as u32);
        let mut changed = ScoreMap::new();
        for (id, s) in scores.iter() {
            if id != target {
                changed.insert(id, s.score, s.channel).unwrap();
            }
        }
        changed.insert(target, new, Channel::Text).unwrap();
        let cfg = config(RenderMode::Gradient);
        let before = render_gradient(&tree, &scores, &cfg);
        let after = render_gradient(&tree, &changed, &cfg);
        for id in tree.ids().filter(|id| *id != target) {
            prop_assert_eq!(before.get(id), after.get(id));
        }
    }

    #[test]
    fn gradient_hue_is_linear_and_bounded(score in 0u8..=100) {
        let hue = gradient_hue(score);
        prop_assert!((0.0..=120.0).contains(&hue));
        prop_assert!((hue - (120.0 - 1.2 * f64::from(score))).abs() < 1e-9);
    }

    #[test]
    fn opacity_is_floored_subtree_max(shape in shape(), floor in 0.0f64..0.9) {
        let (tree, scores) = build(&shape);
        let cfg = RenderConfig { opacity_floor: floor, ..config(RenderMode::Opacity) };
        let set = render_opacity(&tree, &scores, &cfg);
        for node in tree.nodes() {
            if node.in_head() {
                prop_assert!(set.get(node.id).is_none());
                continue;
            }
            let opacity = style_of(&set, node.id).and_then(|s| s.opacity).unwrap();
            prop_assert!(opacity >= floor && opacity <= 1.0);
            let want = (f64::from(subtree_max(&tree, &scores, node.id)) / 100.0).max(floor);
            prop_assert!((opacity - want).abs() < 1e-12, "node {}: {opacity} vs {want}", node.id);
            if let Some(p) = node.parent.filter(|p| !tree.node(*p).in_head()) {
                let parent = style_of(&set, p).and_then(|s| s.opacity).unwrap();
                prop_assert!(parent >= opacity);
            }
        }
    }

    #[test]
    fn propagation_dominates_and_is_idempotent(shape in shape()) {
        let (tree, scores) = build(&shape);
        let dense: Vec<u8> = tree.ids().map(|id| scores.get(id).unwrap_or(0)).collect();
        let lifted = propagate_max(&tree, &dense);
        prop_assert!(lifted.iter().zip(&dense).all(|(l, d)| l >= d));
        prop_assert_eq!(propagate_max(&tree, &lifted), lifted);
    }

    #[test]
    fn filter_keeps_an_induced_order_preserving_subgraph(shape in shape(), tau in 0u8..=100) {
        let (tree, scores) = build(&shape);
        let cfg = RenderConfig { threshold: tau, ..config(RenderMode::Filter) };
        let set = render(&tree, &scores, &cfg).unwrap();
        let kept: Vec<NodeId> = tree.ids().filter(|id| !set.is_hidden(*id)).collect();
        for &id in &kept {
            if let Some(p) = tree.node(id).parent {
                prop_assert!(!set.is_hidden(p), "kept {id} under hidden {p}");
            }
        }
        // hidden subtrees hang off kept parents and carry the inert marker once
        let roots = hidden_roots(&tree, &set);
        for id in set.hidden_ids() {
            let top = tree.node(id).parent.is_some_and(|p| !set.is_hidden(p));
            prop_assert_eq!(roots.contains(&id), top);
        }
        let covered: usize = roots.iter().map(|r| tree.subtree(*r).len()).sum();
        prop_assert_eq!(covered, set.hidden_count());

        // reparsing the output keeps every kept node and its kept parent, in order
        let html = serialize(&tree, &set).unwrap();
        let back = parse_document(html.as_bytes(), &ParseOptions::default()).unwrap();
        prop_assert!(tree.same_structure(&back));
        let visible: Vec<(String, Option<NodeId>)> = back
            .nodes()
            .iter()
            .filter(|n| n.attr("aria-hidden").is_none())
            .map(|n| (n.tag.clone(), n.parent))
            .collect();
        let expected: Vec<(String, Option<NodeId>)> =
            kept.iter().map(|id| (tree.node(*id).tag.clone(), tree.node(*id).parent)).collect();
        prop_assert_eq!(visible, expected);
    }

    #[test]
    fn gradient_and_opacity_never_hide(shape in shape()) {
        let (tree, scores) = build(&shape);
        for mode in [RenderMode::Gradient, RenderMode::Opacity] {
            prop_assert_eq!(render(&tree, &scores, &config(mode)).unwrap().hidden_count(), 0);
        }
    }
}

fn words() -> impl Strategy<Value = Vec<String>> {
    let vocab = prop::sample::select(vec![
        "vanilla", "greek", "yogurt", "low", "sugar", "cheapest", "pack", "price", "search", "cart", "tent", "red",
        "buy", "compare", "hours", "store", "the", "a", "Ünïcode", "42",
    ]);
    proptest::collection::vec(vocab.prop_map(String::from), 0..8)
}

fn breakdown() -> impl Strategy<Value = TaskBreakdown> {
    (words(), proptest::collection::vec(words(), 0..3), words(), words(), words()).prop_map(
        |(entity, constraints, actions, defaults, fallbacks)| TaskBreakdown {
            entity: entity.join(" "),
            constraints: constraints.into_iter().map(|c| c.join(" ")).collect(),
            actions,
            defaults,
            fallbacks,
        },
    )
}

proptest! {
    #![proptest_config(Config::with_cases(512))]

    #[test]
    fn lexical_is_deterministic_and_in_range(b in breakdown(), text in words()) {
        let text = text.join(" ");
        let s = lexical_score(&b, &text);
        prop_assert!(s <= 100);
        prop_assert_eq!(s, lexical_score(&b.clone(), &text.clone()));
    }

    #[test]
    fn lexical_ignores_order_case_and_punctuation(b in breakdown(), mut text in words(), seed in any::<u64>()) {
        let s = lexical_score(&b, &text.join(" "));
        let n = text.len().max(1);
        text.rotate_left((seed as usize) % n);
        let shouted = text.iter().map(|w| w.to_uppercase()).collect::<Vec<_>>().join(", ");
        prop_assert_eq!(lexical_score(&b, &shouted), s);
    }

    #[test]
    fn lexical_is_monotone_in_text(b in breakdown(), text in words(), extra in words()) {
        let base = text.join(" ");
        let more = format!("{base} {}", extra.join(" "));
        prop_assert!(lexical_score(&b, &more) >= lexical_score(&b, &base));
    }

    #[test]
    fn lexical_full_coverage_scores_100(b in breakdown()) {
        let all = [b.entity.clone()]
            .into_iter()
            .chain(b.constraints.iter().cloned())
            .chain(b.actions.iter().cloned())
            .chain(b.defaults.iter().cloned())
            .chain(b.fallbacks.iter().cloned())
            .collect::<Vec<_>>()
            .join(" ");
        let expected = if all.split_whitespace().next().is_some() { 100 } else { 0 };
        prop_assert_eq!(lexical_score(&b, &all), expected);
    }
}
