use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use regex::Regex;
use serde_json::Value;
use tm_core::dom::{parse_document, ElementTree, NodeId, ParseOptions};

const TASK: &str = "buy vanilla greek yogurt";

fn tm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tm")).args(args).output().unwrap()
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(p).unwrap()).unwrap()
}

fn process(input: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["process", "--input", s(input), "--task", TASK, "--out", s(out)];
    args.extend(extra);
    tm(&args)
}

#[test]
fn missing_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = process(&dir.path().join("absent.html"), &dir.path().join("o.html"), &["--mode", "gradient"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("absent.html"));
}

#[test]
fn bad_arguments_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let page = fixture("pages/grocery.html");
    let o = dir.path().join("o.html");
    for extra in [
        &["--mode", "blur"][..],
        &["--mode", "filter", "--threshold", "101"],
        &["--mode", "filter", "--scorer", "psychic"],
        &["--mode", "filter", "--scorer", "replay"],
    ] {
        assert_eq!(process(&page, &o, extra).status.code(), Some(2), "{extra:?}");
    }
}

#[test]
fn unwritable_output_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = process(&fixture("pages/grocery.html"), &dir.path().join("no/such/dir.html"), &["--mode", "opacity"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unrecorded_replay_request_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let replay = fixture("replay/grocery.jsonl");
    let out = tm(&[
        "process", "--input", s(&fixture("pages/news.html")), "--task",
        "I want to buy the cheapest 4 pack low sugar vanilla greek yogurt", "--mode", "gradient",
        "--out", s(&dir.path().join("o.html")), "--scorer", "replay", s(&replay),
    ]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn record_then_replay_matches_and_bad_reply_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let page = dir.path().join("p.html");
    std::fs::write(&page, "<body><p>Vanilla greek yogurt</p><p>Store hours</p></body>").unwrap();
    let rec = dir.path().join("rec.jsonl");
    let (a, b) = (dir.path().join("a.html"), dir.path().join("b.html"));
    assert!(process(&page, &a, &["--mode", "gradient", "--record", s(&rec)]).status.success());
    let replayed = process(&page, &b, &["--mode", "gradient", "--scorer", "replay", s(&rec)]);
    assert!(replayed.status.success(), "{}", String::from_utf8_lossy(&replayed.stderr));
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    // same recording with the text scores pushed out of range
    let tampered: String = std::fs::read_to_string(&rec)
        .unwrap()
        .lines()
        .map(|line| {
            let mut v: Value = serde_json::from_str(line).unwrap();
            if v["kind"] == "text_batch" {
                v["reply"] = Value::String("[150, 0]".into());
            }
            v.to_string() + "\n"
        })
        .collect();
    std::fs::write(&rec, tampered).unwrap();
    let bad = process(&page, &b, &["--mode", "gradient", "--scorer", "replay", s(&rec)]);
    assert_eq!(bad.status.code(), Some(4), "{}", String::from_utf8_lossy(&bad.stderr));
}

#[test]
fn threshold_defaults_to_70() {
    let dir = tempfile::tempdir().unwrap();
    let page = fixture("pages/news.html");
    let (a, b) = (dir.path().join("a.html"), dir.path().join("b.html"));
    assert!(process(&page, &a, &["--mode", "filter"]).status.success());
    assert!(process(&page, &b, &["--mode", "filter", "--threshold", "70"]).status.success());
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

/// Ids kept at `tau`: the node or something below it scores at least `tau`,
/// plus the root and body.
fn expected_hidden(tree: &ElementTree, scores: &BTreeMap<u32, u8>, tau: u8) -> BTreeSet<u32> {
    fn best(tree: &ElementTree, scores: &BTreeMap<u32, u8>, id: NodeId) -> u8 {
        let own = scores.get(&id.0).copied().unwrap_or(0);
        tree.node(id).children.iter().map(|c| best(tree, scores, *c)).fold(own, u8::max)
    }
    tree.nodes()
        .iter()
        .filter(|n| n.parent.is_some() && n.tag != "body" && best(tree, scores, n.id) < tau)
        .map(|n| n.id.0)
        .collect()
}

#[test]
fn filter_output_hides_exactly_the_unretained_nodes() {
    let dir = tempfile::tempdir().unwrap();
    let tag = Regex::new(r"<[a-z][^>]*>").unwrap();
    let id_attr = Regex::new(r#"data-tm-id="(\d+)""#).unwrap();
    for (name, tau) in [("news.html", 40u8), ("grocery.html", 60), ("docs.html", 20)] {
        let page = fixture(&format!("pages/{name}"));
        let (out, dump) = (dir.path().join("o.html"), dir.path().join("scores.json"));
        let tau_arg = tau.to_string();
        let run = process(&page, &out, &["--mode", "filter", "--threshold", &tau_arg, "--score-dump", s(&dump)]);
        assert!(run.status.success());

        let scores: BTreeMap<u32, u8> = read_json(&dump)
            .as_object()
            .unwrap()
            .iter()
            .map(|(k, v)| (k.parse().unwrap(), v["score"].as_u64().unwrap() as u8))
            .collect();
        let tree = parse_document(&std::fs::read(&page).unwrap(), &ParseOptions::default()).unwrap();
        let html = std::fs::read_to_string(&out).unwrap();
        let hidden: BTreeSet<u32> = tag
            .find_iter(&html)
            .filter(|m| m.as_str().contains("aria-hidden=\"true\""))
            .filter_map(|m| id_attr.captures(m.as_str()).map(|c| c[1].parse().unwrap()))
            .collect();
        assert_eq!(hidden, expected_hidden(&tree, &scores, tau), "{name} at {tau}");
        assert!(!hidden.is_empty(), "{name}: threshold too low to test anything");
    }
}

fn write_corpus(dir: &Path) -> PathBuf {
    let pages = dir.join("pages");
    std::fs::create_dir(&pages).unwrap();
    // html head title body p p img: 3 text nodes, "ok" pruned
    std::fs::write(
        pages.join("a.html"),
        "<html><head><title>Shop</title></head><body><p>Vanilla yogurt</p><p>ok</p><img src=\"y.png\" alt=\"yogurt\"></body></html>",
    )
    .unwrap();
    // 2 text nodes, none pruned, one svg, a canvas
    std::fs::write(
        pages.join("b.html"),
        "<body><p>Greek yogurt cup</p><p>Contact</p><svg><path d=\"M0 0L4 4\"/></svg><canvas></canvas></body>",
    )
    .unwrap();
    // 4 text nodes, 3 pruned
    std::fs::write(pages.join("c.html"), "<body><p>a</p><p>b</p><p>cd</p><p>yogurt</p></body>").unwrap();
    let list = dir.join("sites.txt");
    std::fs::write(&list, "# corpus\npages/a.html\npages/b.html\n\npages/c.html\npages/missing.html\n").unwrap();
    list
}

fn close(a: &Value, b: f64) {
    let a = a.as_f64().unwrap();
    assert!((a - b).abs() < 1e-9, "{a} vs {b}");
}

#[test]
fn audit_aggregates_match_hand_values() {
    let dir = tempfile::tempdir().unwrap();
    let list = write_corpus(dir.path());
    let report = dir.path().join("report.json");
    let out = tm(&["audit", "--sites", s(&list), "--task", TASK, "--report", s(&report), "--jobs", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = read_json(&report);
    assert_eq!(r["schema"], "tm-report/1");

    let rows = r["rows"].as_array().unwrap();
    let urls: Vec<&str> = rows.iter().map(|row| row["url"].as_str().unwrap()).collect();
    assert!(urls[0].ends_with("a.html") && urls[3].ends_with("missing.html"), "{urls:?}");
    let counts: Vec<(u64, u64, u64, u64)> = rows
        .iter()
        .map(|row| {
            let n = |k: &str| row[k].as_u64().unwrap();
            (n("node_count"), n("text_count"), n("image_count"), n("svg_count"))
        })
        .collect();
    assert_eq!(counts, [(7, 3, 1, 0), (8, 2, 0, 1), (7, 4, 0, 0), (0, 0, 0, 0)]);
    assert_eq!(rows[3]["status"], "error");
    assert_eq!(rows[1]["unsupported"]["canvas"], true);
    assert_eq!(rows[0]["unsupported_content"], false);

    let agg = &r["aggregate"];
    assert_eq!((agg["sites"].as_u64(), agg["ok"].as_u64(), agg["failed"].as_u64()), (Some(4), Some(3), Some(1)));
    assert_eq!(agg["unsupported_content"], 1);
    // text counts 3, 2, 4; pruned fractions 1/3, 0, 3/4
    close(&agg["mean"]["text_count"], 3.0);
    close(&agg["stddev"]["text_count"], (2.0f64 / 3.0).sqrt());
    close(&agg["mean"]["pruned_fraction"], 13.0 / 36.0);
    close(&agg["stddev"]["pruned_fraction"], (366.0f64 / 3888.0).sqrt());
    close(&agg["mean"]["image_count"], 1.0 / 3.0);
    close(&agg["stddev"]["svg_count"], (2.0f64 / 9.0).sqrt());
}

#[test]
fn audit_with_nothing_processable_exits_5() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let empty = dir.path().join("empty.txt");
    std::fs::write(&empty, "# nothing\n").unwrap();
    let missing = dir.path().join("missing.txt");
    std::fs::write(&missing, "nope.html\nalso-nope.html\n").unwrap();
    for list in [&empty, &missing] {
        let out = tm(&["audit", "--sites", s(list), "--task", TASK, "--report", s(&report)]);
        assert_eq!(out.status.code(), Some(5));
        let r = read_json(&report);
        assert_eq!(r["aggregate"]["ok"], 0);
    }
}
