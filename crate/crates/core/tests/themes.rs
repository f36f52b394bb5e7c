mod common;

use affordnet::engine::{AffordanceEngine, QueryOutcome};
use affordnet::eval::{evaluate_situation, load_responses, Mode};
use affordnet::{NodeRef, Observation, QueryConfig};
use common::{fixture, themes_graph};

fn run(factors: &[NodeRef]) -> QueryOutcome {
    let g = themes_graph();
    let engine = AffordanceEngine::new(&g, QueryConfig::default()).unwrap();
    engine
        .query(&Observation::new(factors.iter().cloned()).unwrap())
        .unwrap()
}

fn labels(out: &QueryOutcome, n: usize) -> Vec<String> {
    out.results
        .iter()
        .take(n)
        .map(|r| r.action.label.clone())
        .collect()
}

#[test]
fn store_context_prefers_buying() {
    let out = run(&[NodeRef::object("apple"), NodeRef::attribute("at store")]);
    assert_eq!(labels(&out, 3), ["buy apple", "find apple", "see apple"]);
    let buy = &out.results[0];
    let want = 0.99f64.powi(8) + 0.99f64.powi(9) + 0.99f64.powi(8);
    assert!((buy.value - want).abs() < 1e-12, "{}", buy.value);
}

#[test]
fn tree_context_prefers_picking() {
    let out = run(&[NodeRef::object("apple"), NodeRef::attribute("from tree")]);
    assert_eq!(out.results[0].action.label, "pick apple");
}

#[test]
fn knife_prefers_slicing_then_cutting() {
    let out = run(&[NodeRef::object("apple"), NodeRef::object("knife")]);
    assert_eq!(labels(&out, 3), ["slice apple", "cut apple", "peel apple"]);
}

#[test]
fn friend_prefers_sharing() {
    let out = run(&[NodeRef::object("apple"), NodeRef::attribute("with friend")]);
    assert_eq!(labels(&out, 2), ["share apple", "trade apple"]);
}

#[test]
fn pencil_reaches_sketching_through_its_attribute() {
    let g = themes_graph();
    let engine = AffordanceEngine::new(&g, QueryConfig::default()).unwrap();
    let w = engine
        .shortest_path(&NodeRef::object("pencil"), &NodeRef::action("sketch apple"))
        .unwrap();
    assert!(w.traverses(&NodeRef::attribute("with pencil")));
    assert!(w.traverses(&NodeRef::action("sketch")));
    let out = run(&[NodeRef::object("pencil")]);
    assert_eq!(labels(&out, 3), ["sketch", "draw", "sketch apple"]);
}

#[test]
fn top_k_truncates_after_sorting() {
    let out = run(&[NodeRef::object("apple")]);
    assert_eq!(out.results.len(), 10);
    // share and slice tie; labels decide.
    assert_eq!(
        labels(&out, 5),
        [
            "buy apple",
            "eat apple",
            "share apple",
            "slice apple",
            "pick apple"
        ]
    );
}

#[test]
fn missing_factor_is_reported_not_fatal() {
    let out = run(&[NodeRef::object("apple"), NodeRef::object("spaceship")]);
    assert_eq!(out.missing, [NodeRef::object("spaceship")]);
    assert_eq!(
        out.results[0].per_factor[&NodeRef::object("spaceship")],
        5.0
    );
}

fn eval(file: &str, mode: Mode) -> Vec<(String, f64)> {
    let g = themes_graph();
    let cfg = QueryConfig {
        top_k: usize::MAX,
        ..QueryConfig::default()
    };
    let engine = AffordanceEngine::new(&g, cfg).unwrap();
    let rs = load_responses(fixture(&format!("eval/{file}"))).unwrap();
    let (records, excluded) =
        evaluate_situation(&engine, &[NodeRef::object("apple")], &rs, mode).unwrap();
    assert!(excluded.is_empty(), "{excluded:?}");
    records.into_iter().map(|r| (r.metric, r.value)).collect()
}

fn close(got: f64, want: f64) {
    assert!((got - want).abs() < 1e-9, "{got} vs {want}");
}

#[test]
fn coverage_three_of_four() {
    let m = eval("coverage75.jsonl", Mode::Coverage);
    assert_eq!(m[0], ("coverage".to_string(), 75.0));
    assert_eq!(m[1], ("weighted_coverage".to_string(), 75.0));
}

#[test]
fn weighting_can_lower_coverage() {
    let m = eval("three.jsonl", Mode::Coverage);
    close(m[0].1, 80.0);
    close(m[1].1, 75.0);
}

#[test]
fn weighting_can_raise_misses() {
    let m = eval("rare.jsonl", Mode::Coverage);
    close(m[0].1, 100.0 / 3.0);
    close(m[1].1, 20.0);
}

#[test]
fn rank_distance_averages_respondents() {
    let m = eval("rankings.jsonl", Mode::Rank);
    // identity 0, reversal 12, one adjacent swap 2
    close(m[0].1, 14.0 / 3.0);
}
