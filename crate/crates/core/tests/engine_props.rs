mod common;

use std::collections::BTreeSet;

use affordnet::engine::{affordance, edge_weight, query, AffordanceEngine};
use affordnet::{KnowledgeGraph, NodeKind, NodeRef, Observation, QueryConfig};
use common::random::{brute_force, graph};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn cfg(decay: f64) -> QueryConfig {
    QueryConfig {
        decay,
        top_k: usize::MAX,
        ..QueryConfig::default()
    }
}

fn nodes(g: &KnowledgeGraph) -> Vec<NodeRef> {
    g.nodes().map(|(n, _)| n.clone()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn distances_match_exhaustive_search(seed in any::<u64>(), n in 1usize..9, decay in 0.5f64..0.999) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = graph(&mut rng, n, 0.35);
        let engine = AffordanceEngine::new(&g, cfg(decay)).unwrap();
        for x in nodes(&g) {
            for a in nodes(&g) {
                let want = brute_force(&g, &x, &a, decay);
                let got = engine.distance(&x, &a);
                match (want, got) {
                    (Some(w), Some(d)) => prop_assert!((w - d).abs() <= 1e-12, "{x} -> {a}: {w} vs {d}"),
                    (None, None) => {}
                    other => prop_assert!(false, "{x} -> {a}: {other:?}"),
                }
                let capped = want.map_or(5.0, |w| w.min(5.0));
                prop_assert!((affordance(&g, &x, &a, &cfg(decay)) - capped).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn more_evidence_never_weakens_an_affordance(seed in any::<u64>(), n in 2usize..9, extra in 1u64..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = graph(&mut rng, n, 0.35);
        let Some((s, d, _)) = g.edges().next().map(|(s, d, c)| (s.clone(), d.clone(), c)) else {
            return Ok(());
        };
        let mut more = g.clone();
        more.add_edge(&s, &d, extra).unwrap();
        let c = cfg(0.99);
        for x in nodes(&g) {
            for a in nodes(&g) {
                prop_assert!(affordance(&more, &x, &a, &c) <= affordance(&g, &x, &a, &c) + 1e-15);
            }
        }
    }

    #[test]
    fn disconnected_nodes_change_nothing(seed in any::<u64>(), n in 2usize..9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = graph(&mut rng, n, 0.35);
        let mut bigger = g.clone();
        bigger.insert_node(NodeRef::action("island"), BTreeSet::new()).unwrap();
        bigger.insert_node(NodeRef::object("rock"), BTreeSet::new()).unwrap();
        let factors: Vec<NodeRef> = nodes(&g).into_iter().filter(|n| n.kind != NodeKind::Action).collect();
        if factors.is_empty() {
            return Ok(());
        }
        let obs = Observation::new(factors).unwrap();
        let c = cfg(0.99);
        prop_assert_eq!(query(&g, &obs, &c).unwrap().results, query(&bigger, &obs, &c).unwrap().results);
    }

    #[test]
    fn query_values_are_capped_sums(seed in any::<u64>(), n in 2usize..10, penalty in 0.5f64..6.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = graph(&mut rng, n, 0.3);
        let factors: Vec<NodeRef> = nodes(&g).into_iter().filter(|n| n.kind != NodeKind::Action).collect();
        if factors.is_empty() {
            return Ok(());
        }
        let c = QueryConfig { penalty, ..cfg(0.95) };
        let obs = Observation::new(factors.clone()).unwrap();
        let out = query(&g, &obs, &c).unwrap();
        for pair in out.results.windows(2) {
            prop_assert!((pair[0].value, &pair[0].action.label) <= (pair[1].value, &pair[1].action.label));
        }
        for r in &out.results {
            prop_assert_eq!(r.action.kind, NodeKind::Action);
            prop_assert_eq!(r.per_factor.len(), factors.len());
            let sum: f64 = r.per_factor.values().sum();
            prop_assert!((sum - r.value).abs() <= 1e-12);
            prop_assert!(r.per_factor.values().all(|v| *v <= penalty));
            for f in &factors {
                let want = brute_force(&g, f, &r.action, 0.95).map_or(penalty, |d| d.min(penalty));
                prop_assert!((r.per_factor[f] - want).abs() <= 1e-12);
            }
        }
        // Every reachable action appears.
        let reachable: BTreeSet<NodeRef> = nodes(&g)
            .into_iter()
            .filter(|a| a.kind == NodeKind::Action)
            .filter(|a| factors.iter().any(|f| brute_force(&g, f, a, 0.95).is_some()))
            .collect();
        let listed: BTreeSet<NodeRef> = out.results.iter().map(|r| r.action.clone()).collect();
        prop_assert_eq!(reachable, listed);
    }

    #[test]
    fn weights_decrease_with_count(decay in 0.5f64..0.999, n in 1u64..1_000) {
        let w = edge_weight(n, decay).unwrap();
        prop_assert!(w > 0.0 && w < 1.0);
        prop_assert!(edge_weight(n + 1, decay).unwrap() < w);
    }
}
