//! Affordance values and ranked multi-factor queries.
//!
//! An edge composed `n` times has length `decay^n`, so frequently composed
//! edges are short. The affordance of action `a` for an observed factor `x`
//! is the shortest directed path length from `x` to `a`, capped at
//! `penalty`, and exactly `penalty` when `a` is unreachable. A query over
//! several factors sums the per-factor values; smaller sums mean stronger
//! recall.

mod index;

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use index::{ShortestPaths, WeightedIndex};

use crate::graph::{KnowledgeGraph, NodeKind, NodeRef};

pub const DEFAULT_DECAY: f64 = 0.99;
pub const DEFAULT_PENALTY: f64 = 5.0;
pub const DEFAULT_THRESHOLD: f64 = 2.0;
pub const DEFAULT_TOP_K: usize = 10;

#[derive(Debug, Error, PartialEq)]
pub enum EngineError {
    #[error("count must be at least 1")]
    ZeroCount,
    #[error("decay must lie strictly between 0 and 1, got {0}")]
    Decay(f64),
    #[error("penalty must be positive, got {0}")]
    Penalty(f64),
    #[error("threshold must be positive, got {0}")]
    Threshold(f64),
    #[error("top_k must be at least 1")]
    TopK,
    #[error("an observation needs at least one factor")]
    EmptyObservation,
    #[error("factor {0} is listed twice")]
    DuplicateFactor(NodeRef),
    #[error("factor {0} must be an object or attribute node")]
    FactorKind(NodeRef),
    #[error("{0} must be an action node")]
    NotAnAction(NodeRef),
    #[error("{0} is not in the graph")]
    UnknownNode(NodeRef),
    #[error("none of the observed factors are in the graph: {}", join(.0))]
    AllFactorsMissing(Vec<NodeRef>),
}

fn join(nodes: &[NodeRef]) -> String {
    nodes
        .iter()
        .map(NodeRef::to_string)
        .collect::<Vec<_>>()
        .join(", ")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QueryConfig {
    pub decay: f64,
    pub penalty: f64,
    pub threshold: f64,
    pub top_k: usize,
}

impl Default for QueryConfig {
    fn default() -> Self {
        QueryConfig {
            decay: DEFAULT_DECAY,
            penalty: DEFAULT_PENALTY,
            threshold: DEFAULT_THRESHOLD,
            top_k: DEFAULT_TOP_K,
        }
    }
}

impl QueryConfig {
    pub fn validate(&self) -> Result<(), EngineError> {
        check_decay(self.decay)?;
        if !(self.penalty > 0.0 && self.penalty.is_finite()) {
            return Err(EngineError::Penalty(self.penalty));
        }
        if self.threshold.is_nan() || self.threshold <= 0.0 {
            return Err(EngineError::Threshold(self.threshold));
        }
        if self.top_k == 0 {
            return Err(EngineError::TopK);
        }
        Ok(())
    }
}

fn check_decay(decay: f64) -> Result<(), EngineError> {
    if decay > 0.0 && decay < 1.0 {
        Ok(())
    } else {
        Err(EngineError::Decay(decay))
    }
}

/// Length of an edge composed `count` times: `decay^count`.
pub fn edge_weight(count: u64, decay: f64) -> Result<f64, EngineError> {
    if count == 0 {
        return Err(EngineError::ZeroCount);
    }
    check_decay(decay)?;
    Ok(edge_weight_unchecked(count, decay))
}

#[inline]
pub(crate) fn edge_weight_unchecked(count: u64, decay: f64) -> f64 {
    // libm pow is accurate to within an ulp; repeated squaring via powi is not.
    decay.powf(count as f64)
}

/// The observed factors of a situation: object and attribute nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Observation {
    factors: Vec<NodeRef>,
}

impl Observation {
    pub fn new(factors: impl IntoIterator<Item = NodeRef>) -> Result<Self, EngineError> {
        let factors: Vec<NodeRef> = factors.into_iter().collect();
        if factors.is_empty() {
            return Err(EngineError::EmptyObservation);
        }
        let mut seen = BTreeSet::new();
        for f in &factors {
            if f.kind == NodeKind::Action {
                return Err(EngineError::FactorKind(f.clone()));
            }
            if !seen.insert(f) {
                return Err(EngineError::DuplicateFactor(f.clone()));
            }
        }
        Ok(Observation { factors })
    }

    pub fn factors(&self) -> &[NodeRef] {
        &self.factors
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffordanceResult {
    pub action: NodeRef,
    /// Sum of `per_factor`; lower is stronger.
    pub value: f64,
    /// Distance (or penalty) from each factor to the action.
    pub per_factor: BTreeMap<NodeRef, f64>,
}

/// A query's ranked results plus the factors that were not in the graph.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryOutcome {
    pub results: Vec<AffordanceResult>,
    pub missing: Vec<NodeRef>,
}

/// A shortest path and its length.
#[derive(Debug, Clone, PartialEq)]
pub struct PathWitness {
    pub nodes: Vec<NodeRef>,
    pub distance: f64,
}

impl PathWitness {
    pub fn traverses(&self, node: &NodeRef) -> bool {
        self.nodes.iter().any(|n| n == node)
    }
}

/// Query engine over one graph and one decay constant. Build it once and
/// reuse it for many queries; it is `Sync`, so queries may run
/// concurrently.
#[derive(Debug)]
pub struct AffordanceEngine<'g> {
    index: WeightedIndex<'g>,
    cfg: QueryConfig,
}

impl<'g> AffordanceEngine<'g> {
    pub fn new(g: &'g KnowledgeGraph, cfg: QueryConfig) -> Result<Self, EngineError> {
        cfg.validate()?;
        Ok(AffordanceEngine {
            index: WeightedIndex::new(g, cfg.decay),
            cfg,
        })
    }

    pub fn config(&self) -> &QueryConfig {
        &self.cfg
    }

    /// Uncapped shortest distance, `None` when unreachable or unknown.
    pub fn distance(&self, x: &NodeRef, a: &NodeRef) -> Option<f64> {
        let (xi, ai) = (self.index.id(x)?, self.index.id(a)?);
        let d = self.index.shortest_paths(xi).dist[ai];
        d.is_finite().then_some(d)
    }

    pub fn affordance(&self, x: &NodeRef, a: &NodeRef) -> f64 {
        self.distance(x, a)
            .map_or(self.cfg.penalty, |d| d.min(self.cfg.penalty))
    }

    pub fn shortest_path(&self, x: &NodeRef, a: &NodeRef) -> Option<PathWitness> {
        let (xi, ai) = (self.index.id(x)?, self.index.id(a)?);
        let sp = self.index.shortest_paths(xi);
        let path = sp.path_to(ai)?;
        Some(PathWitness {
            nodes: path
                .into_iter()
                .map(|i| self.index.node(i).clone())
                .collect(),
            distance: sp.dist[ai],
        })
    }

    /// Ranks every action reachable from at least one factor.
    ///
    /// Unreachable factors contribute `penalty`. Results are sorted by
    /// value, ties by action label, and truncated to `top_k`.
    pub fn query(&self, obs: &Observation) -> Result<QueryOutcome, EngineError> {
        let (present, missing): (Vec<&NodeRef>, Vec<&NodeRef>) = obs
            .factors()
            .iter()
            .partition(|f| self.index.id(f).is_some());
        if present.is_empty() {
            return Err(EngineError::AllFactorsMissing(
                missing.into_iter().cloned().collect(),
            ));
        }
        let searches: Vec<ShortestPaths> = present
            .par_iter()
            .map(|f| {
                self.index
                    .shortest_paths(self.index.id(f).expect("present factor"))
            })
            .collect();

        let penalty = self.cfg.penalty;
        let mut results = Vec::new();
        for id in 0..self.index.len() {
            let action = self.index.node(id);
            if action.kind != NodeKind::Action {
                continue;
            }
            if !searches.iter().any(|sp| sp.dist[id].is_finite()) {
                continue;
            }
            let mut per_factor = BTreeMap::new();
            for (f, sp) in present.iter().zip(&searches) {
                per_factor.insert((*f).clone(), sp.dist[id].min(penalty));
            }
            for f in &missing {
                per_factor.insert((*f).clone(), penalty);
            }
            let value = per_factor.values().sum();
            results.push(AffordanceResult {
                action: action.clone(),
                value,
                per_factor,
            });
        }
        results.sort_by(|a, b| {
            a.value
                .total_cmp(&b.value)
                .then_with(|| a.action.label.cmp(&b.action.label))
        });
        results.truncate(self.cfg.top_k);
        Ok(QueryOutcome {
            results,
            missing: missing.into_iter().cloned().collect(),
        })
    }
}

/// Affordance of action `a` for factor `x`: the shortest path length from
/// `x` to `a` capped at `cfg.penalty`, or `cfg.penalty` when either node
/// is absent or `a` is unreachable.
pub fn affordance(g: &KnowledgeGraph, x: &NodeRef, a: &NodeRef, cfg: &QueryConfig) -> f64 {
    let index = WeightedIndex::new(g, cfg.decay);
    let (Some(xi), Some(ai)) = (index.id(x), index.id(a)) else {
        return cfg.penalty;
    };
    let d = index.shortest_paths(xi).dist[ai];
    if d.is_finite() {
        d.min(cfg.penalty)
    } else {
        cfg.penalty
    }
}

/// Like [`affordance`], but unknown nodes and non-action targets are errors.
pub fn affordance_strict(
    g: &KnowledgeGraph,
    x: &NodeRef,
    a: &NodeRef,
    cfg: &QueryConfig,
) -> Result<f64, EngineError> {
    cfg.validate()?;
    for n in [x, a] {
        if !g.contains(n) {
            return Err(EngineError::UnknownNode(n.clone()));
        }
    }
    if a.kind != NodeKind::Action {
        return Err(EngineError::NotAnAction(a.clone()));
    }
    Ok(affordance(g, x, a, cfg))
}

pub fn shortest_path(
    g: &KnowledgeGraph,
    x: &NodeRef,
    a: &NodeRef,
    cfg: &QueryConfig,
) -> Option<PathWitness> {
    let index = WeightedIndex::new(g, cfg.decay);
    let sp = index.shortest_paths(index.id(x)?);
    let ai = index.id(a)?;
    let path = sp.path_to(ai)?;
    Some(PathWitness {
        nodes: path.into_iter().map(|i| index.node(i).clone()).collect(),
        distance: sp.dist[ai],
    })
}

pub fn query(
    g: &KnowledgeGraph,
    obs: &Observation,
    cfg: &QueryConfig,
) -> Result<QueryOutcome, EngineError> {
    AffordanceEngine::new(g, *cfg)?.query(obs)
}

/// Reads line-delimited JSON results, as written by `query --format
/// records`. Blank lines are skipped; errors carry the 1-based line.
pub fn read_result_records<R: std::io::BufRead>(
    reader: R,
) -> Result<Vec<AffordanceResult>, (usize, String)> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| (i + 1, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| (i + 1, e.to_string()))?);
    }
    Ok(out)
}

/// Keeps results whose value is at most `cfg.threshold`, in order.
pub fn acquired(results: &[AffordanceResult], cfg: &QueryConfig) -> Vec<AffordanceResult> {
    results
        .iter()
        .filter(|r| r.value <= cfg.threshold)
        .cloned()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(edges: &[(&str, &str, u64)]) -> KnowledgeGraph {
        let mut g = KnowledgeGraph::new();
        for &(s, d, _) in edges {
            for n in [s, d] {
                g.insert_node(n.parse().unwrap(), BTreeSet::new()).unwrap();
            }
        }
        for &(s, d, c) in edges {
            g.add_edge(&s.parse().unwrap(), &d.parse().unwrap(), c)
                .unwrap();
        }
        g
    }

    fn n(s: &str) -> NodeRef {
        s.parse().unwrap()
    }

    #[test]
    fn edge_weight_examples() {
        assert_eq!(edge_weight(1, 0.99).unwrap(), 0.99);
        assert_eq!(edge_weight(2, 0.5).unwrap(), 0.25);
        let w = edge_weight(1883, 0.99).unwrap();
        assert!((6.0e-9..6.2e-9).contains(&w), "{w}");
        assert_eq!(edge_weight(0, 0.99), Err(EngineError::ZeroCount));
        assert_eq!(edge_weight(1, 1.0), Err(EngineError::Decay(1.0)));
        assert_eq!(edge_weight(1, 0.0), Err(EngineError::Decay(0.0)));
        assert!(edge_weight(1, f64::NAN).is_err());
    }

    #[test]
    fn config_defaults_and_validation() {
        let cfg = QueryConfig::default();
        assert_eq!(
            (cfg.decay, cfg.penalty, cfg.threshold, cfg.top_k),
            (0.99, 5.0, 2.0, 10)
        );
        assert!(cfg.validate().is_ok());
        assert!(QueryConfig {
            penalty: 0.0,
            ..cfg
        }
        .validate()
        .is_err());
        assert!(QueryConfig {
            threshold: -1.0,
            ..cfg
        }
        .validate()
        .is_err());
        assert!(QueryConfig { top_k: 0, ..cfg }.validate().is_err());
        assert!(QueryConfig { decay: 1.5, ..cfg }.validate().is_err());
    }

    #[test]
    fn single_edge_and_disconnected() {
        let g = graph(&[("object:x", "action:a", 1), ("object:y", "action:b", 1)]);
        let cfg = QueryConfig::default();
        assert_eq!(affordance(&g, &n("object:x"), &n("action:a"), &cfg), 0.99);
        assert_eq!(affordance(&g, &n("object:x"), &n("action:b"), &cfg), 5.0);
        assert_eq!(affordance(&g, &n("object:zzz"), &n("action:a"), &cfg), 5.0);
        assert_eq!(
            affordance_strict(&g, &n("object:zzz"), &n("action:a"), &cfg),
            Err(EngineError::UnknownNode(n("object:zzz")))
        );
    }

    #[test]
    fn two_short_hops_beat_one_long_edge() {
        // decay 0.1: count 1 -> 0.1; the direct edge uses decay^n = 0.9 at
        // a different decay, so build weights via counts under decay 0.9:
        // count 1 -> 0.9, count 22 -> 0.9^22 ~ 0.098.
        let g = graph(&[
            ("object:x", "action:a", 1),
            ("object:x", "attribute:m", 22),
            ("attribute:m", "action:a", 22),
        ]);
        let cfg = QueryConfig {
            decay: 0.9,
            ..QueryConfig::default()
        };
        let hop = 0.9f64.powf(22.0);
        let got = affordance(&g, &n("object:x"), &n("action:a"), &cfg);
        assert!((got - 2.0 * hop).abs() < 1e-15);
        let path = shortest_path(&g, &n("object:x"), &n("action:a"), &cfg).unwrap();
        assert!(path.traverses(&n("attribute:m")));
        assert_eq!(path.nodes.len(), 3);
    }

    #[test]
    fn path_sums_above_penalty_are_capped() {
        let g = graph(&[
            ("object:x", "attribute:m", 1),
            ("attribute:m", "action:a", 1),
        ]);
        let cfg = QueryConfig {
            penalty: 1.5,
            ..QueryConfig::default()
        };
        assert_eq!(affordance(&g, &n("object:x"), &n("action:a"), &cfg), 1.5);
    }

    #[test]
    fn query_sums_factors_and_penalizes_unreachable() {
        // x reaches a at distance 0.5 (decay 0.5, count 1); y reaches nothing.
        let g = graph(&[("object:x", "action:a", 1), ("object:y", "object:z", 1)]);
        let cfg = QueryConfig {
            decay: 0.5,
            ..QueryConfig::default()
        };
        let obs = Observation::new([n("object:x"), n("object:y")]).unwrap();
        let out = query(&g, &obs, &cfg).unwrap();
        assert_eq!(out.results.len(), 1);
        assert_eq!(out.results[0].value, 5.5);
        assert_eq!(out.results[0].per_factor[&n("object:y")], 5.0);
        assert!(out.missing.is_empty());
    }

    #[test]
    fn single_factor_single_action() {
        let g = graph(&[("object:x", "action:a", 1)]);
        let obs = Observation::new([n("object:x")]).unwrap();
        let out = query(&g, &obs, &QueryConfig::default()).unwrap();
        assert_eq!(out.results.len(), 1);
        assert_eq!(out.results[0].action, n("action:a"));
        assert_eq!(out.results[0].value, 0.99);
        assert_eq!(out.results[0].per_factor[&n("object:x")], 0.99);
    }

    #[test]
    fn missing_factors_warn_then_error() {
        let g = graph(&[("object:x", "action:a", 1)]);
        let cfg = QueryConfig::default();
        let obs = Observation::new([n("object:x"), n("object:ghost")]).unwrap();
        let out = query(&g, &obs, &cfg).unwrap();
        assert_eq!(out.missing, vec![n("object:ghost")]);
        assert_eq!(out.results[0].value, 0.99 + 5.0);
        let obs = Observation::new([n("object:ghost")]).unwrap();
        assert_eq!(
            query(&g, &obs, &cfg),
            Err(EngineError::AllFactorsMissing(vec![n("object:ghost")]))
        );
    }

    #[test]
    fn ties_break_by_label_and_top_k_truncates() {
        let g = graph(&[
            ("object:x", "action:c", 1),
            ("object:x", "action:a", 1),
            ("object:x", "action:b", 1),
        ]);
        let obs = Observation::new([n("object:x")]).unwrap();
        let cfg = QueryConfig {
            top_k: 2,
            ..QueryConfig::default()
        };
        let labels: Vec<String> = query(&g, &obs, &cfg)
            .unwrap()
            .results
            .into_iter()
            .map(|r| r.action.label)
            .collect();
        assert_eq!(labels, ["a", "b"]);
    }

    #[test]
    fn observation_rules() {
        assert_eq!(Observation::new([]), Err(EngineError::EmptyObservation));
        assert_eq!(
            Observation::new([n("object:x"), n("object:x")]),
            Err(EngineError::DuplicateFactor(n("object:x")))
        );
        assert_eq!(
            Observation::new([n("action:x")]),
            Err(EngineError::FactorKind(n("action:x")))
        );
    }

    #[test]
    fn acquired_is_inclusive_at_threshold() {
        let mk = |label: &str, value: f64| AffordanceResult {
            action: NodeRef::action(label),
            value,
            per_factor: BTreeMap::new(),
        };
        let cfg = QueryConfig::default();
        let rs = vec![mk("a", 1.0), mk("b", 2.0), mk("c", 2.0001)];
        let kept: Vec<String> = acquired(&rs, &cfg)
            .into_iter()
            .map(|r| r.action.label)
            .collect();
        assert_eq!(kept, ["a", "b"]);
        assert!(acquired(&[], &cfg).is_empty());
    }
}
