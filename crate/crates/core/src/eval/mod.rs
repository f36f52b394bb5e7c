//! Comparison of acquired actions against human responses.
//!
//! - coverage: share of distinct normalized human actions that the graph
//!   acquired;
//! - weighted coverage: the same over mentions, each respondent counting
//!   once per distinct action;
//! - rank distance: Spearman footrule between the system's top five and
//!   each respondent's ordering of them, averaged over respondents.

pub mod normalize;
pub mod responses;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use normalize::{normalize_action, NormalizeError, NormalizedAction};
pub use responses::{load_responses, parse_responses, HumanResponse, RankingResponse, ResponseSet};

use crate::engine::{acquired, AffordanceEngine, EngineError, Observation};
use crate::graph::NodeRef;

/// Number of system actions a ranking respondent orders.
pub const RANKED_ITEMS: usize = 5;

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("no responses to score")]
    NoResponses,
    #[error("no scorable action phrases: every phrase failed to normalize")]
    NothingScorable,
    #[error("respondent {respondent}: ordering is not a permutation of the system ranking")]
    NotAPermutation { respondent: String },
    #[error("system ranking has duplicate labels")]
    DuplicateSystemLabels,
    #[error("system ranking has {got} actions, {want} needed")]
    ShortSystemRanking { got: usize, want: usize },
    #[error("response record {record}: {message}")]
    Record { record: usize, message: String },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// A phrase left out of scoring because it could not be normalized.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Excluded {
    pub respondent: String,
    pub phrase: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    /// Percentage in [0, 100].
    pub score: f64,
    pub matched: usize,
    pub total: usize,
    pub excluded: Vec<Excluded>,
}

/// Distinct normalized labels per respondent, plus exclusions. Respondents
/// are keyed by id, so a respondent split over several records is merged.
fn normalized_by_respondent(
    responses: &[HumanResponse],
) -> (BTreeMap<&str, BTreeSet<String>>, Vec<Excluded>) {
    let mut by = BTreeMap::<&str, BTreeSet<String>>::new();
    let mut excluded = Vec::new();
    for r in responses {
        let set = by.entry(r.respondent.as_str()).or_default();
        for phrase in &r.actions {
            match normalize_action(phrase) {
                Ok(n) => {
                    set.insert(n.label());
                }
                Err(e) => excluded.push(Excluded {
                    respondent: r.respondent.clone(),
                    phrase: phrase.clone(),
                    reason: e.to_string(),
                }),
            }
        }
    }
    excluded.sort_by(|a, b| (&a.respondent, &a.phrase).cmp(&(&b.respondent, &b.phrase)));
    (by, excluded)
}

fn report(
    matched: usize,
    total: usize,
    excluded: Vec<Excluded>,
) -> Result<CoverageReport, EvalError> {
    if total == 0 {
        return Err(EvalError::NothingScorable);
    }
    Ok(CoverageReport {
        score: 100.0 * matched as f64 / total as f64,
        matched,
        total,
        excluded,
    })
}

/// `100 * |distinct human actions ∩ acquired| / |distinct human actions|`.
pub fn coverage_score(
    responses: &[HumanResponse],
    acquired: &BTreeSet<String>,
) -> Result<CoverageReport, EvalError> {
    if responses.is_empty() {
        return Err(EvalError::NoResponses);
    }
    let (by, excluded) = normalized_by_respondent(responses);
    let distinct: BTreeSet<&String> = by.values().flatten().collect();
    let matched = distinct.iter().filter(|l| acquired.contains(**l)).count();
    report(matched, distinct.len(), excluded)
}

/// Mentions-weighted coverage: every respondent contributes each of their
/// distinct actions once.
pub fn weighted_coverage(
    responses: &[HumanResponse],
    acquired: &BTreeSet<String>,
) -> Result<CoverageReport, EvalError> {
    if responses.is_empty() {
        return Err(EvalError::NoResponses);
    }
    let (by, excluded) = normalized_by_respondent(responses);
    let total: usize = by.values().map(BTreeSet::len).sum();
    let matched = by
        .values()
        .flatten()
        .filter(|l| acquired.contains(*l))
        .count();
    report(matched, total, excluded)
}

/// Footrule distance between two orderings of the same items.
pub fn footrule(system: &[String], human: &[String]) -> Option<usize> {
    if system.len() != human.len() {
        return None;
    }
    let pos: BTreeMap<&String, usize> = system.iter().enumerate().map(|(i, l)| (l, i)).collect();
    if pos.len() != system.len() {
        return None;
    }
    let mut seen = BTreeSet::new();
    let mut sum = 0;
    for (i, label) in human.iter().enumerate() {
        let j = *pos.get(label)?;
        if !seen.insert(label) {
            return None;
        }
        sum += i.abs_diff(j);
    }
    Some(sum)
}

/// Mean footrule distance of the rankings from `system`.
pub fn rank_distance(system: &[String], rankings: &[RankingResponse]) -> Result<f64, EvalError> {
    if rankings.is_empty() {
        return Err(EvalError::NoResponses);
    }
    if system.iter().collect::<BTreeSet<_>>().len() != system.len() {
        return Err(EvalError::DuplicateSystemLabels);
    }
    let mut total = 0usize;
    for r in rankings {
        total += footrule(system, &r.ordering).ok_or_else(|| EvalError::NotAPermutation {
            respondent: r.respondent.clone(),
        })?;
    }
    Ok(total as f64 / rankings.len() as f64)
}

/// Largest footrule distance between orderings of `n` items: `floor(n²/2)`.
pub fn max_footrule(n: usize) -> usize {
    n * n / 2
}

/// Which metrics to compute for a situation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Coverage,
    Rank,
}

/// One metric value for one situation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    pub situation: Vec<String>,
    pub metric: String,
    pub value: f64,
}

/// Scores the responses for one situation against the graph.
///
/// Coverage mode yields `coverage` and `weighted_coverage` over the
/// acquired actions (value within the threshold, no top-k cut); rank mode
/// yields `rank_distance` against the top five actions.
pub fn evaluate_situation(
    engine: &AffordanceEngine<'_>,
    situation: &[NodeRef],
    responses: &ResponseSet,
    mode: Mode,
) -> Result<(Vec<MetricRecord>, Vec<Excluded>), EvalError> {
    let obs = Observation::new(situation.iter().cloned())?;
    let outcome = engine.query(&obs)?;
    let names: Vec<String> = situation.iter().map(NodeRef::to_string).collect();
    let record = |metric: &str, value: f64| MetricRecord {
        situation: names.clone(),
        metric: metric.to_string(),
        value,
    };
    match mode {
        Mode::Coverage => {
            let acquired: BTreeSet<String> = acquired(&outcome.results, engine.config())
                .into_iter()
                .map(|r| r.action.label)
                .collect();
            let rs = responses.coverage_for(situation);
            let plain = coverage_score(&rs, &acquired)?;
            let weighted = weighted_coverage(&rs, &acquired)?;
            Ok((
                vec![
                    record("coverage", plain.score),
                    record("weighted_coverage", weighted.score),
                ],
                plain.excluded,
            ))
        }
        Mode::Rank => {
            if outcome.results.len() < RANKED_ITEMS {
                return Err(EvalError::ShortSystemRanking {
                    got: outcome.results.len(),
                    want: RANKED_ITEMS,
                });
            }
            let system: Vec<String> = outcome.results[..RANKED_ITEMS]
                .iter()
                .map(|r| r.action.label.clone())
                .collect();
            let rs = responses.rankings_for(situation);
            let d = rank_distance(&system, &rs)?;
            Ok((vec![record("rank_distance", d)], Vec::new()))
        }
    }
}
