//! Human response files: one JSON record per line.
//!
//! ```text
//! {"respondent": "r1", "situation": ["object:apple"], "actions": ["eat the apple", "slice it"]}
//! {"respondent": "r1", "situation": ["object:apple"], "ordering": ["eat apple", "...", "..."]}
//! ```
//!
//! A record carries either `actions` (coverage) or `ordering` (ranking of
//! the system's top five). Blank lines and lines starting with `#` are
//! ignored.

use std::collections::BTreeSet;
use std::io::BufRead;
use std::path::Path;

use serde::Deserialize;

use super::{EvalError, RANKED_ITEMS};
use crate::graph::{NodeKind, NodeRef};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HumanResponse {
    pub respondent: String,
    pub situation: Vec<NodeRef>,
    pub actions: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankingResponse {
    pub respondent: String,
    pub situation: Vec<NodeRef>,
    pub ordering: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ResponseSet {
    pub coverage: Vec<HumanResponse>,
    pub rankings: Vec<RankingResponse>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Record {
    respondent: String,
    situation: Vec<String>,
    #[serde(default)]
    actions: Option<Vec<String>>,
    #[serde(default)]
    ordering: Option<Vec<String>>,
}

fn same_situation(a: &[NodeRef], b: &[NodeRef]) -> bool {
    a.iter().collect::<BTreeSet<_>>() == b.iter().collect::<BTreeSet<_>>()
}

impl ResponseSet {
    pub fn coverage_for(&self, situation: &[NodeRef]) -> Vec<HumanResponse> {
        self.coverage
            .iter()
            .filter(|r| same_situation(&r.situation, situation))
            .cloned()
            .collect()
    }

    pub fn rankings_for(&self, situation: &[NodeRef]) -> Vec<RankingResponse> {
        self.rankings
            .iter()
            .filter(|r| same_situation(&r.situation, situation))
            .cloned()
            .collect()
    }

    /// Distinct situations, each sorted, in order of first appearance.
    pub fn situations(&self) -> Vec<Vec<NodeRef>> {
        let mut out: Vec<Vec<NodeRef>> = Vec::new();
        let all = self
            .coverage
            .iter()
            .map(|r| &r.situation)
            .chain(self.rankings.iter().map(|r| &r.situation));
        for s in all {
            let mut sorted = s.clone();
            sorted.sort();
            if !out.contains(&sorted) {
                out.push(sorted);
            }
        }
        out
    }
}

/// Respondent, situation and either coverage actions (`Ok`) or a ranking
/// (`Err`).
type ParsedRecord = (String, Vec<NodeRef>, Result<Vec<String>, Vec<String>>);

fn parse_record(line: &str) -> Result<ParsedRecord, String> {
    let r: Record = serde_json::from_str(line).map_err(|e| e.to_string())?;
    if r.respondent.trim().is_empty() {
        return Err("respondent is empty".into());
    }
    if r.situation.is_empty() {
        return Err("situation is empty".into());
    }
    let mut situation = Vec::new();
    for f in &r.situation {
        let node: NodeRef = f
            .parse()
            .map_err(|e| format!("situation factor {f:?}: {e}"))?;
        if node.kind == NodeKind::Action {
            return Err(format!("situation factor {f:?} is an action"));
        }
        if situation.contains(&node) {
            return Err(format!("situation factor {f:?} is listed twice"));
        }
        situation.push(node);
    }
    let body = match (r.actions, r.ordering) {
        (Some(actions), None) => {
            if actions.is_empty() {
                return Err("actions is empty".into());
            }
            if actions.iter().any(|a| a.trim().is_empty()) {
                return Err("actions contains an empty phrase".into());
            }
            Ok(actions)
        }
        (None, Some(ordering)) => {
            if ordering.len() != RANKED_ITEMS {
                return Err(format!(
                    "ordering has {} labels, {RANKED_ITEMS} expected",
                    ordering.len()
                ));
            }
            let distinct: BTreeSet<&String> = ordering.iter().collect();
            if distinct.len() != ordering.len() {
                return Err("ordering repeats a label".into());
            }
            Err(ordering.into_iter().map(|s| s.trim().to_string()).collect())
        }
        (Some(_), Some(_)) => return Err("record has both actions and ordering".into()),
        (None, None) => return Err("record has neither actions nor ordering".into()),
    };
    Ok((r.respondent, situation, body))
}

/// Reads a response file; errors name the 1-based record (line) number.
pub fn parse_responses<R: BufRead>(reader: R) -> Result<ResponseSet, EvalError> {
    let mut set = ResponseSet::default();
    for (i, line) in reader.lines().enumerate() {
        let record = i + 1;
        let line = line.map_err(|e| EvalError::Record {
            record,
            message: e.to_string(),
        })?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (respondent, situation, body) =
            parse_record(trimmed).map_err(|message| EvalError::Record { record, message })?;
        match body {
            Ok(actions) => set.coverage.push(HumanResponse {
                respondent,
                situation,
                actions,
            }),
            Err(ordering) => set.rankings.push(RankingResponse {
                respondent,
                situation,
                ordering,
            }),
        }
    }
    Ok(set)
}

pub fn load_responses(path: impl AsRef<Path>) -> Result<ResponseSet, EvalError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| EvalError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_responses(std::io::BufReader::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_both_kinds() {
        let text = r#"
# comment
{"respondent": "r1", "situation": ["object:apple", "attribute:at store"], "actions": ["buy apples"]}
{"respondent": "r2", "situation": ["attribute:at store", "object:apple"], "ordering": ["a", "b", "c", "d", "e"]}
"#;
        let set = parse_responses(text.as_bytes()).unwrap();
        assert_eq!(set.coverage.len(), 1);
        assert_eq!(set.rankings.len(), 1);
        assert_eq!(set.situations().len(), 1);
        let sit = [NodeRef::object("apple"), NodeRef::attribute("at store")];
        assert_eq!(set.coverage_for(&sit).len(), 1);
        assert_eq!(set.rankings_for(&sit).len(), 1);
        assert!(set.coverage_for(&sit[..1]).is_empty());
    }

    #[test]
    fn malformed_records_name_their_line() {
        for (text, line) in [
            (
                "{\"respondent\": \"r\", \"situation\": [\"object:a\"], \"actions\": []}",
                1,
            ),
            (
                "\n{\"respondent\": \"r\", \"situation\": [\"action:a\"], \"actions\": [\"x\"]}",
                2,
            ),
            (
                "{\"respondent\": \"r\", \"situation\": [\"object:a\"], \"ordering\": [\"a\"]}",
                1,
            ),
            ("{\"respondent\": \"r\", \"situation\": [\"object:a\"]}", 1),
            (
                "{\"respondent\": \"r\", \"situation\": [\"object:a\"], \"actions\": [\" \"]}",
                1,
            ),
            ("not json", 1),
        ] {
            match parse_responses(text.as_bytes()) {
                Err(EvalError::Record { record, .. }) => assert_eq!(record, line, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }
}
