use std::fmt;

use super::ParsedSentence;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rule {
    /// The sentence has no tokens.
    Empty,
    /// Token indices must run 1, 2, 3, ... in order.
    IndexSequence,
    EmptyLemma,
    HeadIsSelf,
    HeadOutOfRange,
    NoRoot,
    MultipleRoots,
    /// Head links loop without reaching the root.
    Cycle,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::Empty => "empty sentence",
            Rule::IndexSequence => "token index out of sequence",
            Rule::EmptyLemma => "empty lemma",
            Rule::HeadIsSelf => "head points at itself",
            Rule::HeadOutOfRange => "head out of range",
            Rule::NoRoot => "no root",
            Rule::MultipleRoots => "multiple roots",
            Rule::Cycle => "cycle",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// Offending token index, when the rule concerns a single token.
    pub token: Option<usize>,
    pub rule: Rule,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.token {
            Some(i) => write!(f, "token {i}: {}", self.rule),
            None => write!(f, "{}", self.rule),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, rule: Rule) -> bool {
        self.violations.iter().any(|v| v.rule == rule)
    }

    fn push(&mut self, token: Option<usize>, rule: Rule) {
        self.violations.push(Violation { token, rule });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return f.write_str("ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks the token and tree invariants of a sentence.
pub fn validate_sentence(s: &ParsedSentence) -> ValidationReport {
    let mut report = ValidationReport::default();
    let n = s.tokens.len();
    if n == 0 {
        report.push(None, Rule::Empty);
        return report;
    }

    let mut structural = true;
    let mut roots = Vec::new();
    for (pos, t) in s.tokens.iter().enumerate() {
        if t.index != pos + 1 {
            report.push(Some(t.index), Rule::IndexSequence);
            structural = false;
        }
        if t.lemma.is_empty() {
            report.push(Some(t.index), Rule::EmptyLemma);
        }
        if t.head == t.index {
            report.push(Some(t.index), Rule::HeadIsSelf);
            structural = false;
        } else if t.head > n {
            report.push(Some(t.index), Rule::HeadOutOfRange);
            structural = false;
        }
        if t.head == 0 {
            roots.push(t.index);
        }
    }
    match roots.len() {
        0 => report.push(None, Rule::NoRoot),
        1 => {}
        _ => {
            for &r in &roots[1..] {
                report.push(Some(r), Rule::MultipleRoots);
            }
        }
    }
    if !structural {
        return report;
    }

    // Walk every head chain; a chain that revisits a token on the current
    // walk is a cycle. Each cycle is reported once, by its smallest index.
    const UNSEEN: u8 = 0;
    const ON_WALK: u8 = 1;
    const DONE: u8 = 2;
    let mut state = vec![UNSEEN; n + 1];
    state[0] = DONE;
    for start in 1..=n {
        let mut walk = Vec::new();
        let mut cur = start;
        while state[cur] == UNSEEN {
            state[cur] = ON_WALK;
            walk.push(cur);
            cur = s.tokens[cur - 1].head;
        }
        if state[cur] == ON_WALK {
            let at = walk.iter().position(|&i| i == cur).unwrap_or(0);
            let min = walk[at..].iter().copied().min().unwrap_or(cur);
            report.push(Some(min), Rule::Cycle);
        }
        for i in walk {
            state[i] = DONE;
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Pos, Token};

    fn sent(heads: &[usize]) -> ParsedSentence {
        ParsedSentence {
            id: "t".into(),
            stage: "external".into(),
            tokens: heads
                .iter()
                .enumerate()
                .map(|(i, &h)| Token {
                    index: i + 1,
                    surface: format!("w{}", i + 1),
                    lemma: format!("w{}", i + 1),
                    pos: Pos::Other,
                    head: h,
                    relation: "dep".into(),
                })
                .collect(),
        }
    }

    #[test]
    fn single_token_root_is_ok() {
        assert!(validate_sentence(&sent(&[0])).is_ok());
    }

    #[test]
    fn mutual_heads_form_a_cycle() {
        let r = validate_sentence(&sent(&[2, 1]));
        assert!(r.has(Rule::Cycle), "{r}");
        assert!(r.has(Rule::NoRoot));
    }

    #[test]
    fn two_roots_are_rejected() {
        let r = validate_sentence(&sent(&[0, 0]));
        assert_eq!(
            r.violations,
            vec![Violation {
                token: Some(2),
                rule: Rule::MultipleRoots
            }]
        );
    }

    #[test]
    fn cycle_detached_from_root() {
        // 1 is root; 2 -> 3 -> 4 -> 2 loops.
        let r = validate_sentence(&sent(&[0, 3, 4, 2]));
        assert_eq!(
            r.violations,
            vec![Violation {
                token: Some(2),
                rule: Rule::Cycle
            }]
        );
    }

    #[test]
    fn range_and_self_heads() {
        let r = validate_sentence(&sent(&[0, 9, 3]));
        assert!(r.has(Rule::HeadOutOfRange));
        assert!(r.has(Rule::HeadIsSelf));
        assert_eq!(
            r.violations.iter().filter(|v| v.token == Some(2)).count(),
            1
        );
    }

    #[test]
    fn empty_lemma_and_empty_sentence() {
        let mut s = sent(&[0]);
        s.tokens[0].lemma.clear();
        assert!(validate_sentence(&s).has(Rule::EmptyLemma));
        assert!(validate_sentence(&sent(&[])).has(Rule::Empty));
    }

    #[test]
    fn well_formed_chain() {
        assert!(validate_sentence(&sent(&[2, 0, 2, 3])).is_ok());
    }
}
