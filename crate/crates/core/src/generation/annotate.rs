//! Bridging raw completions to parsed sentences.
//!
//! Parsing is done outside this crate by a parser adapter speaking
//! `annotate --in <file> --out <file> --stage <tag>` and writing depjson.
//! Parses are matched back to completions by their normalized text, so
//! tokenization differences ("apple." vs "apple .") do not matter.

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;
use std::process::Command;

use crate::corpus::{load_corpus, read_corpus, CorpusFormat, ErrorPolicy, ParsedSentence};

use super::GenerationError;

/// Parses of one completion: empty when it could not be parsed, more than
/// one when it holds several sentences.
pub type Annotation = Vec<ParsedSentence>;

pub trait Annotator {
    fn annotate(
        &mut self,
        texts: &[String],
        stage_tag: &str,
    ) -> Result<Vec<Annotation>, GenerationError>;
}

/// Lowercased alphanumerics only; the key under which parses are matched.
pub fn match_key(text: &str) -> String {
    text.chars()
        .filter(|c| c.is_alphanumeric())
        .flat_map(char::to_lowercase)
        .collect()
}

/// Splits after `.`, `!` or `?` followed by whitespace.
fn split_sentences(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = 0;
    let bytes = text.as_bytes();
    for (i, &b) in bytes.iter().enumerate() {
        if matches!(b, b'.' | b'!' | b'?')
            && bytes.get(i + 1).is_some_and(|n| n.is_ascii_whitespace())
        {
            out.push(text[start..=i].trim());
            start = i + 1;
        }
    }
    let rest = text[start..].trim();
    if !rest.is_empty() {
        out.push(rest);
    }
    out.retain(|s| !s.is_empty());
    out
}

/// Answers from a set of pre-parsed sentences, such as a golden depjson
/// file produced by the parser adapter.
#[derive(Debug, Default, Clone)]
pub struct LookupAnnotator {
    parses: HashMap<String, ParsedSentence>,
}

impl LookupAnnotator {
    pub fn new(sentences: impl IntoIterator<Item = ParsedSentence>) -> Self {
        let mut parses = HashMap::new();
        for s in sentences {
            parses.entry(match_key(&s.text())).or_insert(s);
        }
        LookupAnnotator { parses }
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, GenerationError> {
        let path = path.as_ref();
        let format = CorpusFormat::from_path(path).unwrap_or(CorpusFormat::DepJson);
        let loaded = load_corpus(path, format, ErrorPolicy::Skip)
            .map_err(|e| GenerationError::Annotator(e.to_string()))?;
        Ok(LookupAnnotator::new(loaded.sentences))
    }

    pub fn len(&self) -> usize {
        self.parses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parses.is_empty()
    }

    pub fn lookup(&self, text: &str) -> Annotation {
        if let Some(s) = self.parses.get(&match_key(text)) {
            return vec![s.clone()];
        }
        let pieces = split_sentences(text);
        if pieces.len() > 1 {
            let found: Option<Vec<_>> = pieces
                .iter()
                .map(|p| self.parses.get(&match_key(p)).cloned())
                .collect();
            if let Some(found) = found {
                return found;
            }
        }
        Vec::new()
    }
}

impl Annotator for LookupAnnotator {
    fn annotate(
        &mut self,
        texts: &[String],
        stage_tag: &str,
    ) -> Result<Vec<Annotation>, GenerationError> {
        Ok(texts
            .iter()
            .map(|t| {
                let mut parses = self.lookup(t);
                for p in &mut parses {
                    p.stage = stage_tag.to_string();
                }
                parses
            })
            .collect())
    }
}

/// Runs an external parser adapter once per batch.
#[derive(Debug, Clone)]
pub struct CommandAnnotator {
    argv: Vec<String>,
}

impl CommandAnnotator {
    /// `argv` is the program and any leading arguments; `--in`, `--out` and
    /// `--stage` are appended.
    pub fn new(argv: Vec<String>) -> Result<Self, GenerationError> {
        if argv.first().is_none_or(|p| p.trim().is_empty()) {
            return Err(GenerationError::Config("annotator command is empty".into()));
        }
        Ok(CommandAnnotator { argv })
    }
}

impl Annotator for CommandAnnotator {
    fn annotate(
        &mut self,
        texts: &[String],
        stage_tag: &str,
    ) -> Result<Vec<Annotation>, GenerationError> {
        if texts.is_empty() {
            return Ok(Vec::new());
        }
        let err = |m: String| GenerationError::Annotator(m);
        let dir = tempfile::tempdir().map_err(|e| err(e.to_string()))?;
        let input = dir.path().join("in.txt");
        let output = dir.path().join("out.depjson");
        let mut f = std::fs::File::create(&input).map_err(|e| err(e.to_string()))?;
        for t in texts {
            writeln!(f, "{}", t.replace(['\n', '\r'], " ")).map_err(|e| err(e.to_string()))?;
        }
        drop(f);
        let status = Command::new(&self.argv[0])
            .args(&self.argv[1..])
            .arg("--in")
            .arg(&input)
            .arg("--out")
            .arg(&output)
            .arg("--stage")
            .arg(stage_tag)
            .status()
            .map_err(|e| err(format!("cannot run {:?}: {e}", self.argv[0])))?;
        if !status.success() {
            return Err(err(format!("{:?} exited with {status}", self.argv[0])));
        }
        let text = std::fs::read(&output).map_err(|e| err(e.to_string()))?;
        let loaded = read_corpus(text.as_slice(), CorpusFormat::DepJson, ErrorPolicy::Skip)
            .map_err(|e| err(e.to_string()))?;
        LookupAnnotator::new(loaded.sentences).annotate(texts, stage_tag)
    }
}

/// Why a completion was not accepted into the corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RejectReason {
    Empty,
    Unparsed,
    MultipleSentences,
    NotFirstPerson,
}

impl RejectReason {
    pub fn as_str(self) -> &'static str {
        match self {
            RejectReason::Empty => "empty completion",
            RejectReason::Unparsed => "no parse",
            RejectReason::MultipleSentences => "more than one sentence",
            RejectReason::NotFirstPerson => "subject is not \"I\"",
        }
    }
}

/// Acceptance filter: exactly one sentence whose root has the nominal
/// subject "I".
pub fn check_acceptance(parses: &[ParsedSentence]) -> Result<(), RejectReason> {
    let s = match parses {
        [] => return Err(RejectReason::Unparsed),
        [s] => s,
        _ => return Err(RejectReason::MultipleSentences),
    };
    let Some(root) = s.root() else {
        return Err(RejectReason::Unparsed);
    };
    let first_person = s
        .children(root.index)
        .any(|t| t.base_relation() == "nsubj" && t.lemma == "i");
    if first_person {
        Ok(())
    } else {
        Err(RejectReason::NotFirstPerson)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::read_corpus;

    const PARSES: &str = "\
# sent_id = a
1\tI\tI\tPRON\t_\t_\t2\tnsubj\t_\t_
2\teat\teat\tVERB\t_\t_\t0\troot\t_\t_
3\tapples\tapple\tNOUN\t_\t_\t2\tobj\t_\t_
4\t.\t.\tPUNCT\t_\t_\t2\tpunct\t_\t_

# sent_id = b
1\tApples\tapple\tNOUN\t_\t_\t2\tnsubj\t_\t_
2\tfall\tfall\tVERB\t_\t_\t0\troot\t_\t_
3\t.\t.\tPUNCT\t_\t_\t2\tpunct\t_\t_

";

    fn annotator() -> LookupAnnotator {
        let loaded =
            read_corpus(PARSES.as_bytes(), CorpusFormat::Conllu, ErrorPolicy::Abort).unwrap();
        LookupAnnotator::new(loaded.sentences)
    }

    #[test]
    fn match_key_ignores_spacing_case_and_punctuation() {
        assert_eq!(match_key("I eat apples."), match_key("i  eat apples ."));
        assert_eq!(match_key("Don't!"), "dont");
    }

    #[test]
    fn lookup_single_and_multiple() {
        let a = annotator();
        assert_eq!(a.len(), 2);
        assert_eq!(a.lookup("I eat apples.").len(), 1);
        assert_eq!(a.lookup("I eat apples. Apples fall.").len(), 2);
        assert!(a.lookup("I eat pears.").is_empty());
    }

    #[test]
    fn acceptance_filter() {
        let a = annotator();
        assert_eq!(check_acceptance(&a.lookup("I eat apples.")), Ok(()));
        assert_eq!(
            check_acceptance(&a.lookup("Apples fall.")),
            Err(RejectReason::NotFirstPerson)
        );
        assert_eq!(
            check_acceptance(&a.lookup("I eat apples. Apples fall.")),
            Err(RejectReason::MultipleSentences)
        );
        assert_eq!(check_acceptance(&[]), Err(RejectReason::Unparsed));
    }

    #[test]
    fn annotate_stamps_stage() {
        let mut a = annotator();
        let out = a
            .annotate(&["I eat apples.".to_string()], "stage3")
            .unwrap();
        assert_eq!(out[0][0].stage, "stage3");
    }

    #[test]
    fn sentence_splitting() {
        assert_eq!(split_sentences("A b. C d! E"), ["A b.", "C d!", "E"]);
        assert_eq!(split_sentences("3.5 apples."), ["3.5 apples."]);
    }

    #[test]
    fn empty_command_is_rejected() {
        assert!(CommandAnnotator::new(vec![]).is_err());
        assert!(CommandAnnotator::new(vec![" ".into()]).is_err());
    }
}
