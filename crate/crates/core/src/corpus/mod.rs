//! Parsed-sentence data model and corpus readers.
//!
//! Two on-disk formats are supported: standard 10-column CoNLL-U and the
//! line-delimited `depjson` interchange format (one sentence object per
//! line). Both readers validate every sentence before yielding it; records
//! that fail parsing or validation are reported with their record and line
//! numbers and, under the default [`ErrorPolicy::Skip`], skipped.

mod conllu;
pub mod depjson;
mod validate;

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use conllu::ConlluReader;
pub use depjson::{from_depjson_line, to_depjson_line, DepJsonReader};
pub use validate::{validate_sentence, Rule, ValidationReport, Violation};

/// Stage tag for sentences that did not come out of the generation pipeline.
pub const EXTERNAL_STAGE: &str = "external";

/// Coarse part of speech.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pos {
    Noun,
    Verb,
    Adjective,
    Adverb,
    Preposition,
    Other,
}

impl Pos {
    /// Maps a Universal POS tag onto the coarse set. Unknown tags map to
    /// [`Pos::Other`].
    pub fn from_upos(tag: &str) -> Pos {
        match tag {
            "NOUN" | "PROPN" => Pos::Noun,
            "VERB" => Pos::Verb,
            "ADJ" => Pos::Adjective,
            "ADV" => Pos::Adverb,
            "ADP" => Pos::Preposition,
            _ => Pos::Other,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Pos::Noun => "noun",
            Pos::Verb => "verb",
            Pos::Adjective => "adjective",
            Pos::Adverb => "adverb",
            Pos::Preposition => "preposition",
            Pos::Other => "other",
        }
    }

    /// Accepts either a coarse name or a Universal POS tag.
    pub fn parse_lenient(s: &str) -> Pos {
        match s {
            "noun" => Pos::Noun,
            "verb" => Pos::Verb,
            "adjective" => Pos::Adjective,
            "adverb" => Pos::Adverb,
            "preposition" => Pos::Preposition,
            "other" => Pos::Other,
            upos => Pos::from_upos(upos),
        }
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Token {
    /// 1-based position in the sentence.
    pub index: usize,
    pub surface: String,
    /// Lowercased lemma.
    pub lemma: String,
    pub pos: Pos,
    /// Index of the governing token, 0 for the root.
    pub head: usize,
    /// Dependency relation label, including any subtype (`nmod:poss`).
    pub relation: String,
}

impl Token {
    /// Relation label without its subtype: `compound:prt` -> `compound`.
    pub fn base_relation(&self) -> &str {
        self.relation.split(':').next().unwrap_or("")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ParsedSentence {
    pub id: String,
    pub tokens: Vec<Token>,
    /// Which generation stage produced the sentence, or `"external"`.
    pub stage: String,
}

impl ParsedSentence {
    pub fn token(&self, index: usize) -> Option<&Token> {
        index.checked_sub(1).and_then(|i| self.tokens.get(i))
    }

    pub fn root(&self) -> Option<&Token> {
        self.tokens.iter().find(|t| t.head == 0)
    }

    /// Dependents of `index` in sentence order.
    pub fn children(&self, index: usize) -> impl Iterator<Item = &Token> {
        self.tokens.iter().filter(move |t| t.head == index)
    }

    /// Surface forms joined by single spaces.
    pub fn text(&self) -> String {
        self.tokens
            .iter()
            .map(|t| t.surface.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Lowercases a lemma and collapses internal whitespace.
pub fn normalize_lemma(raw: &str) -> String {
    raw.split_whitespace()
        .map(|w| w.to_lowercase())
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    Conllu,
    DepJson,
}

impl CorpusFormat {
    /// Guesses the format from a file extension.
    pub fn from_path(path: &Path) -> Option<CorpusFormat> {
        match path.extension()?.to_str()? {
            "conllu" | "conll" => Some(CorpusFormat::Conllu),
            "depjson" | "jsonl" | "json" => Some(CorpusFormat::DepJson),
            _ => None,
        }
    }
}

impl FromStr for CorpusFormat {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "conllu" => Ok(CorpusFormat::Conllu),
            "depjson" => Ok(CorpusFormat::DepJson),
            other => Err(CorpusError::UnknownFormat(other.to_string())),
        }
    }
}

/// What to do when a record fails to parse or validate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ErrorPolicy {
    /// Stop at the first bad record.
    Abort,
    /// Report the bad record and continue.
    #[default]
    Skip,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RecordErrorKind {
    #[error("{0}")]
    Syntax(String),
    #[error("invalid sentence: {0}")]
    Invalid(ValidationReport),
}

/// A malformed record, located by its 1-based record number and the line
/// on which the record starts.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("record {record} (line {line}): {kind}")]
pub struct RecordError {
    pub record: usize,
    pub line: usize,
    pub kind: RecordErrorKind,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("read error: {0}")]
    Read(#[from] std::io::Error),
    #[error("unknown corpus format {0:?} (expected conllu or depjson)")]
    UnknownFormat(String),
    #[error("{0}")]
    Record(#[from] RecordError),
}

/// Streaming corpus reader over either format.
///
/// Yields `Ok` for every valid sentence and `Err` for every malformed
/// record. Under [`ErrorPolicy::Abort`] iteration ends after the first
/// error.
pub struct CorpusReader<R> {
    inner: Inner<R>,
    policy: ErrorPolicy,
    stopped: bool,
}

enum Inner<R> {
    Conllu(ConlluReader<R>),
    DepJson(DepJsonReader<R>),
}

impl CorpusReader<BufReader<File>> {
    pub fn open(path: impl AsRef<Path>, format: CorpusFormat) -> Result<Self, CorpusError> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|source| CorpusError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Ok(CorpusReader::new(BufReader::new(file), format))
    }
}

impl<R: BufRead> CorpusReader<R> {
    pub fn new(reader: R, format: CorpusFormat) -> Self {
        let inner = match format {
            CorpusFormat::Conllu => Inner::Conllu(ConlluReader::new(reader)),
            CorpusFormat::DepJson => Inner::DepJson(DepJsonReader::new(reader)),
        };
        CorpusReader {
            inner,
            policy: ErrorPolicy::default(),
            stopped: false,
        }
    }

    pub fn with_policy(mut self, policy: ErrorPolicy) -> Self {
        self.policy = policy;
        self
    }
}

impl<R: BufRead> Iterator for CorpusReader<R> {
    type Item = Result<ParsedSentence, CorpusError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.stopped {
            return None;
        }
        let item = match &mut self.inner {
            Inner::Conllu(r) => r.next(),
            Inner::DepJson(r) => r.next(),
        }?;
        let item = item.and_then(|(sentence, record, line)| {
            let report = validate_sentence(&sentence);
            if report.is_ok() {
                Ok(sentence)
            } else {
                Err(CorpusError::Record(RecordError {
                    record,
                    line,
                    kind: RecordErrorKind::Invalid(report),
                }))
            }
        });
        if item.is_err() && self.policy == ErrorPolicy::Abort {
            self.stopped = true;
        }
        Some(item)
    }
}

/// A fully loaded corpus together with the records that were skipped.
#[derive(Debug, Default)]
pub struct LoadedCorpus {
    pub sentences: Vec<ParsedSentence>,
    pub errors: Vec<RecordError>,
}

/// Loads a whole corpus into memory.
///
/// With [`ErrorPolicy::Abort`] the first malformed record is returned as
/// the error; with [`ErrorPolicy::Skip`] malformed records are collected in
/// [`LoadedCorpus::errors`]. I/O failures always abort.
pub fn load_corpus(
    path: impl AsRef<Path>,
    format: CorpusFormat,
    policy: ErrorPolicy,
) -> Result<LoadedCorpus, CorpusError> {
    collect(
        CorpusReader::open(path, format)?.with_policy(policy),
        policy,
    )
}

/// [`load_corpus`] over an in-memory reader.
pub fn read_corpus<R: BufRead>(
    reader: R,
    format: CorpusFormat,
    policy: ErrorPolicy,
) -> Result<LoadedCorpus, CorpusError> {
    collect(
        CorpusReader::new(reader, format).with_policy(policy),
        policy,
    )
}

fn collect<R: BufRead>(
    reader: CorpusReader<R>,
    policy: ErrorPolicy,
) -> Result<LoadedCorpus, CorpusError> {
    let mut loaded = LoadedCorpus::default();
    for item in reader {
        match item {
            Ok(s) => loaded.sentences.push(s),
            Err(CorpusError::Record(e)) if policy == ErrorPolicy::Skip => {
                log::warn!("skipping {e}");
                loaded.errors.push(e);
            }
            Err(e) => return Err(e),
        }
    }
    Ok(loaded)
}
