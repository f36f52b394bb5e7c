//! Canonical line-delimited dependency JSON:
//! `{"id":..,"stage":..,"tokens":[{"i":1,"surface":..,"lemma":..,"pos":..,"head":..,"rel":..}]}`
//! per line. Unknown fields are ignored on read.

use std::io::BufRead;

use serde::{Deserialize, Serialize};

use super::{
    normalize_lemma, CorpusError, ParsedSentence, Pos, RecordError, RecordErrorKind, Token,
    EXTERNAL_STAGE,
};

#[derive(Serialize, Deserialize)]
struct SentenceRecord {
    id: String,
    #[serde(default = "external")]
    stage: String,
    tokens: Vec<TokenRecord>,
}

#[derive(Serialize, Deserialize)]
struct TokenRecord {
    i: usize,
    surface: String,
    lemma: String,
    pos: String,
    head: usize,
    rel: String,
}

fn external() -> String {
    EXTERNAL_STAGE.to_string()
}

/// Serializes a sentence as one depjson line (no trailing newline).
pub fn to_depjson_line(s: &ParsedSentence) -> String {
    let record = SentenceRecord {
        id: s.id.clone(),
        stage: s.stage.clone(),
        tokens: s
            .tokens
            .iter()
            .map(|t| TokenRecord {
                i: t.index,
                surface: t.surface.clone(),
                lemma: t.lemma.clone(),
                pos: t.pos.as_str().to_string(),
                head: t.head,
                rel: t.relation.clone(),
            })
            .collect(),
    };
    serde_json::to_string(&record).expect("depjson record serializes")
}

/// Parses one depjson line. The sentence is not validated.
pub fn from_depjson_line(line: &str) -> Result<ParsedSentence, String> {
    let record: SentenceRecord = serde_json::from_str(line).map_err(|e| e.to_string())?;
    Ok(ParsedSentence {
        id: record.id,
        stage: record.stage,
        tokens: record
            .tokens
            .into_iter()
            .map(|t| Token {
                index: t.i,
                surface: t.surface,
                lemma: normalize_lemma(&t.lemma),
                pos: Pos::parse_lenient(&t.pos),
                head: t.head,
                relation: t.rel,
            })
            .collect(),
    })
}

pub struct DepJsonReader<R> {
    reader: R,
    line_no: usize,
    record: usize,
    done: bool,
}

impl<R: BufRead> DepJsonReader<R> {
    pub fn new(reader: R) -> Self {
        DepJsonReader {
            reader,
            line_no: 0,
            record: 0,
            done: false,
        }
    }
}

impl<R: BufRead> Iterator for DepJsonReader<R> {
    type Item = Result<(ParsedSentence, usize, usize), CorpusError>;

    fn next(&mut self) -> Option<Self::Item> {
        let mut buf = String::new();
        while !self.done {
            buf.clear();
            match self.reader.read_line(&mut buf) {
                Ok(0) => self.done = true,
                Ok(_) => {
                    self.line_no += 1;
                    let line = buf.trim();
                    if line.is_empty() {
                        continue;
                    }
                    self.record += 1;
                    let (record, line_no) = (self.record, self.line_no);
                    return Some(
                        from_depjson_line(line)
                            .map(|s| (s, record, line_no))
                            .map_err(|msg| {
                                CorpusError::Record(RecordError {
                                    record,
                                    line: line_no,
                                    kind: RecordErrorKind::Syntax(msg),
                                })
                            }),
                    );
                }
                Err(e) => {
                    self.done = true;
                    return Some(Err(e.into()));
                }
            }
        }
        None
    }
}
