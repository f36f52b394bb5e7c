use std::io::BufRead;

use super::{
    normalize_lemma, CorpusError, ParsedSentence, Pos, RecordError, RecordErrorKind, Token,
    EXTERNAL_STAGE,
};

/// Reads blank-line separated CoNLL-U sentence blocks.
///
/// Multiword-token ranges (`3-4`) and empty nodes (`5.1`) are skipped.
/// `# sent_id = ...` and `# stage = ...` comments populate the sentence id
/// and stage; other comments are ignored. A missing lemma (`_`) falls back
/// to the lowercased surface form.
pub struct ConlluReader<R> {
    reader: R,
    line_no: usize,
    record: usize,
    done: bool,
}

struct Block {
    start_line: usize,
    lines: Vec<(usize, String)>,
}

impl<R: BufRead> ConlluReader<R> {
    pub fn new(reader: R) -> Self {
        ConlluReader {
            reader,
            line_no: 0,
            record: 0,
            done: false,
        }
    }

    fn next_block(&mut self) -> Result<Option<Block>, CorpusError> {
        let mut block: Option<Block> = None;
        let mut buf = String::new();
        loop {
            buf.clear();
            if self.reader.read_line(&mut buf)? == 0 {
                return Ok(block);
            }
            self.line_no += 1;
            let line = buf.trim_end_matches(['\n', '\r']);
            if line.trim().is_empty() {
                if block.is_some() {
                    return Ok(block);
                }
                continue;
            }
            block
                .get_or_insert_with(|| Block {
                    start_line: self.line_no,
                    lines: Vec::new(),
                })
                .lines
                .push((self.line_no, line.to_string()));
        }
    }
}

impl<R: BufRead> Iterator for ConlluReader<R> {
    type Item = Result<(ParsedSentence, usize, usize), CorpusError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            if self.done {
                return None;
            }
            let block = match self.next_block() {
                Ok(Some(b)) => b,
                Ok(None) => {
                    self.done = true;
                    return None;
                }
                Err(e) => {
                    self.done = true;
                    return Some(Err(e));
                }
            };
            // Comment-only blocks (e.g. a lone `# newdoc`) carry no sentence.
            if block.lines.iter().all(|(_, l)| l.starts_with('#')) {
                continue;
            }
            self.record += 1;
            let record = self.record;
            let start = block.start_line;
            return Some(
                parse_block(&block, record)
                    .map(|s| (s, record, start))
                    .map_err(|msg| {
                        CorpusError::Record(RecordError {
                            record,
                            line: start,
                            kind: RecordErrorKind::Syntax(msg),
                        })
                    }),
            );
        }
    }
}

fn parse_block(block: &Block, record: usize) -> Result<ParsedSentence, String> {
    let mut id = None;
    let mut stage = None;
    let mut tokens = Vec::new();
    for (line_no, line) in &block.lines {
        if let Some(comment) = line.strip_prefix('#') {
            if let Some((key, value)) = comment.split_once('=') {
                match key.trim() {
                    "sent_id" => id = Some(value.trim().to_string()),
                    "stage" => stage = Some(value.trim().to_string()),
                    _ => {}
                }
            }
            continue;
        }
        if let Some(token) = parse_token(line).map_err(|e| format!("line {line_no}: {e}"))? {
            tokens.push(token);
        }
    }
    Ok(ParsedSentence {
        id: id.unwrap_or_else(|| format!("s{record}")),
        tokens,
        stage: stage.unwrap_or_else(|| EXTERNAL_STAGE.to_string()),
    })
}

fn parse_token(line: &str) -> Result<Option<Token>, String> {
    let cols: Vec<&str> = line.split('\t').collect();
    if cols.len() != 10 {
        return Err(format!(
            "expected 10 tab-separated columns, found {}",
            cols.len()
        ));
    }
    let id = cols[0];
    if id.contains('-') || id.contains('.') {
        return Ok(None);
    }
    let index: usize = id.parse().map_err(|_| format!("bad token id {id:?}"))?;
    let head: usize = cols[6]
        .parse()
        .map_err(|_| format!("bad head {:?} for token {index}", cols[6]))?;
    let surface = cols[1].to_string();
    let lemma = match cols[2] {
        "_" if surface != "_" => normalize_lemma(&surface),
        l => normalize_lemma(l),
    };
    Ok(Some(Token {
        index,
        surface,
        lemma,
        pos: Pos::from_upos(cols[3]),
        head,
        relation: cols[7].to_string(),
    }))
}
