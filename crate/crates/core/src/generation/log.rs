//! The generation log: one JSON record per line, in protocol order.

use std::collections::BTreeSet;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::prompt::Stage;
use super::GenerationError;

/// A completion that did not pass the acceptance filter.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    pub text: String,
    pub reason: String,
}

/// One prompt and everything that happened to it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RequestRecord {
    pub stage: Stage,
    /// Position of the prompt within the whole run, from 0.
    pub index: usize,
    pub target: String,
    pub prompt: String,
    pub model_id: String,
    pub attempts: u32,
    /// Raw completions of the successful attempt.
    pub responses: Vec<String>,
    pub accepted: Vec<String>,
    pub rejected: Vec<Rejection>,
    /// Final error when every attempt failed.
    pub error: Option<String>,
    /// Microseconds; Unix time for live runs, virtual time for stub runs.
    pub timestamp_us: u64,
}

/// Terms collected after a stage; they become the next stages' targets.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Discovery {
    pub stage: Stage,
    pub objects: BTreeSet<String>,
    pub attributes: BTreeSet<String>,
    /// Object phrases carrying a prepositional location.
    pub locations: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LogRecord {
    /// First record: the configuration and templates the run used.
    Run {
        config: serde_json::Value,
        templates: super::prompt::Templates,
    },
    Request(RequestRecord),
    Discovery(Discovery),
}

/// Append-only sequence of [`LogRecord`]s.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GenerationLog {
    pub records: Vec<LogRecord>,
}

impl GenerationLog {
    pub fn push(&mut self, record: LogRecord) {
        self.records.push(record);
    }

    pub fn requests(&self) -> impl Iterator<Item = &RequestRecord> {
        self.records.iter().filter_map(|r| match r {
            LogRecord::Request(r) => Some(r),
            _ => None,
        })
    }

    pub fn discoveries(&self) -> impl Iterator<Item = &Discovery> {
        self.records.iter().filter_map(|r| match r {
            LogRecord::Discovery(d) => Some(d),
            _ => None,
        })
    }

    pub fn request_count(&self) -> usize {
        self.requests().count()
    }

    pub fn requests_in(&self, stage: Stage) -> usize {
        self.requests().filter(|r| r.stage == stage).count()
    }

    /// Accepted sentences in prompt order, duplicates kept.
    pub fn corpus(&self) -> Vec<String> {
        self.requests()
            .flat_map(|r| r.accepted.iter().cloned())
            .collect()
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for r in &self.records {
            serde_json::to_writer(&mut out, r)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("JSON is UTF-8")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), GenerationError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_jsonl()).map_err(|e| GenerationError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })
    }

    pub fn read_from<R: BufRead>(reader: R) -> Result<Self, GenerationError> {
        let mut log = GenerationLog::default();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| GenerationError::Log {
                line: i + 1,
                message: e.to_string(),
            })?;
            if line.trim().is_empty() {
                continue;
            }
            let record = serde_json::from_str(&line).map_err(|e| GenerationError::Log {
                line: i + 1,
                message: e.to_string(),
            })?;
            log.push(record);
        }
        Ok(log)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, GenerationError> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| GenerationError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::read_from(std::io::BufReader::new(file))
    }
}

/// Writes sentences one per line.
pub fn write_sentences<W: Write>(sentences: &[String], mut out: W) -> std::io::Result<()> {
    for s in sentences {
        writeln!(out, "{s}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn request(index: usize, accepted: &[&str]) -> RequestRecord {
        RequestRecord {
            stage: Stage::Seed,
            index,
            target: "apple".into(),
            prompt: "p".into(),
            model_id: "m".into(),
            attempts: 1,
            responses: accepted.iter().map(|s| s.to_string()).collect(),
            accepted: accepted.iter().map(|s| s.to_string()).collect(),
            rejected: vec![],
            error: None,
            timestamp_us: index as u64,
        }
    }

    #[test]
    fn jsonl_round_trip() {
        let mut log = GenerationLog::default();
        log.push(LogRecord::Request(request(0, &["I eat the apple."])));
        log.push(LogRecord::Discovery(Discovery {
            stage: Stage::Seed,
            objects: ["apple".to_string()].into(),
            ..Discovery::default()
        }));
        let text = log.to_jsonl();
        assert_eq!(text.lines().count(), 2);
        assert!(text.starts_with("{\"kind\":\"request\",\"stage\":1,"));
        let back = GenerationLog::read_from(text.as_bytes()).unwrap();
        assert_eq!(back, log);
    }

    #[test]
    fn corpus_keeps_duplicates_in_order() {
        let mut log = GenerationLog::default();
        log.push(LogRecord::Request(request(0, &["b"])));
        log.push(LogRecord::Request(request(1, &["a", "b"])));
        assert_eq!(log.corpus(), ["b", "a", "b"]);
        assert_eq!(log.request_count(), 2);
    }

    #[test]
    fn bad_line_is_reported_with_its_number() {
        let text = "{\"kind\":\"discovery\",\"stage\":1,\"objects\":[],\"attributes\":[],\"locations\":[]}\nnot json\n";
        match GenerationLog::read_from(text.as_bytes()) {
            Err(GenerationError::Log { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }
}
