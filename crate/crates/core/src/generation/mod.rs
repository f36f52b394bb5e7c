//! Staged sentence collection against a text-generation endpoint.
//!
//! Stage 1 asks `stage1_count` times for a first-person sentence about the
//! seed object. Objects and attributes are extracted from the accepted
//! sentences with the same phrase extraction the graph builder uses. Stage
//! 2 asks `per_item_count` times per collected object (seed excluded) for a
//! sentence that places the object somewhere; stage 3 asks for action
//! sentences per object, plus per location phrase from stage 2 when
//! `stage3_includes_location_objects` is set; stage 4 asks per attribute
//! collected in stages 1 to 3.
//!
//! Prompts are issued sequentially in a fixed order, so the log and corpus
//! are a function of the configuration, the client and the annotator.

pub mod annotate;
pub mod client;
pub mod clock;
pub mod log;
pub mod prompt;

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use annotate::{check_acceptance, Annotator, CommandAnnotator, LookupAnnotator, RejectReason};
pub use client::{
    ClientError, HttpClient, ReplayClient, StubClient, StubFixture, TextGenRequest,
    TextGenResponse, TextGenerator,
};
pub use clock::{Clock, LogicalClock, RateLimiter, SystemClock};
pub use log::{Discovery, GenerationLog, LogRecord, Rejection, RequestRecord};
pub use prompt::{make_prompt, Stage, Templates};

use crate::builder::compose::modified_object_label;
use crate::builder::{compose_nodes, extract_phrases, AttributePhrase};
use crate::corpus::ParsedSentence;
use crate::graph::NodeKind;

#[derive(Debug, Error)]
pub enum GenerationError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid prompt templates: {0}")]
    Template(String),
    #[error("stage {0} prompt needs a non-empty target")]
    EmptyTarget(Stage),
    #[error("environment variable {0} is not set")]
    MissingEnv(&'static str),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("generation log line {line}: {message}")]
    Log { line: usize, message: String },
    #[error("annotator failed: {0}")]
    Annotator(String),
    #[error("aborting after {failed} failed prompts")]
    TooManyFailures {
        failed: usize,
        /// Everything logged up to the abort.
        log: Box<GenerationLog>,
    },
}

fn default_stage1_count() -> usize {
    200
}
fn default_per_item_count() -> usize {
    10
}
fn default_model_id() -> String {
    "gpt-4-turbo".into()
}
fn default_rate_limit() -> f64 {
    1.0
}
fn default_max_retries() -> u32 {
    3
}
fn default_backoff_ms() -> u64 {
    500
}
fn default_max_failed_prompts() -> usize {
    20
}
fn default_true() -> bool {
    true
}
fn default_annotator() -> Vec<String> {
    vec!["annotate".into()]
}
fn default_timeout_s() -> u64 {
    60
}

/// Collection settings, read from a TOML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerationConfig {
    pub seed_object: String,
    #[serde(default = "default_stage1_count")]
    pub stage1_count: usize,
    /// Prompts per target in stages 2 to 4.
    #[serde(default = "default_per_item_count")]
    pub per_item_count: usize,
    #[serde(default = "default_model_id")]
    pub model_id: String,
    /// Requests per second.
    #[serde(default = "default_rate_limit")]
    pub rate_limit: f64,
    /// Attempts per prompt, including the first.
    #[serde(default = "default_max_retries")]
    pub max_retries: u32,
    /// Wait before the second attempt; doubled for each further attempt.
    #[serde(default = "default_backoff_ms")]
    pub backoff_ms: u64,
    /// The run aborts once this many prompts have failed.
    #[serde(default = "default_max_failed_prompts")]
    pub max_failed_prompts: usize,
    #[serde(default = "default_true")]
    pub stage3_includes_location_objects: bool,
    /// Template file; relative paths resolve against the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub templates: Option<PathBuf>,
    /// Parser adapter command; `--in`, `--out` and `--stage` are appended.
    #[serde(default = "default_annotator")]
    pub annotator_command: Vec<String>,
    #[serde(default = "default_timeout_s")]
    pub request_timeout_s: u64,
}

impl GenerationConfig {
    pub fn new(seed_object: impl Into<String>) -> Self {
        GenerationConfig {
            seed_object: seed_object.into(),
            stage1_count: default_stage1_count(),
            per_item_count: default_per_item_count(),
            model_id: default_model_id(),
            rate_limit: default_rate_limit(),
            max_retries: default_max_retries(),
            backoff_ms: default_backoff_ms(),
            max_failed_prompts: default_max_failed_prompts(),
            stage3_includes_location_objects: true,
            templates: None,
            annotator_command: default_annotator(),
            request_timeout_s: default_timeout_s(),
        }
    }

    pub fn validate(&self) -> Result<(), GenerationError> {
        let bad = |m: &str| Err(GenerationError::Config(m.to_string()));
        if self.seed_object.trim().is_empty() {
            return bad("seed_object must not be empty");
        }
        if self.stage1_count == 0 {
            return bad("stage1_count must be at least 1");
        }
        if self.per_item_count == 0 {
            return bad("per_item_count must be at least 1");
        }
        if self.model_id.trim().is_empty() {
            return bad("model_id must not be empty");
        }
        if !(self.rate_limit > 0.0 && self.rate_limit.is_finite()) {
            return bad("rate_limit must be a positive number");
        }
        if self.max_retries == 0 {
            return bad("max_retries must be at least 1");
        }
        if self.max_failed_prompts == 0 {
            return bad("max_failed_prompts must be at least 1");
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self, GenerationError> {
        let cfg: GenerationConfig =
            toml::from_str(text).map_err(|e| GenerationError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads and validates a config file, resolving `templates` against its
    /// directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, GenerationError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| GenerationError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let mut cfg = Self::parse(&text)?;
        if let (Some(t), Some(dir)) = (&cfg.templates, path.parent()) {
            if t.is_relative() {
                cfg.templates = Some(dir.join(t));
            }
        }
        Ok(cfg)
    }

    pub fn load_templates(&self) -> Result<Templates, GenerationError> {
        match &self.templates {
            Some(p) => Templates::load(p),
            None => Ok(Templates::default()),
        }
    }
}

/// Objects, attributes and location phrases found in parsed sentences.
pub fn discover(stage: Stage, sentences: &[ParsedSentence]) -> Discovery {
    let mut d = Discovery {
        stage,
        ..Discovery::default()
    };
    for s in sentences {
        for e in extract_phrases(s) {
            for n in compose_nodes(&e) {
                match n.id.kind {
                    NodeKind::Object if !n.is_composite() => {
                        d.objects.insert(n.id.label);
                    }
                    NodeKind::Attribute => {
                        d.attributes.insert(n.id.label);
                    }
                    _ => {}
                }
            }
            if let Some(head) = &e.object_head {
                for m in &e.object_modifiers {
                    if matches!(m, AttributePhrase::Prepositional { .. }) {
                        d.locations.insert(modified_object_label(m, head));
                    }
                }
            }
        }
    }
    d
}

/// The result of a collection run.
#[derive(Debug, Clone, Default)]
pub struct Collection {
    /// Accepted sentences in prompt order, duplicates kept.
    pub sentences: Vec<String>,
    /// Parses of the accepted sentences, stage-tagged, same order.
    pub parsed: Vec<ParsedSentence>,
    pub log: GenerationLog,
}

struct Runner<'a> {
    cfg: &'a GenerationConfig,
    templates: &'a Templates,
    client: &'a mut dyn TextGenerator,
    annotator: &'a mut dyn Annotator,
    clock: &'a mut dyn Clock,
    limiter: RateLimiter,
    next_index: usize,
    failed: usize,
    out: Collection,
}

/// Collapses runs of whitespace to single spaces and trims.
fn clean(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

impl Runner<'_> {
    /// One prompt with its retries. Returns the record with `accepted` and
    /// `rejected` still empty.
    fn request(&mut self, stage: Stage, target: &str) -> Result<RequestRecord, GenerationError> {
        let prompt = self.templates.make_prompt(stage, target)?;
        let req = TextGenRequest {
            prompt,
            model_id: self.cfg.model_id.clone(),
        };
        let mut attempts = 0;
        let mut timestamp_us = None;
        let outcome = loop {
            attempts += 1;
            let stamp = self.limiter.acquire(self.clock);
            timestamp_us.get_or_insert(stamp);
            let err = match self.client.generate(&req) {
                Ok(r) if !r.completions.is_empty() => break Ok(r.completions),
                Ok(_) => "no completions".to_string(),
                Err(e) => e.to_string(),
            };
            ::log::debug!("stage {stage} attempt {attempts} for {target:?} failed: {err}");
            if attempts >= self.cfg.max_retries {
                break Err(err);
            }
            let backoff = self
                .cfg
                .backoff_ms
                .saturating_mul(1 << (attempts - 1).min(16));
            self.clock.sleep_us(backoff.saturating_mul(1000));
        };
        let index = self.next_index;
        self.next_index += 1;
        let (responses, error) = match outcome {
            Ok(c) => (c, None),
            Err(e) => (Vec::new(), Some(e)),
        };
        Ok(RequestRecord {
            stage,
            index,
            target: target.to_string(),
            prompt: req.prompt,
            model_id: req.model_id,
            attempts,
            responses,
            accepted: Vec::new(),
            rejected: Vec::new(),
            error,
            timestamp_us: timestamp_us.unwrap_or_default(),
        })
    }

    /// Runs one stage over `targets` and returns the parses it accepted.
    fn stage(
        &mut self,
        stage: Stage,
        targets: &[String],
        repeats: usize,
    ) -> Result<Vec<ParsedSentence>, GenerationError> {
        let mut records = Vec::with_capacity(targets.len() * repeats);
        for target in targets {
            for _ in 0..repeats {
                let record = self.request(stage, target)?;
                let failed = record.error.is_some();
                records.push(record);
                if failed {
                    self.failed += 1;
                    ::log::warn!("stage {stage} prompt for {target:?} failed");
                    if self.failed >= self.cfg.max_failed_prompts {
                        self.out
                            .log
                            .records
                            .extend(records.into_iter().map(LogRecord::Request));
                        return Err(GenerationError::TooManyFailures {
                            failed: self.failed,
                            log: Box::new(std::mem::take(&mut self.out.log)),
                        });
                    }
                }
            }
        }

        // Annotate every non-empty completion of the stage in one batch.
        let texts: Vec<String> = records
            .iter()
            .flat_map(|r| r.responses.iter().map(|t| clean(t)))
            .filter(|t| !t.is_empty())
            .collect();
        let mut annotations = self.annotator.annotate(&texts, &stage.tag())?.into_iter();
        if annotations.len() != texts.len() {
            return Err(GenerationError::Annotator(format!(
                "expected {} annotations, got {}",
                texts.len(),
                annotations.len()
            )));
        }

        let mut accepted_parses = Vec::new();
        for mut record in records {
            for raw in &record.responses {
                let text = clean(raw);
                if text.is_empty() {
                    record.rejected.push(Rejection {
                        text,
                        reason: RejectReason::Empty.as_str().into(),
                    });
                    continue;
                }
                let parses = annotations.next().expect("one annotation per text");
                match check_acceptance(&parses) {
                    Ok(()) => {
                        let mut s = parses.into_iter().next().expect("accepted has one parse");
                        s.id = format!("g{}-{}", record.index, record.accepted.len());
                        s.stage = stage.tag();
                        accepted_parses.push(s);
                        record.accepted.push(text);
                    }
                    Err(reason) => record.rejected.push(Rejection {
                        text,
                        reason: reason.as_str().into(),
                    }),
                }
            }
            self.out.sentences.extend(record.accepted.iter().cloned());
            self.out.log.push(LogRecord::Request(record));
        }
        self.out.parsed.extend(accepted_parses.iter().cloned());
        Ok(accepted_parses)
    }
}

/// Runs the four-stage protocol.
pub fn run_collection(
    cfg: &GenerationConfig,
    templates: &Templates,
    client: &mut dyn TextGenerator,
    annotator: &mut dyn Annotator,
    clock: &mut dyn Clock,
) -> Result<Collection, GenerationError> {
    cfg.validate()?;
    let seed = cfg.seed_object.trim().to_string();
    let mut runner = Runner {
        cfg,
        templates,
        client,
        annotator,
        clock,
        limiter: RateLimiter::new(cfg.rate_limit),
        next_index: 0,
        failed: 0,
        out: Collection::default(),
    };
    runner.out.log.push(LogRecord::Run {
        config: serde_json::to_value(cfg).expect("config serializes"),
        templates: templates.clone(),
    });

    let record = |runner: &mut Runner, d: Discovery| {
        runner.out.log.push(LogRecord::Discovery(d.clone()));
        d
    };

    let s1 = runner.stage(Stage::Seed, std::slice::from_ref(&seed), cfg.stage1_count)?;
    let d1 = record(&mut runner, discover(Stage::Seed, &s1));

    let objects: Vec<String> = d1.objects.iter().filter(|o| **o != seed).cloned().collect();
    let s2 = runner.stage(Stage::Location, &objects, cfg.per_item_count)?;
    let d2 = record(&mut runner, discover(Stage::Location, &s2));

    let mut phrases: BTreeSet<String> = objects.iter().cloned().collect();
    if cfg.stage3_includes_location_objects {
        phrases.extend(d2.locations.iter().cloned());
    }
    let phrases: Vec<String> = phrases.into_iter().collect();
    let s3 = runner.stage(Stage::Action, &phrases, cfg.per_item_count)?;
    let d3 = record(&mut runner, discover(Stage::Action, &s3));

    let attributes: BTreeSet<String> = [&d1, &d2, &d3]
        .iter()
        .flat_map(|d| d.attributes.iter().cloned())
        .collect();
    let attributes: Vec<String> = attributes.into_iter().collect();
    let s4 = runner.stage(Stage::Attribute, &attributes, cfg.per_item_count)?;
    record(&mut runner, discover(Stage::Attribute, &s4));

    Ok(runner.out)
}

/// Expected number of requests given the stage target sets recorded in a
/// log's discoveries: `stage1_count + per_item_count * (|objects without
/// seed| + |stage-3 phrases| + |attributes|)`.
pub fn expected_requests(cfg: &GenerationConfig, log: &GenerationLog) -> Option<usize> {
    let ds: Vec<&Discovery> = log.discoveries().collect();
    let [d1, d2, d3, ..] = ds.as_slice() else {
        return None;
    };
    let seed = cfg.seed_object.trim();
    let objects: BTreeSet<&String> = d1.objects.iter().filter(|o| o.as_str() != seed).collect();
    let mut phrases: BTreeSet<&String> = objects.clone();
    if cfg.stage3_includes_location_objects {
        phrases.extend(d2.locations.iter());
    }
    let attributes: BTreeSet<&String> = [d1, d2, d3]
        .iter()
        .flat_map(|d| d.attributes.iter())
        .collect();
    Some(cfg.stage1_count + cfg.per_item_count * (objects.len() + phrases.len() + attributes.len()))
}
