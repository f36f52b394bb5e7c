//! Affordance knowledge graph engine.
//!
//! Sentences generated in a first-person frame ("I slice the apple with a
//! knife") are dependency-parsed, decomposed into object, attribute and
//! action phrases, and folded into a directed graph whose edges count how
//! many sentences composed them. An edge composed `n` times has length
//! `decay^n`; the affordance of an action for an observed object or
//! attribute is the shortest-path length between them, or a fixed penalty
//! when the action is unreachable. Lower values mean stronger recall.
//!
//! The crate is organised along the pipeline:
//!
//! - [`corpus`]: parsed-sentence model, CoNLL-U and depjson readers
//! - [`builder`]: phrase extraction and node/edge composition
//! - [`graph`]: the [`KnowledgeGraph`] value, persistence, merge and stats
//! - [`engine`]: edge weights, affordance values and ranked queries
//! - [`generation`]: staged prompting against a text-generation endpoint
//! - [`eval`]: coverage and rank-distance metrics against human responses

pub mod builder;
pub mod corpus;
pub mod engine;
pub mod eval;
pub mod generation;
pub mod graph;

pub use builder::{build_graph, build_graph_parallel, GraphBuilder};
pub use corpus::{CorpusFormat, ErrorPolicy, ParsedSentence, Pos, Token};
pub use engine::{AffordanceResult, Observation, QueryConfig};
pub use graph::{KnowledgeGraph, NodeKind, NodeRef};
