//! Graph construction from parsed sentences.
//!
//! Each sentence is decomposed into [`Extraction`]s, each extraction into
//! nodes and edge increments (see [`compose`]). Increments are collected
//! per sentence, so an edge's count is the number of sentences that
//! composed it, regardless of how many rules or extractions produced it
//! within one sentence.

pub mod compose;
pub mod extract;

use std::collections::BTreeSet;

use rayon::prelude::*;

pub use compose::{compose_edges, compose_nodes, Node};
pub use extract::{extract_phrases, AttributePhrase, Extraction};

use crate::corpus::ParsedSentence;
use crate::graph::{GraphError, KnowledgeGraph, NodeRef};

/// Nodes and deduplicated edge increments contributed by one sentence.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SentenceContribution {
    pub nodes: Vec<Node>,
    pub edges: BTreeSet<(NodeRef, NodeRef)>,
}

pub fn sentence_contribution(s: &ParsedSentence) -> SentenceContribution {
    let mut out = SentenceContribution::default();
    for e in extract_phrases(s) {
        let nodes = compose_nodes(&e);
        out.edges.extend(compose_edges(&e, &nodes));
        out.nodes.extend(nodes);
    }
    out.nodes.sort();
    out.nodes.dedup();
    out
}

#[derive(Debug, Default)]
pub struct GraphBuilder {
    graph: KnowledgeGraph,
    sentences: usize,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_sentence(&mut self, s: &ParsedSentence) -> Result<(), GraphError> {
        let contribution = sentence_contribution(s);
        for n in contribution.nodes {
            self.graph.insert_node(n.id, n.constituents)?;
        }
        for (src, dst) in &contribution.edges {
            self.graph.add_edge(src, dst, 1)?;
        }
        self.sentences += 1;
        Ok(())
    }

    pub fn sentences(&self) -> usize {
        self.sentences
    }

    pub fn finish(self) -> KnowledgeGraph {
        self.graph
    }
}

/// Folds a sentence stream into a graph.
pub fn build_graph<'a, I>(sentences: I) -> Result<KnowledgeGraph, GraphError>
where
    I: IntoIterator<Item = &'a ParsedSentence>,
{
    let mut b = GraphBuilder::new();
    for s in sentences {
        b.add_sentence(s)?;
    }
    Ok(b.finish())
}

/// Builds on `jobs` worker threads: each worker folds a contiguous chunk,
/// then the partial graphs are merged. The result is identical to
/// [`build_graph`] for any `jobs`.
pub fn build_graph_parallel(
    sentences: &[ParsedSentence],
    jobs: usize,
) -> Result<KnowledgeGraph, GraphError> {
    let jobs = jobs.max(1);
    if jobs == 1 || sentences.len() < 2 {
        return build_graph(sentences);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| GraphError::Io(e.to_string()))?;
    let chunk = sentences.len().div_ceil(jobs);
    pool.install(|| {
        sentences
            .par_chunks(chunk)
            .map(build_graph)
            .try_reduce(KnowledgeGraph::new, |a, b| a.merge(b))
    })
}
