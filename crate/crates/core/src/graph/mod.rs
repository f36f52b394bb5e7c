//! The affordance knowledge graph value.
//!
//! Nodes are identified by `(kind, label)`; labels are normalized lemma
//! phrases, so identity is stable across machines and builds. Composite
//! nodes list the nodes they were composed from as constituents. Edges are
//! directed and carry the number of sentences that composed them.
//!
//! All collections are ordered maps so that iteration, serialization and
//! merging are deterministic.

mod io;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use io::{load, read_from, save, to_canonical_string, write_to, FORMAT_MAGIC};

pub const BUILDER_VERSION: &str = concat!("affordnet-", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Object,
    Attribute,
    Action,
}

impl NodeKind {
    pub const ALL: [NodeKind; 3] = [NodeKind::Object, NodeKind::Attribute, NodeKind::Action];

    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::Object => "object",
            NodeKind::Attribute => "attribute",
            NodeKind::Action => "action",
        }
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NodeKind {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "object" => Ok(NodeKind::Object),
            "attribute" => Ok(NodeKind::Attribute),
            "action" => Ok(NodeKind::Action),
            other => Err(GraphError::UnknownKind(other.to_string())),
        }
    }
}

/// Node identity: kind plus normalized label. Orders by kind, then label.
/// Serializes as the string `kind:label`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct NodeRef {
    pub kind: NodeKind,
    pub label: String,
}

impl NodeRef {
    pub fn new(kind: NodeKind, label: impl Into<String>) -> Self {
        NodeRef {
            kind,
            label: label.into(),
        }
    }

    pub fn object(label: impl Into<String>) -> Self {
        NodeRef::new(NodeKind::Object, label)
    }

    pub fn attribute(label: impl Into<String>) -> Self {
        NodeRef::new(NodeKind::Attribute, label)
    }

    pub fn action(label: impl Into<String>) -> Self {
        NodeRef::new(NodeKind::Action, label)
    }
}

/// `kind:label`, the form used in edge lines and on the command line.
impl fmt::Display for NodeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.kind, self.label)
    }
}

impl FromStr for NodeRef {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, label) = s
            .split_once(':')
            .ok_or_else(|| GraphError::BadNodeRef(s.to_string()))?;
        let node = NodeRef::new(kind.parse()?, label);
        check_label(&node)?;
        Ok(node)
    }
}

impl From<NodeRef> for String {
    fn from(n: NodeRef) -> String {
        n.to_string()
    }
}

impl TryFrom<String> for NodeRef {
    type Error = GraphError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

/// Labels must be nonempty and free of the characters the line format
/// reserves.
fn check_label(node: &NodeRef) -> Result<(), GraphError> {
    if node.label.is_empty() || node.label.contains(['\t', '\n', '\r', '|']) {
        return Err(GraphError::InvalidLabel(node.clone()));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphMeta {
    /// Identifiers of the corpora the graph was built from, sorted.
    pub corpus_ids: BTreeSet<String>,
    /// Seconds since the Unix epoch; left unset for reproducible builds.
    pub build_timestamp: Option<u64>,
    pub builder_version: String,
}

impl Default for GraphMeta {
    fn default() -> Self {
        GraphMeta {
            corpus_ids: BTreeSet::new(),
            build_timestamp: None,
            builder_version: BUILDER_VERSION.to_string(),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("unknown node kind {0:?}")]
    UnknownKind(String),
    #[error("malformed node reference {0:?} (expected kind:label)")]
    BadNodeRef(String),
    #[error("invalid label for {0}")]
    InvalidLabel(NodeRef),
    #[error("{0} lists itself as a constituent")]
    SelfConstituent(NodeRef),
    #[error("constituent {constituent} of {node} is not in the graph")]
    UnresolvedConstituent { node: NodeRef, constituent: NodeRef },
    #[error("conflicting constituents for {0}")]
    ConstituentConflict(NodeRef),
    #[error("edge endpoint {0} is not in the graph")]
    MissingEndpoint(NodeRef),
    #[error("self loop on {0}")]
    SelfLoop(NodeRef),
    #[error("edge {src} -> {dst} has count 0")]
    ZeroCount { src: NodeRef, dst: NodeRef },
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("{0}")]
    Io(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct KnowledgeGraph {
    nodes: BTreeMap<NodeRef, BTreeSet<NodeRef>>,
    edges: BTreeMap<(NodeRef, NodeRef), u64>,
    meta: GraphMeta,
}

impl KnowledgeGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn meta(&self) -> &GraphMeta {
        &self.meta
    }

    pub fn meta_mut(&mut self) -> &mut GraphMeta {
        &mut self.meta
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn contains(&self, node: &NodeRef) -> bool {
        self.nodes.contains_key(node)
    }

    /// Nodes in canonical `(kind, label)` order with their constituents.
    pub fn nodes(&self) -> impl Iterator<Item = (&NodeRef, &BTreeSet<NodeRef>)> {
        self.nodes.iter()
    }

    /// Edges in canonical `(src, dst)` order with their counts.
    pub fn edges(&self) -> impl Iterator<Item = (&NodeRef, &NodeRef, u64)> {
        self.edges.iter().map(|((s, d), &c)| (s, d, c))
    }

    pub fn constituents(&self, node: &NodeRef) -> Option<&BTreeSet<NodeRef>> {
        self.nodes.get(node)
    }

    pub fn count(&self, src: &NodeRef, dst: &NodeRef) -> Option<u64> {
        self.edges.get(&(src.clone(), dst.clone())).copied()
    }

    /// Inserts a node, or checks that an existing node with the same
    /// identity has the same constituents.
    ///
    /// Constituents are not required to exist yet; [`validate`](Self::validate)
    /// checks that they resolve.
    pub fn insert_node(
        &mut self,
        node: NodeRef,
        constituents: BTreeSet<NodeRef>,
    ) -> Result<(), GraphError> {
        check_label(&node)?;
        if constituents.contains(&node) {
            return Err(GraphError::SelfConstituent(node));
        }
        match self.nodes.get(&node) {
            Some(existing) if *existing != constituents => {
                Err(GraphError::ConstituentConflict(node))
            }
            Some(_) => Ok(()),
            None => {
                self.nodes.insert(node, constituents);
                Ok(())
            }
        }
    }

    /// Adds `count` to the edge `src -> dst`, creating it if needed. Both
    /// endpoints must already be nodes.
    pub fn add_edge(&mut self, src: &NodeRef, dst: &NodeRef, count: u64) -> Result<(), GraphError> {
        if src == dst {
            return Err(GraphError::SelfLoop(src.clone()));
        }
        if count == 0 {
            return Err(GraphError::ZeroCount {
                src: src.clone(),
                dst: dst.clone(),
            });
        }
        for end in [src, dst] {
            if !self.nodes.contains_key(end) {
                return Err(GraphError::MissingEndpoint(end.clone()));
            }
        }
        *self.edges.entry((src.clone(), dst.clone())).or_insert(0) += count;
        Ok(())
    }

    /// Checks every invariant: labels, endpoints, counts, constituents.
    pub fn validate(&self) -> Result<(), GraphError> {
        for (node, parts) in &self.nodes {
            check_label(node)?;
            if parts.contains(node) {
                return Err(GraphError::SelfConstituent(node.clone()));
            }
            for part in parts {
                if !self.nodes.contains_key(part) {
                    return Err(GraphError::UnresolvedConstituent {
                        node: node.clone(),
                        constituent: part.clone(),
                    });
                }
            }
        }
        for ((src, dst), &count) in &self.edges {
            if src == dst {
                return Err(GraphError::SelfLoop(src.clone()));
            }
            if count == 0 {
                return Err(GraphError::ZeroCount {
                    src: src.clone(),
                    dst: dst.clone(),
                });
            }
            for end in [src, dst] {
                if !self.nodes.contains_key(end) {
                    return Err(GraphError::MissingEndpoint(end.clone()));
                }
            }
        }
        Ok(())
    }

    /// Merges `other` into `self`: node union by identity, edge counts
    /// summed, corpus ids unioned.
    ///
    /// Fails when the same identity carries different constituents in the
    /// two graphs, which means they were built by incompatible builders.
    pub fn merge(mut self, other: KnowledgeGraph) -> Result<KnowledgeGraph, GraphError> {
        for (node, parts) in &other.nodes {
            if let Some(existing) = self.nodes.get(node) {
                if existing != parts {
                    return Err(GraphError::ConstituentConflict(node.clone()));
                }
            }
        }
        for (node, parts) in other.nodes {
            self.nodes.entry(node).or_insert(parts);
        }
        for (key, count) in other.edges {
            *self.edges.entry(key).or_insert(0) += count;
        }
        self.meta.corpus_ids.extend(other.meta.corpus_ids);
        self.meta.build_timestamp = self.meta.build_timestamp.max(other.meta.build_timestamp);
        if other.meta.builder_version > self.meta.builder_version {
            self.meta.builder_version = other.meta.builder_version;
        }
        Ok(self)
    }

    pub fn stats(&self) -> GraphStats {
        let mut stats = GraphStats::default();
        for node in self.nodes.keys() {
            match node.kind {
                NodeKind::Object => stats.objects += 1,
                NodeKind::Attribute => stats.attributes += 1,
                NodeKind::Action => stats.actions += 1,
            }
        }
        stats.edges = self.edges.len();
        stats.max_count = self.edges.values().copied().max().unwrap_or(0);
        stats.total_count = self.edges.values().sum();

        let mut degree: BTreeMap<&NodeRef, usize> = self.nodes.keys().map(|n| (n, 0)).collect();
        for (src, dst) in self.edges.keys() {
            *degree.entry(src).or_default() += 1;
            *degree.entry(dst).or_default() += 1;
        }
        for d in degree.into_values() {
            *stats.degree_histogram.entry(d).or_default() += 1;
        }
        stats
    }
}

/// Summary counts. `degree_histogram` maps total (in + out) degree to the
/// number of nodes with that degree.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct GraphStats {
    pub objects: usize,
    pub attributes: usize,
    pub actions: usize,
    pub edges: usize,
    pub max_count: u64,
    pub total_count: u64,
    pub degree_histogram: BTreeMap<usize, usize>,
}

impl GraphStats {
    pub fn nodes(&self) -> usize {
        self.objects + self.attributes + self.actions
    }
}
