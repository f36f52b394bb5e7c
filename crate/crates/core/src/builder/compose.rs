//! Node and edge composition for one extraction.
//!
//! Nodes:
//!
//! - (a) an Object node for the bare object head;
//! - (b) per object modifier, an Attribute node for the phrase and a
//!   composite Object node built from the attribute and the bare object;
//! - (c) per verb modifier, an Attribute node (composed from its
//!   complement's Object node when prepositional);
//! - (d) an objectless Action node for the verb;
//! - (e) per object node from (a)/(b), a composite Action node built from
//!   the objectless action and that object.
//!
//! Edges, each emitted at most once per extraction:
//!
//! - R1: constituent -> composite, for every composite node;
//! - R2: object node -> the composite action taking it as object;
//! - R3: verb-modifying attribute -> the objectless action of its verb;
//! - R4: objectless action -> each composite action of the same verb.

use std::collections::{BTreeMap, BTreeSet};

use super::extract::{AttributePhrase, Extraction};
use crate::graph::NodeRef;

/// A node together with the nodes it was composed from. Atomic nodes have
/// no constituents.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Node {
    pub id: NodeRef,
    pub constituents: BTreeSet<NodeRef>,
}

impl Node {
    fn atomic(id: NodeRef) -> Self {
        Node {
            id,
            constituents: BTreeSet::new(),
        }
    }

    fn composite(id: NodeRef, parts: impl IntoIterator<Item = NodeRef>) -> Self {
        Node {
            id,
            constituents: parts.into_iter().collect(),
        }
    }

    pub fn is_composite(&self) -> bool {
        !self.constituents.is_empty()
    }
}

/// Label of the composite object formed by `modifier` and `head`.
/// Adjectives precede the noun ("red apple"); prepositional phrases follow
/// it ("apple on table").
pub fn modified_object_label(modifier: &AttributePhrase, head: &str) -> String {
    match modifier {
        AttributePhrase::Adjectival { .. } => format!("{} {head}", modifier.label()),
        AttributePhrase::Prepositional { .. } => format!("{head} {}", modifier.label()),
    }
}

pub fn action_label(verb: &str, object: &str) -> String {
    format!("{verb} {object}")
}

/// Nodes for one attribute phrase: the attribute itself plus whatever it
/// is composed from (the complement object, or the bare adjective).
fn attribute_nodes(phrase: &AttributePhrase, out: &mut Vec<Node>) -> NodeRef {
    let id = NodeRef::attribute(phrase.label());
    match phrase {
        AttributePhrase::Prepositional { complement, .. } => {
            let complement = NodeRef::object(complement.as_str());
            out.push(Node::atomic(complement.clone()));
            out.push(Node::composite(id.clone(), [complement]));
        }
        AttributePhrase::Adjectival { adverbs, adjective } if !adverbs.is_empty() => {
            let bare = NodeRef::attribute(adjective.as_str());
            out.push(Node::atomic(bare.clone()));
            out.push(Node::composite(id.clone(), [bare]));
        }
        AttributePhrase::Adjectival { .. } => out.push(Node::atomic(id.clone())),
    }
    id
}

/// Object nodes of an extraction, bare head first.
fn object_nodes(e: &Extraction, out: &mut Vec<Node>) -> Vec<NodeRef> {
    let Some(head) = &e.object_head else {
        return Vec::new();
    };
    let bare = NodeRef::object(head.as_str());
    out.push(Node::atomic(bare.clone()));
    let mut objects = vec![bare.clone()];
    for m in &e.object_modifiers {
        let attr = attribute_nodes(m, out);
        let modified = NodeRef::object(modified_object_label(m, head));
        out.push(Node::composite(modified.clone(), [attr, bare.clone()]));
        objects.push(modified);
    }
    objects
}

/// Composes the node set of an extraction, sorted and deduplicated.
pub fn compose_nodes(e: &Extraction) -> Vec<Node> {
    let mut out = Vec::new();
    let objects = object_nodes(e, &mut out);
    if let Some(verb) = &e.verb {
        for m in &e.verb_modifiers {
            attribute_nodes(m, &mut out);
        }
        let action = NodeRef::action(verb.as_str());
        out.push(Node::atomic(action.clone()));
        for object in objects {
            out.push(Node::composite(
                NodeRef::action(action_label(verb, &object.label)),
                [action.clone(), object],
            ));
        }
    }
    dedup(out)
}

fn dedup(nodes: Vec<Node>) -> Vec<Node> {
    let map: BTreeMap<NodeRef, BTreeSet<NodeRef>> =
        nodes.into_iter().map(|n| (n.id, n.constituents)).collect();
    map.into_iter()
        .map(|(id, constituents)| Node { id, constituents })
        .collect()
}

/// Edge increments of an extraction; `nodes` is `compose_nodes(e)`.
pub fn compose_edges(e: &Extraction, nodes: &[Node]) -> BTreeSet<(NodeRef, NodeRef)> {
    let mut edges = BTreeSet::new();
    // R1
    for n in nodes.iter().filter(|n| n.is_composite()) {
        for part in &n.constituents {
            edges.insert((part.clone(), n.id.clone()));
        }
    }
    let Some(verb) = &e.verb else {
        return edges;
    };
    let action = NodeRef::action(verb.as_str());
    let mut scratch = Vec::new();
    // R2 and R4
    for object in object_nodes(e, &mut scratch) {
        let composite = NodeRef::action(action_label(verb, &object.label));
        edges.insert((object, composite.clone()));
        edges.insert((action.clone(), composite));
    }
    // R3
    for m in &e.verb_modifiers {
        edges.insert((NodeRef::attribute(m.label()), action.clone()));
    }
    edges
}
