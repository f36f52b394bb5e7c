#![allow(dead_code)]

use std::path::PathBuf;

use affordnet::corpus::{load_corpus, CorpusFormat, ErrorPolicy};
use affordnet::{build_graph, KnowledgeGraph, ParsedSentence, Pos, Token};

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(rel)
}

pub fn themes() -> Vec<ParsedSentence> {
    load_corpus(
        fixture("themes.conllu"),
        CorpusFormat::Conllu,
        ErrorPolicy::Abort,
    )
    .expect("themes corpus loads")
    .sentences
}

pub fn themes_graph() -> KnowledgeGraph {
    build_graph(&themes()).expect("themes graph builds")
}

fn tok(index: usize, word: &str, pos: Pos, head: usize, rel: &str) -> Token {
    Token {
        index,
        surface: word.to_string(),
        lemma: word.to_lowercase(),
        pos,
        head,
        relation: rel.to_string(),
    }
}

/// A small first-person sentence shape used by generated tests:
/// `I <verb> the [<adj>] <obj> [<prep> the <comp>] .`
#[derive(Debug, Clone)]
pub struct Shape {
    pub verb: String,
    pub adjective: Option<String>,
    pub object: String,
    pub pp: Option<(String, String)>,
}

impl Shape {
    pub fn parse(&self, id: &str) -> ParsedSentence {
        let mut t = vec![
            tok(1, "I", Pos::Other, 2, "nsubj"),
            tok(2, &self.verb, Pos::Verb, 0, "root"),
        ];
        let det = t.len() + 1;
        let obj = det + 1 + usize::from(self.adjective.is_some());
        t.push(tok(det, "the", Pos::Other, obj, "det"));
        if let Some(a) = &self.adjective {
            t.push(tok(det + 1, a, Pos::Adjective, obj, "amod"));
        }
        t.push(tok(obj, &self.object, Pos::Noun, 2, "obj"));
        if let Some((p, c)) = &self.pp {
            let comp = obj + 3;
            t.push(tok(obj + 1, p, Pos::Preposition, comp, "case"));
            t.push(tok(obj + 2, "the", Pos::Other, comp, "det"));
            t.push(tok(comp, c, Pos::Noun, 2, "obl"));
        }
        let end = t.len() + 1;
        t.push(tok(end, ".", Pos::Other, 2, "punct"));
        ParsedSentence {
            id: id.to_string(),
            tokens: t,
            stage: "external".to_string(),
        }
    }
}

pub mod strategies {
    use super::Shape;
    use proptest::prelude::*;

    const VERBS: &[&str] = &["eat", "cut", "wash", "buy", "hold"];
    const ADJS: &[&str] = &["red", "sweet", "ripe"];
    const OBJS: &[&str] = &["apple", "pear", "knife", "cup"];
    const PREPS: &[&str] = &["with", "on", "in", "at"];
    const COMPS: &[&str] = &["table", "store", "knife", "friend"];

    fn pick(words: &'static [&'static str]) -> impl Strategy<Value = String> {
        proptest::sample::select(words).prop_map(str::to_string)
    }

    pub fn shape() -> impl Strategy<Value = Shape> {
        (
            pick(VERBS),
            proptest::option::of(pick(ADJS)),
            pick(OBJS),
            proptest::option::of((pick(PREPS), pick(COMPS))),
        )
            .prop_map(|(verb, adjective, object, pp)| Shape {
                verb,
                adjective,
                object,
                pp,
            })
    }

    pub fn corpus(max: usize) -> impl Strategy<Value = Vec<Shape>> {
        proptest::collection::vec(shape(), 0..max)
    }
}

pub fn parse_all(shapes: &[Shape]) -> Vec<ParsedSentence> {
    shapes
        .iter()
        .enumerate()
        .map(|(i, s)| s.parse(&format!("s{i}")))
        .collect()
}

pub mod random {
    use std::collections::{BTreeMap, BTreeSet};

    use affordnet::{KnowledgeGraph, NodeKind, NodeRef};
    use rand::Rng;

    /// A graph of `n` atomic nodes with kinds drawn at random and each
    /// ordered pair joined with probability `density`, counts in 1..=20.
    pub fn graph<R: Rng>(rng: &mut R, n: usize, density: f64) -> KnowledgeGraph {
        graph_with_counts(rng, n, density, 20)
    }

    pub fn graph_with_counts<R: Rng>(
        rng: &mut R,
        n: usize,
        density: f64,
        max_count: u64,
    ) -> KnowledgeGraph {
        let kinds = [NodeKind::Object, NodeKind::Attribute, NodeKind::Action];
        let nodes: Vec<NodeRef> = (0..n)
            .map(|i| NodeRef::new(kinds[rng.random_range(0..3)], format!("n{i}")))
            .collect();
        let mut g = KnowledgeGraph::new();
        for node in &nodes {
            g.insert_node(node.clone(), BTreeSet::new()).unwrap();
        }
        for s in &nodes {
            for d in &nodes {
                if s != d && rng.random_bool(density) {
                    g.add_edge(s, d, rng.random_range(1..=max_count)).unwrap();
                }
            }
        }
        g
    }

    /// Minimum over all simple paths from `x` to each reachable node, by
    /// exhaustive depth-first enumeration.
    pub fn brute_force_from(g: &KnowledgeGraph, x: &NodeRef, decay: f64) -> BTreeMap<NodeRef, f64> {
        let out: Vec<(&NodeRef, &NodeRef, u64)> = g.edges().collect();
        fn walk(
            out: &[(&NodeRef, &NodeRef, u64)],
            at: &NodeRef,
            decay: f64,
            seen: &mut Vec<NodeRef>,
            acc: f64,
            best: &mut BTreeMap<NodeRef, f64>,
        ) {
            let b = best.entry(at.clone()).or_insert(acc);
            *b = b.min(acc);
            for (s, d, c) in out {
                if *s == at && !seen.contains(d) {
                    seen.push((*d).clone());
                    walk(out, d, decay, seen, acc + decay.powi(*c as i32), best);
                    seen.pop();
                }
            }
        }
        let mut best = BTreeMap::new();
        if g.contains(x) {
            walk(&out, x, decay, &mut vec![x.clone()], 0.0, &mut best);
        }
        best
    }

    /// A random shaped sentence.
    pub fn shape<R: Rng>(rng: &mut R) -> super::Shape {
        const VERBS: &[&str] = &["eat", "cut", "wash", "buy", "hold", "slice"];
        const ADJS: &[&str] = &["red", "sweet", "ripe", "green"];
        const OBJS: &[&str] = &["apple", "pear", "knife", "cup", "bread"];
        const PREPS: &[&str] = &["with", "on", "in", "at", "from"];
        const COMPS: &[&str] = &["table", "store", "knife", "friend", "tree"];
        let mut pick = |w: &[&str]| w[rng.random_range(0..w.len())].to_string();
        let verb = pick(VERBS);
        let object = pick(OBJS);
        let adjective = Some(pick(ADJS));
        let pp = Some((pick(PREPS), pick(COMPS)));
        super::Shape {
            verb,
            adjective: adjective.filter(|_| rng.random_bool(0.4)),
            object,
            pp: pp.filter(|_| rng.random_bool(0.5)),
        }
    }

    /// Minimum over all simple paths from `x` to `a` of the summed
    /// `decay^count` lengths, by exhaustive depth-first search.
    pub fn brute_force(g: &KnowledgeGraph, x: &NodeRef, a: &NodeRef, decay: f64) -> Option<f64> {
        fn dfs(
            g: &KnowledgeGraph,
            at: &NodeRef,
            a: &NodeRef,
            decay: f64,
            seen: &mut Vec<NodeRef>,
            acc: f64,
            best: &mut Option<f64>,
        ) {
            if at == a {
                *best = Some(best.map_or(acc, |b| b.min(acc)));
                return;
            }
            for (s, d, c) in g.edges() {
                if s == at && !seen.contains(d) {
                    seen.push(d.clone());
                    dfs(g, d, a, decay, seen, acc + decay.powi(c as i32), best);
                    seen.pop();
                }
            }
        }
        if !g.contains(x) || !g.contains(a) {
            return None;
        }
        let mut best = None;
        dfs(g, x, a, decay, &mut vec![x.clone()], 0.0, &mut best);
        best
    }
}
