//! Line-delimited graph file format.
//!
//! ```text
//! affordgraph v1 {"corpus_ids":[...],"build_timestamp":null,"builder_version":"..."}
//! N <kind> <label> <constituent kind:label, joined by |>
//! E <src kind>:<src label> <dst kind>:<dst label> <count>
//! ```
//!
//! Fields of `N` and `E` lines are separated by single tabs.
//!
//! Node lines come first in `(kind, label)` order, then edge lines in
//! `(src, dst)` order, so equal graphs always serialize to equal bytes.

use std::collections::BTreeSet;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use super::{GraphError, GraphMeta, KnowledgeGraph, NodeKind, NodeRef};

pub const FORMAT_MAGIC: &str = "affordgraph v1";

pub fn write_to<W: Write>(g: &KnowledgeGraph, mut out: W) -> Result<(), GraphError> {
    g.validate()?;
    let io = |e: std::io::Error| GraphError::Io(e.to_string());
    let meta = serde_json::to_string(g.meta()).map_err(|e| GraphError::Io(e.to_string()))?;
    writeln!(out, "{FORMAT_MAGIC} {meta}").map_err(io)?;
    for (node, parts) in g.nodes() {
        let parts: Vec<String> = parts.iter().map(NodeRef::to_string).collect();
        writeln!(out, "N\t{}\t{}\t{}", node.kind, node.label, parts.join("|")).map_err(io)?;
    }
    for (src, dst, count) in g.edges() {
        writeln!(out, "E\t{src}\t{dst}\t{count}").map_err(io)?;
    }
    out.flush().map_err(io)
}

pub fn to_canonical_string(g: &KnowledgeGraph) -> Result<String, GraphError> {
    let mut buf = Vec::new();
    write_to(g, &mut buf)?;
    Ok(String::from_utf8(buf).expect("graph format is UTF-8"))
}

/// Writes the graph; the graph is validated before anything touches disk.
pub fn save(g: &KnowledgeGraph, path: impl AsRef<Path>) -> Result<(), GraphError> {
    let text = to_canonical_string(g)?;
    let path = path.as_ref();
    fs::write(path, text).map_err(|e| GraphError::Io(format!("{}: {e}", path.display())))
}

pub fn load(path: impl AsRef<Path>) -> Result<KnowledgeGraph, GraphError> {
    let path = path.as_ref();
    let file =
        fs::File::open(path).map_err(|e| GraphError::Io(format!("{}: {e}", path.display())))?;
    read_from(BufReader::new(file))
}

pub fn read_from<R: BufRead>(reader: R) -> Result<KnowledgeGraph, GraphError> {
    let fmt_err = |line: usize, message: String| GraphError::Format { line, message };
    let mut g = KnowledgeGraph::new();
    let mut edges = Vec::new();
    let mut node_lines = Vec::new();
    let mut seen_header = false;

    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| GraphError::Io(e.to_string()))?;
        if !seen_header {
            let meta = line
                .strip_prefix(FORMAT_MAGIC)
                .and_then(|rest| rest.strip_prefix(' '))
                .ok_or_else(|| {
                    fmt_err(line_no, format!("expected `{FORMAT_MAGIC} <meta>` header"))
                })?;
            *g.meta_mut() = serde_json::from_str::<GraphMeta>(meta)
                .map_err(|e| fmt_err(line_no, format!("bad meta: {e}")))?;
            seen_header = true;
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        match cols.as_slice() {
            ["N", kind, label, parts] => {
                let kind: NodeKind = kind
                    .parse()
                    .map_err(|e: GraphError| fmt_err(line_no, e.to_string()))?;
                let node = NodeRef::new(kind, *label);
                if g.contains(&node) {
                    return Err(fmt_err(line_no, format!("duplicate node {node}")));
                }
                let parts = if parts.is_empty() {
                    BTreeSet::new()
                } else {
                    parts
                        .split('|')
                        .map(str::parse)
                        .collect::<Result<BTreeSet<NodeRef>, _>>()
                        .map_err(|e| fmt_err(line_no, e.to_string()))?
                };
                g.insert_node(node.clone(), parts)
                    .map_err(|e| fmt_err(line_no, e.to_string()))?;
                node_lines.push((node, line_no));
            }
            ["E", src, dst, count] => {
                let src: NodeRef = src
                    .parse()
                    .map_err(|e: GraphError| fmt_err(line_no, e.to_string()))?;
                let dst: NodeRef = dst
                    .parse()
                    .map_err(|e: GraphError| fmt_err(line_no, e.to_string()))?;
                let count: u64 = count
                    .parse()
                    .map_err(|_| fmt_err(line_no, format!("bad count {count:?}")))?;
                edges.push((src, dst, count, line_no));
            }
            _ => {
                return Err(fmt_err(
                    line_no,
                    "expected a node (N) or edge (E) record".into(),
                ))
            }
        }
    }
    if !seen_header {
        return Err(fmt_err(1, "missing header".into()));
    }

    for (node, line_no) in node_lines {
        for part in g.constituents(&node).into_iter().flatten() {
            if !g.contains(part) {
                return Err(fmt_err(
                    line_no,
                    format!("constituent {part} of {node} is not in the graph"),
                ));
            }
        }
    }
    let mut seen = BTreeSet::new();
    for (src, dst, count, line_no) in edges {
        if !seen.insert((src.clone(), dst.clone())) {
            return Err(fmt_err(line_no, format!("duplicate edge {src} -> {dst}")));
        }
        g.add_edge(&src, &dst, count)
            .map_err(|e| fmt_err(line_no, e.to_string()))?;
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_graph_is_header_only() {
        let text = to_canonical_string(&KnowledgeGraph::new()).unwrap();
        assert_eq!(text.lines().count(), 1);
        assert!(text.starts_with("affordgraph v1 {"));
        assert_eq!(read_from(text.as_bytes()).unwrap(), KnowledgeGraph::new());
    }

    #[test]
    fn two_nodes_one_edge() {
        let mut g = KnowledgeGraph::new();
        g.insert_node(NodeRef::object("apple"), BTreeSet::new())
            .unwrap();
        g.insert_node(NodeRef::action("eat"), BTreeSet::new())
            .unwrap();
        g.add_edge(&NodeRef::object("apple"), &NodeRef::action("eat"), 2)
            .unwrap();
        let text = to_canonical_string(&g).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[1], "N\tobject\tapple\t");
        assert_eq!(lines[2], "N\taction\teat\t");
        assert_eq!(lines[3], "E\tobject:apple\taction:eat\t2");
        let back = read_from(text.as_bytes()).unwrap();
        assert_eq!(back, g);
        assert_eq!(to_canonical_string(&back).unwrap(), text);
    }

    fn header() -> String {
        format!(
            "{FORMAT_MAGIC} {}\n",
            serde_json::to_string(&GraphMeta::default()).unwrap()
        )
    }

    #[test]
    fn dangling_edge_names_its_line() {
        let text = format!(
            "{}N\tobject\tapple\t\nE\tobject:apple\taction:eat\t1\n",
            header()
        );
        let err = read_from(text.as_bytes()).unwrap_err();
        assert!(matches!(err, GraphError::Format { line: 3, .. }), "{err}");
        assert!(err.to_string().contains("action:eat"));
    }

    #[test]
    fn duplicate_node_and_bad_lines() {
        let dup = format!("{}N\tobject\tapple\t\nN\tobject\tapple\t\n", header());
        assert!(matches!(
            read_from(dup.as_bytes()),
            Err(GraphError::Format { line: 3, .. })
        ));
        let junk = format!("{}X\tfoo\n", header());
        assert!(matches!(
            read_from(junk.as_bytes()),
            Err(GraphError::Format { line: 2, .. })
        ));
        assert!(matches!(
            read_from("not a graph\n".as_bytes()),
            Err(GraphError::Format { line: 1, .. })
        ));
        assert!(read_from("".as_bytes()).is_err());
        let zero = format!(
            "{}N\tobject\ta\t\nN\tobject\tb\t\nE\tobject:a\tobject:b\t0\n",
            header()
        );
        assert!(matches!(
            read_from(zero.as_bytes()),
            Err(GraphError::Format { line: 4, .. })
        ));
    }

    #[test]
    fn unresolved_constituent_is_rejected() {
        let text = format!(
            "{}N\tobject\tred apple\tattribute:red|object:apple\n",
            header()
        );
        assert!(matches!(
            read_from(text.as_bytes()),
            Err(GraphError::Format { line: 2, .. })
        ));
    }

    #[test]
    fn save_refuses_invalid_graph() {
        let mut g = KnowledgeGraph::new();
        g.insert_node(
            NodeRef::object("red apple"),
            [NodeRef::attribute("red")].into_iter().collect(),
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.ag");
        assert!(save(&g, &path).is_err());
        assert!(!path.exists());
    }
}
