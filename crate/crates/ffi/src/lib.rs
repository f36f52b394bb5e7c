//! C ABI over the affordnet engine.
//!
//! Graphs and query results are opaque heap handles released with their
//! `_free` function. Every fallible call returns an [`AfnStatus`]; on
//! failure [`afn_last_error`] describes the problem for the calling
//! thread. Strings are NUL-terminated UTF-8. Node references use the
//! `kind:label` form, e.g. `"object:apple"`.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use affordnet::corpus::{load_corpus, CorpusFormat, ErrorPolicy};
use affordnet::engine::{self, AffordanceEngine};
use affordnet::graph::{self, GraphError};
use affordnet::{KnowledgeGraph, NodeRef, Observation, QueryConfig};
use libc::{c_char, size_t};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AfnStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// An argument was out of its domain (decay, penalty, node reference).
    InvalidArgument = 3,
    /// A file could not be read or written.
    Io = 4,
    /// A graph or corpus file was malformed.
    Format = 5,
    /// None of the query factors is in the graph.
    NotFound = 6,
    /// An index was past the end of a result set.
    OutOfRange = 7,
    /// The library panicked; the handle arguments may be inconsistent.
    Panic = 99,
}

/// An immutable knowledge graph.
pub struct AfnGraph {
    graph: KnowledgeGraph,
}

struct Row {
    action: CString,
    value: f64,
    per_factor: Vec<(NodeRef, f64)>,
}

/// Ranked results of one query.
pub struct AfnResults {
    rows: Vec<Row>,
    missing: Vec<CString>,
}

/// Query parameters; obtain defaults from [`afn_query_config_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AfnQueryConfig {
    pub decay: f64,
    pub penalty: f64,
    pub threshold: f64,
    pub top_k: size_t,
}

impl From<AfnQueryConfig> for QueryConfig {
    fn from(c: AfnQueryConfig) -> Self {
        QueryConfig {
            decay: c.decay,
            penalty: c.penalty,
            threshold: c.threshold,
            top_k: c.top_k,
        }
    }
}

impl From<QueryConfig> for AfnQueryConfig {
    fn from(c: QueryConfig) -> Self {
        AfnQueryConfig {
            decay: c.decay,
            penalty: c.penalty,
            threshold: c.threshold,
            top_k: c.top_k,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

struct Failure(AfnStatus, String);

type Outcome = Result<(), Failure>;

fn fail<T>(status: AfnStatus, msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure(status, msg.into()))
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs replaced");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

/// Runs `f`, recording any failure or panic for [`afn_last_error`].
fn guard(f: impl FnOnce() -> Outcome) -> AfnStatus {
    set_error("");
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AfnStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "unknown panic".into());
            set_error(&format!("internal error: {msg}"));
            AfnStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return fail(AfnStatus::NullArgument, format!("{name} is null"));
    }
    CStr::from_ptr(p)
        .to_str()
        .or_else(|_| fail(AfnStatus::InvalidUtf8, format!("{name} is not UTF-8")))
}

unsafe fn node_arg(p: *const c_char, name: &str) -> Result<NodeRef, Failure> {
    let s = str_arg(p, name)?;
    s.parse()
        .or_else(|e: GraphError| fail(AfnStatus::InvalidArgument, format!("{name}: {e}")))
}

unsafe fn ref_arg<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref().map_or_else(
        || fail(AfnStatus::NullArgument, format!("{name} is null")),
        Ok,
    )
}

unsafe fn config_arg(p: *const AfnQueryConfig) -> Result<QueryConfig, Failure> {
    let cfg: QueryConfig = p
        .as_ref()
        .map_or_else(QueryConfig::default, |c| (*c).into());
    cfg.validate()
        .or_else(|e| fail(AfnStatus::InvalidArgument, e.to_string()))?;
    Ok(cfg)
}

fn graph_failure(e: GraphError) -> Failure {
    match e {
        GraphError::Io(m) => Failure(AfnStatus::Io, m),
        other => Failure(AfnStatus::Format, other.to_string()),
    }
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Outcome {
    if out.is_null() {
        return fail(AfnStatus::NullArgument, "output pointer is null");
    }
    out.write(value);
    Ok(())
}

/// Message for the last failed call on this thread; empty after a
/// successful call. Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn afn_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version, a static string.
#[no_mangle]
pub extern "C" fn afn_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Loads a graph file written by `afn_graph_save` or the command line.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn afn_graph_load(path: *const c_char, out: *mut *mut AfnGraph) -> AfnStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let graph = graph::load(path).map_err(graph_failure)?;
        write_out(out, Box::into_raw(Box::new(AfnGraph { graph })))
    })
}

/// Builds a graph from `count` corpus files (CoNLL-U or depjson, chosen by
/// extension) on `jobs` threads; malformed records are skipped.
///
/// # Safety
/// `paths` must point to `count` NUL-terminated strings and `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn afn_graph_build(
    paths: *const *const c_char,
    count: size_t,
    jobs: size_t,
    out: *mut *mut AfnGraph,
) -> AfnStatus {
    guard(|| {
        if count == 0 {
            return fail(AfnStatus::InvalidArgument, "no corpus files given");
        }
        if paths.is_null() {
            return fail(AfnStatus::NullArgument, "paths is null");
        }
        let mut sentences = Vec::new();
        let mut ids = Vec::new();
        for i in 0..count {
            let path = PathBuf::from(str_arg(*paths.add(i), "corpus path")?);
            let Some(format) = CorpusFormat::from_path(&path) else {
                return fail(
                    AfnStatus::InvalidArgument,
                    format!("{}: unknown corpus extension", path.display()),
                );
            };
            let loaded = load_corpus(&path, format, ErrorPolicy::Skip)
                .or_else(|e| fail(AfnStatus::Io, format!("{}: {e}", path.display())))?;
            sentences.extend(loaded.sentences);
            ids.push(path.file_name().map_or_else(
                || path.display().to_string(),
                |n| n.to_string_lossy().into_owned(),
            ));
        }
        let mut graph =
            affordnet::build_graph_parallel(&sentences, jobs.max(1)).map_err(graph_failure)?;
        graph.meta_mut().corpus_ids.extend(ids);
        write_out(out, Box::into_raw(Box::new(AfnGraph { graph })))
    })
}

/// Writes the graph in the canonical text format.
///
/// # Safety
/// `graph` must come from this library and `path` be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn afn_graph_save(graph: *const AfnGraph, path: *const c_char) -> AfnStatus {
    guard(|| {
        let g = ref_arg(graph, "graph")?;
        let path = str_arg(path, "path")?;
        graph::save(&g.graph, path).map_err(graph_failure)
    })
}

/// Node and edge counts.
///
/// # Safety
/// `graph` must come from this library; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn afn_graph_size(
    graph: *const AfnGraph,
    nodes: *mut size_t,
    edges: *mut size_t,
) -> AfnStatus {
    guard(|| {
        let g = ref_arg(graph, "graph")?;
        write_out(nodes, g.graph.node_count())?;
        write_out(edges, g.graph.edge_count())
    })
}

/// Releases a graph; null is ignored.
///
/// # Safety
/// `graph` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn afn_graph_free(graph: *mut AfnGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// Default parameters: decay 0.99, penalty 5, threshold 2, top 10.
#[no_mangle]
pub extern "C" fn afn_query_config_default() -> AfnQueryConfig {
    QueryConfig::default().into()
}

/// Length of an edge composed `count` times.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn afn_edge_weight(count: u64, decay: f64, out: *mut f64) -> AfnStatus {
    guard(|| {
        let w = engine::edge_weight(count, decay)
            .or_else(|e| fail(AfnStatus::InvalidArgument, e.to_string()))?;
        write_out(out, w)
    })
}

/// Affordance of `action` for one factor: the shortest-path length capped
/// at the penalty. Unknown nodes give the penalty. A null `config` means
/// the defaults.
///
/// # Safety
/// `graph` must come from this library, strings must be NUL-terminated,
/// `config` null or valid, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn afn_affordance(
    graph: *const AfnGraph,
    factor: *const c_char,
    action: *const c_char,
    config: *const AfnQueryConfig,
    out: *mut f64,
) -> AfnStatus {
    guard(|| {
        let g = ref_arg(graph, "graph")?;
        let x = node_arg(factor, "factor")?;
        let a = node_arg(action, "action")?;
        let cfg = config_arg(config)?;
        write_out(out, engine::affordance(&g.graph, &x, &a, &cfg))
    })
}

/// Ranks actions for the observed factors (objects or attributes).
///
/// # Safety
/// `graph` must come from this library, `factors` must point to `count`
/// NUL-terminated strings, `config` null or valid, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn afn_query(
    graph: *const AfnGraph,
    factors: *const *const c_char,
    count: size_t,
    config: *const AfnQueryConfig,
    out: *mut *mut AfnResults,
) -> AfnStatus {
    guard(|| {
        let g = ref_arg(graph, "graph")?;
        if factors.is_null() {
            return fail(AfnStatus::NullArgument, "factors is null");
        }
        let mut nodes = Vec::with_capacity(count);
        for i in 0..count {
            nodes.push(node_arg(*factors.add(i), "factor")?);
        }
        let cfg = config_arg(config)?;
        let obs =
            Observation::new(nodes).or_else(|e| fail(AfnStatus::InvalidArgument, e.to_string()))?;
        let engine = AffordanceEngine::new(&g.graph, cfg)
            .or_else(|e| fail(AfnStatus::InvalidArgument, e.to_string()))?;
        let outcome = engine.query(&obs).or_else(|e| match e {
            engine::EngineError::AllFactorsMissing(_) => fail(AfnStatus::NotFound, e.to_string()),
            other => fail(AfnStatus::InvalidArgument, other.to_string()),
        })?;
        let cstring = |s: String| CString::new(s).expect("labels carry no NUL");
        let results = AfnResults {
            rows: outcome
                .results
                .into_iter()
                .map(|r| Row {
                    action: cstring(r.action.label),
                    value: r.value,
                    per_factor: r.per_factor.into_iter().collect(),
                })
                .collect(),
            missing: outcome
                .missing
                .iter()
                .map(|m| cstring(m.to_string()))
                .collect(),
        };
        write_out(out, Box::into_raw(Box::new(results)))
    })
}

/// Number of ranked actions; 0 for null.
///
/// # Safety
/// `results` must be null or come from [`afn_query`].
#[no_mangle]
pub unsafe extern "C" fn afn_results_len(results: *const AfnResults) -> size_t {
    results.as_ref().map_or(0, |r| r.rows.len())
}

unsafe fn row<'a>(results: *const AfnResults, index: size_t) -> Result<&'a Row, Failure> {
    let r = ref_arg(results, "results")?;
    r.rows.get(index).map_or_else(
        || {
            fail(
                AfnStatus::OutOfRange,
                format!("index {index} of {}", r.rows.len()),
            )
        },
        Ok,
    )
}

/// Label of the action at `index` (rank `index + 1`). The string lives as
/// long as `results`.
///
/// # Safety
/// `results` must come from [`afn_query`]; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn afn_results_action(
    results: *const AfnResults,
    index: size_t,
    out: *mut *const c_char,
) -> AfnStatus {
    guard(|| write_out(out, row(results, index)?.action.as_ptr()))
}

/// Affordance value of the action at `index`.
///
/// # Safety
/// `results` must come from [`afn_query`]; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn afn_results_value(
    results: *const AfnResults,
    index: size_t,
    out: *mut f64,
) -> AfnStatus {
    guard(|| write_out(out, row(results, index)?.value))
}

/// Contribution of `factor` to the action at `index`.
///
/// # Safety
/// `results` must come from [`afn_query`], `factor` be NUL-terminated and
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn afn_results_factor_value(
    results: *const AfnResults,
    index: size_t,
    factor: *const c_char,
    out: *mut f64,
) -> AfnStatus {
    guard(|| {
        let row = row(results, index)?;
        let f = node_arg(factor, "factor")?;
        let Some((_, v)) = row.per_factor.iter().find(|(n, _)| *n == f) else {
            return fail(
                AfnStatus::InvalidArgument,
                format!("{f} is not a query factor"),
            );
        };
        write_out(out, *v)
    })
}

/// Number of query factors that were not in the graph.
///
/// # Safety
/// `results` must be null or come from [`afn_query`].
#[no_mangle]
pub unsafe extern "C" fn afn_results_missing_len(results: *const AfnResults) -> size_t {
    results.as_ref().map_or(0, |r| r.missing.len())
}

/// The `index`-th missing factor as `kind:label`; lives as long as
/// `results`.
///
/// # Safety
/// `results` must come from [`afn_query`]; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn afn_results_missing(
    results: *const AfnResults,
    index: size_t,
    out: *mut *const c_char,
) -> AfnStatus {
    guard(|| {
        let r = ref_arg(results, "results")?;
        let Some(m) = r.missing.get(index) else {
            return fail(
                AfnStatus::OutOfRange,
                format!("index {index} of {}", r.missing.len()),
            );
        };
        write_out(out, m.as_ptr())
    })
}

/// Releases query results; null is ignored.
///
/// # Safety
/// `results` must come from [`afn_query`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn afn_results_free(results: *mut AfnResults) {
    if !results.is_null() {
        drop(Box::from_raw(results));
    }
}
