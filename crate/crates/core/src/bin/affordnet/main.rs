//! `affordnet`: generate, ingest, build, merge, query, eval and stats.
//!
//! Exit codes: 0 success, 1 operational error (bad data, I/O, failed
//! run), 2 usage error (bad flags, malformed arguments, missing
//! environment for `--live`).

mod format;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use affordnet::corpus::{depjson, CorpusFormat, CorpusReader, ErrorPolicy, ParsedSentence};
use affordnet::engine::{
    acquired, AffordanceEngine, EngineError, Observation, QueryConfig, DEFAULT_DECAY,
    DEFAULT_PENALTY, DEFAULT_THRESHOLD, DEFAULT_TOP_K,
};
use affordnet::eval::{self, Mode};
use affordnet::generation::{
    self, client::API_KEY_ENV, client::ENDPOINT_ENV, Annotator, Clock, CommandAnnotator,
    GenerationConfig, GenerationError, GenerationLog, HttpClient, LogicalClock, LookupAnnotator,
    ReplayClient, StubClient, SystemClock, TextGenerator,
};
use affordnet::graph::{self, KnowledgeGraph, NodeKind, NodeRef};
use affordnet::{build_graph_parallel, corpus};

#[derive(Parser)]
#[command(
    name = "affordnet",
    version,
    about = "Affordance knowledge graph toolkit"
)]
struct Cli {
    /// More log output (repeatable).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Collect first-person sentences from a text-generation endpoint.
    Generate(GenerateArgs),
    /// Load, validate and normalize parsed corpora to depjson.
    Ingest(IngestArgs),
    /// Build a graph file from parsed corpora.
    Build(BuildArgs),
    /// Merge graph files.
    Merge(MergeArgs),
    /// Rank actions for a set of observed objects and attributes.
    Query(QueryArgs),
    /// Score acquired actions against human responses.
    Eval(EvalArgs),
    /// Print graph statistics.
    Stats(StatsArgs),
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum OutputFormat {
    Table,
    Records,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Conllu,
    Depjson,
}

impl From<FormatArg> for CorpusFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Conllu => CorpusFormat::Conllu,
            FormatArg::Depjson => CorpusFormat::DepJson,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    Skip,
    Abort,
}

impl From<PolicyArg> for ErrorPolicy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::Skip => ErrorPolicy::Skip,
            PolicyArg::Abort => ErrorPolicy::Abort,
        }
    }
}

#[derive(Args)]
struct CorpusOpts {
    /// Input format; guessed from the extension when omitted.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// What to do with malformed records.
    #[arg(long, value_enum, default_value = "skip")]
    on_error: PolicyArg,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct ClientChoice {
    /// Use the HTTP endpoint named by AFFORDNET_ENDPOINT / AFFORDNET_API_KEY.
    #[arg(long)]
    live: bool,
    /// Answer prompts from a stub fixture (JSON).
    #[arg(long, value_name = "FIXTURE")]
    stub: Option<PathBuf>,
    /// Answer prompts from a recorded generation log.
    #[arg(long, value_name = "LOG")]
    replay: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    /// Generation config (TOML).
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    client: ClientChoice,
    /// Sentences output, one per line.
    #[arg(long)]
    out: PathBuf,
    /// Generation log output; defaults to `<out>.log.jsonl`.
    #[arg(long)]
    log: Option<PathBuf>,
    /// Also write the accepted parses as depjson.
    #[arg(long)]
    parsed: Option<PathBuf>,
    /// Pre-parsed sentences (depjson or CoNLL-U) used instead of running
    /// the configured annotator command.
    #[arg(long)]
    annotations: Option<PathBuf>,
}

#[derive(Args)]
struct IngestArgs {
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    #[command(flatten)]
    corpus: CorpusOpts,
    /// Write the valid sentences as depjson.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BuildArgs {
    #[arg(required = true)]
    corpora: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Worker threads; the output does not depend on it.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    jobs: u16,
    #[command(flatten)]
    corpus: CorpusOpts,
}

#[derive(Args)]
struct MergeArgs {
    #[arg(required = true)]
    graphs: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Clone, Copy)]
struct ConfigArgs {
    #[arg(long, default_value_t = DEFAULT_DECAY)]
    decay: f64,
    #[arg(long, default_value_t = DEFAULT_PENALTY)]
    penalty: f64,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    threshold: f64,
}

#[derive(Args)]
struct QueryArgs {
    graph: PathBuf,
    /// Observed factor, `object:LABEL` or `attribute:LABEL` (repeatable).
    #[arg(long = "observe", required = true, value_parser = parse_factor)]
    factors: Vec<NodeRef>,
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long, default_value_t = DEFAULT_TOP_K, value_parser = parse_top_k)]
    top_k: usize,
    #[arg(long, value_enum, default_value = "table")]
    format: OutputFormat,
    /// Keep only results within the threshold.
    #[arg(long)]
    acquired: bool,
    /// Show the shortest path from each factor.
    #[arg(long)]
    paths: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Coverage,
    Rank,
}

#[derive(Args)]
struct EvalArgs {
    graph: PathBuf,
    responses: PathBuf,
    /// Situation factor (repeatable); all situations in the file when omitted.
    #[arg(long = "situation", value_parser = parse_factor)]
    situation: Vec<NodeRef>,
    #[arg(long, value_enum, default_value = "coverage")]
    mode: ModeArg,
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long, value_enum, default_value = "table")]
    format: OutputFormat,
}

#[derive(Args)]
struct StatsArgs {
    graph: PathBuf,
    #[arg(long, value_enum, default_value = "table")]
    format: OutputFormat,
}

fn parse_factor(s: &str) -> Result<NodeRef, String> {
    let node: NodeRef = s.parse().map_err(|e| format!("{e}"))?;
    if node.kind == NodeKind::Action {
        return Err(format!(
            "{s} is an action; factors are objects or attributes"
        ));
    }
    Ok(node)
}

fn parse_top_k(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("top-k must be at least 1".into()),
        Ok(k) => Ok(k),
        Err(e) => Err(e.to_string()),
    }
}

/// A usage problem detected after argument parsing.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();

    let result = match cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Ingest(a) => cmd_ingest(a),
        Command::Build(a) => cmd_build(a),
        Command::Merge(a) => cmd_merge(a),
        Command::Query(a) => cmd_query(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Stats(a) => cmd_stats(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<UsageError>() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// Fails early if an input is not a readable file.
fn check_input(path: &Path) -> Result<()> {
    File::open(path).with_context(|| format!("cannot read {}", path.display()))?;
    if !path.is_file() {
        bail!("{} is not a file", path.display());
    }
    Ok(())
}

/// Fails early if an output's directory does not exist.
fn check_output(path: &Path) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    if !dir.is_dir() {
        bail!("output directory {} does not exist", dir.display());
    }
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| {
        format!("cannot write {}", path.display())
    })?))
}

fn query_config(c: ConfigArgs, top_k: usize) -> Result<QueryConfig> {
    let cfg = QueryConfig {
        decay: c.decay,
        penalty: c.penalty,
        threshold: c.threshold,
        top_k,
    };
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    Ok(cfg)
}

fn load_graph(path: &Path) -> Result<KnowledgeGraph> {
    check_input(path)?;
    graph::load(path).with_context(|| format!("cannot load graph {}", path.display()))
}

fn corpus_format(path: &Path, opts: &CorpusOpts) -> Result<CorpusFormat> {
    match opts.format {
        Some(f) => Ok(f.into()),
        None => CorpusFormat::from_path(path).ok_or_else(|| {
            usage(format!(
                "cannot tell the format of {}; pass --format conllu|depjson",
                path.display()
            ))
        }),
    }
}

/// Loads every corpus; malformed records are reported per the policy.
fn load_corpora(paths: &[PathBuf], opts: &CorpusOpts) -> Result<Vec<ParsedSentence>> {
    let formats = paths
        .iter()
        .map(|p| {
            check_input(p)?;
            corpus_format(p, opts)
        })
        .collect::<Result<Vec<_>>>()?;
    let policy: ErrorPolicy = opts.on_error.into();
    let mut sentences = Vec::new();
    for (path, format) in paths.iter().zip(formats) {
        let loaded = corpus::load_corpus(path, format, policy)
            .with_context(|| format!("{}", path.display()))?;
        for e in &loaded.errors {
            eprintln!("warning: {}: skipped {e}", path.display());
        }
        sentences.extend(loaded.sentences);
    }
    Ok(sentences)
}

fn cmd_ingest(a: IngestArgs) -> Result<()> {
    if let Some(out) = &a.out {
        check_output(out)?;
    }
    let policy: ErrorPolicy = a.corpus.on_error.into();
    let mut sentences = Vec::new();
    let mut skipped = 0;
    for path in &a.inputs {
        check_input(path)?;
    }
    for path in &a.inputs {
        let format = corpus_format(path, &a.corpus)?;
        let reader = CorpusReader::open(path, format)?.with_policy(policy);
        for item in reader {
            match item {
                Ok(s) => sentences.push(s),
                Err(corpus::CorpusError::Record(e)) if policy == ErrorPolicy::Skip => {
                    eprintln!("warning: {}: skipped {e}", path.display());
                    skipped += 1;
                }
                Err(e) => return Err(anyhow!(e).context(path.display().to_string())),
            }
        }
    }
    if let Some(out) = &a.out {
        let mut w = create(out)?;
        for s in &sentences {
            writeln!(w, "{}", depjson::to_depjson_line(s))?;
        }
        w.flush()?;
    }
    println!("{} sentences loaded, {skipped} skipped", sentences.len());
    Ok(())
}

fn build_timestamp() -> Result<Option<u64>> {
    match std::env::var("SOURCE_DATE_EPOCH") {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| usage(format!("SOURCE_DATE_EPOCH is not an integer: {v:?}"))),
        Err(_) => Ok(None),
    }
}

fn cmd_build(a: BuildArgs) -> Result<()> {
    check_output(&a.out)?;
    let timestamp = build_timestamp()?;
    let sentences = load_corpora(&a.corpora, &a.corpus)?;
    let mut g = build_graph_parallel(&sentences, a.jobs as usize)?;
    let meta = g.meta_mut();
    for path in &a.corpora {
        let id = path.file_name().unwrap_or(path.as_os_str());
        meta.corpus_ids.insert(id.to_string_lossy().into_owned());
    }
    meta.build_timestamp = timestamp;
    graph::save(&g, &a.out).with_context(|| format!("cannot write {}", a.out.display()))?;
    let st = g.stats();
    eprintln!(
        "built {} from {} sentences: {} nodes, {} edges",
        a.out.display(),
        sentences.len(),
        st.nodes(),
        st.edges
    );
    Ok(())
}

fn cmd_merge(a: MergeArgs) -> Result<()> {
    check_output(&a.out)?;
    for p in &a.graphs {
        check_input(p)?;
    }
    let mut merged = KnowledgeGraph::new();
    for p in &a.graphs {
        let g = load_graph(p)?;
        merged = merged
            .merge(g)
            .with_context(|| format!("cannot merge {}", p.display()))?;
    }
    graph::save(&merged, &a.out).with_context(|| format!("cannot write {}", a.out.display()))?;
    Ok(())
}

fn cmd_query(a: QueryArgs) -> Result<()> {
    let cfg = query_config(a.config, a.top_k)?;
    let obs = Observation::new(a.factors.iter().cloned()).map_err(|e| usage(e.to_string()))?;
    let g = load_graph(&a.graph)?;
    let engine = AffordanceEngine::new(&g, cfg)?;
    let outcome = match engine.query(&obs) {
        Ok(o) => o,
        Err(e @ EngineError::AllFactorsMissing(_)) => bail!(e),
        Err(e) => return Err(e.into()),
    };
    for m in &outcome.missing {
        eprintln!("warning: {m} is not in the graph; it contributes the penalty");
    }
    let results = if a.acquired {
        acquired(&outcome.results, &cfg)
    } else {
        outcome.results
    };

    let stdout = io::stdout();
    let mut out = stdout.lock();
    match a.format {
        OutputFormat::Records => {
            for r in &results {
                let mut v = serde_json::to_value(r)?;
                if a.paths {
                    v["paths"] = paths_json(&engine, &obs, &r.action);
                }
                writeln!(out, "{v}")?;
            }
        }
        OutputFormat::Table => {
            let factors: Vec<String> = obs.factors().iter().map(NodeRef::to_string).collect();
            writeln!(out, "rank\tvalue\taction\t{}", factors.join("\t"))?;
            for (i, r) in results.iter().enumerate() {
                let per: Vec<String> = obs
                    .factors()
                    .iter()
                    .map(|f| format::sig(r.per_factor[f], 6))
                    .collect();
                writeln!(
                    out,
                    "{}\t{}\t{}\t{}",
                    i + 1,
                    format::sig(r.value, 6),
                    r.action.label,
                    per.join("\t")
                )?;
                if a.paths {
                    for f in obs.factors() {
                        if let Some(p) = engine.shortest_path(f, &r.action) {
                            let nodes: Vec<String> =
                                p.nodes.iter().map(NodeRef::to_string).collect();
                            writeln!(out, "\t\t{}", nodes.join(" -> "))?;
                        }
                    }
                }
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn paths_json(
    engine: &AffordanceEngine<'_>,
    obs: &Observation,
    action: &NodeRef,
) -> serde_json::Value {
    let mut map = serde_json::Map::new();
    for f in obs.factors() {
        let v = match engine.shortest_path(f, action) {
            Some(p) => {
                serde_json::Value::from(p.nodes.iter().map(NodeRef::to_string).collect::<Vec<_>>())
            }
            None => serde_json::Value::Null,
        };
        map.insert(f.to_string(), v);
    }
    serde_json::Value::Object(map)
}

fn cmd_eval(a: EvalArgs) -> Result<()> {
    let cfg = query_config(a.config, usize::MAX)?;
    check_input(&a.responses)?;
    let g = load_graph(&a.graph)?;
    let responses =
        eval::load_responses(&a.responses).with_context(|| format!("{}", a.responses.display()))?;
    let situations = if a.situation.is_empty() {
        responses.situations()
    } else {
        Observation::new(a.situation.iter().cloned()).map_err(|e| usage(e.to_string()))?;
        vec![a.situation.clone()]
    };
    if situations.is_empty() {
        bail!("{} has no responses", a.responses.display());
    }
    let mode = match a.mode {
        ModeArg::Coverage => Mode::Coverage,
        ModeArg::Rank => Mode::Rank,
    };
    let engine = AffordanceEngine::new(&g, cfg)?;
    let stdout = io::stdout();
    let mut out = stdout.lock();
    if a.format == OutputFormat::Table {
        writeln!(out, "situation\tmetric\tvalue")?;
    }
    for situation in &situations {
        let (records, excluded) = eval::evaluate_situation(&engine, situation, &responses, mode)
            .with_context(|| {
                let names: Vec<String> = situation.iter().map(NodeRef::to_string).collect();
                format!("situation {}", names.join(" + "))
            })?;
        for x in excluded {
            eprintln!(
                "warning: respondent {}: excluded {:?}: {}",
                x.respondent, x.phrase, x.reason
            );
        }
        for r in records {
            match a.format {
                OutputFormat::Records => writeln!(out, "{}", serde_json::to_string(&r)?)?,
                OutputFormat::Table => writeln!(
                    out,
                    "{}\t{}\t{:.1}",
                    r.situation.join(" + "),
                    r.metric,
                    r.value
                )?,
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn cmd_stats(a: StatsArgs) -> Result<()> {
    let g = load_graph(&a.graph)?;
    let st = g.stats();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match a.format {
        OutputFormat::Records => writeln!(out, "{}", serde_json::to_string(&st)?)?,
        OutputFormat::Table => {
            writeln!(out, "objects\t{}", st.objects)?;
            writeln!(out, "attributes\t{}", st.attributes)?;
            writeln!(out, "actions\t{}", st.actions)?;
            writeln!(out, "nodes\t{}", st.nodes())?;
            writeln!(out, "edges\t{}", st.edges)?;
            writeln!(out, "max_count\t{}", st.max_count)?;
            writeln!(out, "total_count\t{}", st.total_count)?;
            writeln!(out, "degree\tnodes")?;
            for (d, n) in &st.degree_histogram {
                writeln!(out, "{d}\t{n}")?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn cmd_generate(a: GenerateArgs) -> Result<()> {
    // Environment and flag problems are usage errors and come first.
    let live = if a.client.live {
        Some(live_endpoint()?)
    } else {
        None
    };
    check_input(&a.config)?;
    if let Some(p) = a.client.stub.as_ref().or(a.client.replay.as_ref()) {
        check_input(p)?;
    }
    if let Some(p) = &a.annotations {
        check_input(p)?;
    }
    let log_path = a.log.clone().unwrap_or_else(|| {
        let mut name = a.out.clone().into_os_string();
        name.push(".log.jsonl");
        PathBuf::from(name)
    });
    for p in [Some(&a.out), Some(&log_path), a.parsed.as_ref()]
        .into_iter()
        .flatten()
    {
        check_output(p)?;
    }

    let cfg = GenerationConfig::load(&a.config)?;
    let templates = cfg.load_templates()?;
    let mut annotator: Box<dyn Annotator> = match &a.annotations {
        Some(p) => Box::new(LookupAnnotator::from_file(p)?),
        None => Box::new(CommandAnnotator::new(cfg.annotator_command.clone())?),
    };
    let (mut client, mut clock): (Box<dyn TextGenerator>, Box<dyn Clock>) = match live {
        Some((endpoint, key)) => {
            let timeout = Duration::from_secs(cfg.request_timeout_s);
            let http = HttpClient::new(endpoint, key, timeout);
            (Box::new(http), Box::new(SystemClock::new()))
        }
        None => {
            let client: Box<dyn TextGenerator> = match (&a.client.stub, &a.client.replay) {
                (Some(p), _) => Box::new(StubClient::from_file(p)?),
                (_, Some(p)) => Box::new(ReplayClient::new(&GenerationLog::load(p)?)),
                _ => unreachable!("clap requires one client"),
            };
            (client, Box::new(LogicalClock::new()))
        }
    };

    let result = generation::run_collection(
        &cfg,
        &templates,
        client.as_mut(),
        annotator.as_mut(),
        clock.as_mut(),
    );
    let collection = match result {
        Ok(c) => c,
        Err(GenerationError::TooManyFailures { failed, log }) => {
            log.save(&log_path)?;
            write_sentences(&a.out, &log.corpus())?;
            bail!(
                "aborted after {failed} failed prompts; partial log in {}",
                log_path.display()
            );
        }
        Err(e @ GenerationError::MissingEnv(_)) => return Err(usage(e.to_string())),
        Err(e) => return Err(e.into()),
    };
    write_sentences(&a.out, &collection.sentences)?;
    collection.log.save(&log_path)?;
    if let Some(p) = &a.parsed {
        let mut w = create(p)?;
        for s in &collection.parsed {
            writeln!(w, "{}", depjson::to_depjson_line(s))?;
        }
        w.flush()?;
    }
    eprintln!(
        "{} requests, {} sentences accepted; log in {}",
        collection.log.request_count(),
        collection.sentences.len(),
        log_path.display()
    );
    Ok(())
}

/// Endpoint URL and API key from the environment.
fn live_endpoint() -> Result<(String, String)> {
    let var = |name: &str| match std::env::var(name) {
        Ok(v) if !v.trim().is_empty() => Ok(v),
        _ => Err(usage(format!(
            "--live needs the environment variable {name}"
        ))),
    };
    Ok((var(ENDPOINT_ENV)?, var(API_KEY_ENV)?))
}

fn write_sentences(path: &Path, sentences: &[String]) -> Result<()> {
    let mut w = create(path)?;
    generation::log::write_sentences(sentences, &mut w)?;
    w.flush()?;
    Ok(())
}
