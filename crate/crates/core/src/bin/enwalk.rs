use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use enwalk::baselines::{
    fit_trust, lbp_marginals, pagerank, read_trust_labels, MrfConfig, PageRankConfig, PageRankVariant, TrustModel,
};
use enwalk::dynamics::{write_pairs, Dynamics};
use enwalk::embed::{train, EmbedConfig, EmbeddingMatrix};
use enwalk::eval::{
    compare_models, cross_validate, out_of_fold_scores, precision_at_n, suspended_cdf, CrossValidation,
    LogisticConfig, ScoreTable, SuspendedCdf,
};
use enwalk::graph::{load_graph, read_labels, write_edges, write_labels, write_users, SpamGraph, View};
use enwalk::pipeline::label_vector;
use enwalk::synth::{generate, SynthConfig};
use enwalk::walk::{BiasWeights, Strategy, WalkConfig, WalkCorpus, Walker};
use enwalk::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "enwalk", version, about = "Spam-dynamics biased random-walk embeddings and spammer ranking")]
struct Cli {
    /// Flat `key=value` file with default flag values; flags given on the
    /// command line win.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true, env = "ENWALK_WORKERS")]
    workers: Option<usize>,

    /// Log progress (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic network with planted spammers.
    #[command(args_override_self = true)]
    Synth(SynthArgs),
    /// Validate and normalize graph files.
    #[command(args_override_self = true)]
    Ingest(IngestArgs),
    /// Compute pair dynamics along every follow edge.
    #[command(args_override_self = true)]
    Dynamics(DynamicsArgs),
    /// Sample a walk corpus.
    #[command(args_override_self = true)]
    Walk(WalkArgs),
    /// Train node embeddings on a walk corpus.
    #[command(args_override_self = true)]
    Embed(EmbedArgs),
    /// Rank users with (trust-weighted) PageRank.
    #[command(args_override_self = true)]
    Pagerank(PageRankArgs),
    /// Score users with the three-state MRF.
    #[command(args_override_self = true)]
    Mrf(MrfArgs),
    /// Fit the linear trust model on labeled users.
    #[command(name = "trust-fit", args_override_self = true)]
    TrustFit(TrustFitArgs),
    /// Evaluate embeddings or a score table against labels.
    #[command(args_override_self = true)]
    Eval(EvalArgs),
    /// Compare the rankings of several models.
    #[command(args_override_self = true)]
    Compare(CompareArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Synth(_) => "synth",
            Command::Ingest(_) => "ingest",
            Command::Dynamics(_) => "dynamics",
            Command::Walk(_) => "walk",
            Command::Embed(_) => "embed",
            Command::Pagerank(_) => "pagerank",
            Command::Mrf(_) => "mrf",
            Command::TrustFit(_) => "trust-fit",
            Command::Eval(_) => "eval",
            Command::Compare(_) => "compare",
        }
    }
}

const SUBCOMMANDS: [&str; 10] = [
    "synth", "ingest", "dynamics", "walk", "embed", "pagerank", "mrf", "trust-fit", "eval", "compare",
];

#[derive(Args, Debug, Serialize)]
struct GraphArgs {
    /// Edge list: `src<TAB>dst[<TAB>weight]`.
    #[arg(long)]
    edges: PathBuf,
    /// User records, one JSON object per line.
    #[arg(long)]
    users: PathBuf,
    /// Optional `node<TAB>0|1` labels overriding the records.
    #[arg(long)]
    labels: Option<PathBuf>,
}

impl GraphArgs {
    fn load(&self) -> Result<SpamGraph> {
        let mut graph = load_graph(&self.edges, &self.users)?;
        if let Some(path) = &self.labels {
            graph.apply_labels(&read_labels(path)?)?;
        }
        let stats = graph.stats();
        log::info!(
            "loaded {} nodes, {} edges ({} self-loops dropped, {} duplicates merged, {} defaulted records)",
            graph.node_count(),
            graph.edge_count(),
            stats.self_loops_dropped,
            stats.duplicate_edges_merged,
            stats.defaulted_records
        );
        Ok(graph)
    }

    fn inputs(&self) -> Vec<&Path> {
        let mut v = vec![self.edges.as_path(), self.users.as_path()];
        v.extend(self.labels.as_deref());
        v
    }
}

#[derive(Args, Debug, Serialize)]
struct SynthArgs {
    #[arg(long, default_value_t = 2000)]
    n: usize,
    #[arg(long, default_value_t = 0.05)]
    spam_frac: f64,
    #[arg(long, default_value_t = 0.5)]
    vigilant_frac: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Labeled users written to `trust_labels.tsv`.
    #[arg(long, default_value_t = 400)]
    trust_labels: usize,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct IngestArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum ViewArg {
    Out,
    Undirected,
}

impl From<ViewArg> for View {
    fn from(v: ViewArg) -> View {
        match v {
            ViewArg::Out => View::Out,
            ViewArg::Undirected => View::Undirected,
        }
    }
}

#[derive(Args, Debug, Serialize)]
struct DynamicsArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long, default_value = "pairs.tsv")]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum StrategyArg {
    Enwalk,
    Uniform,
    Node2vec,
}

#[derive(Args, Debug, Serialize)]
struct WalkArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long, value_enum, default_value_t = StrategyArg::Enwalk)]
    strategy: StrategyArg,
    /// Weight of common active time.
    #[arg(long, default_value_t = 0.25)]
    p: f64,
    /// Weight of success-rate similarity.
    #[arg(long, default_value_t = 0.25)]
    q: f64,
    /// Weight of fraudulence similarity.
    #[arg(long, default_value_t = 0.25)]
    r: f64,
    /// Weight of mention overlap.
    #[arg(long, default_value_t = 0.25)]
    s: f64,
    /// node2vec return parameter.
    #[arg(long = "return", default_value_t = 1.0)]
    #[serde(rename = "return")]
    return_param: f64,
    /// node2vec in-out parameter.
    #[arg(long, default_value_t = 0.5)]
    inout: f64,
    /// Walks per node.
    #[arg(long, default_value_t = 10)]
    walks: usize,
    /// Steps per walk.
    #[arg(long, default_value_t = 80)]
    length: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = ViewArg::Out)]
    view: ViewArg,
    #[arg(long, default_value = "walks.txt")]
    out: PathBuf,
}

impl WalkArgs {
    fn config(&self) -> Result<WalkConfig> {
        let strategy = match self.strategy {
            StrategyArg::Enwalk => Strategy::EnWalk(BiasWeights::new(self.p, self.q, self.r, self.s)?),
            StrategyArg::Uniform => Strategy::Uniform,
            StrategyArg::Node2vec => Strategy::ReturnInOut {
                ret: self.return_param,
                inout: self.inout,
            },
        };
        let config = WalkConfig {
            walks_per_node: self.walks,
            walk_length: self.length,
            seed: self.seed,
            view: self.view.into(),
            strategy,
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Args, Debug, Serialize)]
struct EmbedArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// Walk corpus from `walk`.
    #[arg(long)]
    walks: PathBuf,
    #[arg(long, default_value_t = 128)]
    dim: usize,
    #[arg(long, default_value_t = 10)]
    window: usize,
    #[arg(long, default_value_t = 5)]
    negatives: usize,
    #[arg(long, default_value_t = 5)]
    epochs: usize,
    #[arg(long, default_value_t = 0.025)]
    lr: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Single worker and bit-reproducible output; `false` trains lock-free
    /// on all workers.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    deterministic: bool,
    #[arg(long, default_value = "embeddings.txt")]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum VariantArg {
    Traditional,
    Trust,
}

#[derive(Args, Debug, Serialize)]
struct PageRankArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long, value_enum, default_value_t = VariantArg::Traditional)]
    variant: VariantArg,
    /// Trust model from `trust-fit`; required by the trust variant.
    #[arg(long)]
    trust_model: Option<PathBuf>,
    #[arg(long, default_value_t = 0.15)]
    teleport: f64,
    #[arg(long, default_value_t = 1e-12)]
    tolerance: f64,
    #[arg(long, default_value_t = 1000)]
    max_iter: usize,
    #[arg(long, default_value = "scores.tsv")]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct MrfArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long)]
    trust_model: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    damping: f64,
    #[arg(long, default_value_t = 1e-10)]
    tolerance: f64,
    #[arg(long, default_value_t = 500)]
    max_iter: usize,
    #[arg(long, default_value = "scores.tsv")]
    out: PathBuf,
    #[arg(long, default_value = "beliefs.tsv")]
    beliefs: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct TrustFitArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// `node<TAB>score` trust labels in [0, 1].
    #[arg(long)]
    trust_labels: PathBuf,
    #[arg(long, default_value = "trust.json")]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct EvalArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// Embeddings to classify; node scores come from out-of-fold predictions.
    #[arg(long, conflicts_with = "scores", required_unless_present = "scores")]
    embeddings: Option<PathBuf>,
    /// A score table to rank directly.
    #[arg(long)]
    scores: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    folds: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Precision cutoffs, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "100")]
    n: Vec<usize>,
    #[arg(long, default_value = "eval.json")]
    out: PathBuf,
    /// Where to write the out-of-fold scores of `--embeddings`.
    #[arg(long)]
    scores_out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct CompareArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// `NAME=scores.tsv`, repeatable; rows keep this order.
    #[arg(long = "model", value_name = "NAME=FILE", required = true)]
    models: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "100")]
    n: Vec<usize>,
    #[arg(long, default_value = "report.json")]
    out: PathBuf,
    #[arg(long, default_value = "cdf.tsv")]
    cdf: PathBuf,
}

/// Refuses to write over any input file.
fn ensure_distinct(inputs: &[&Path], outputs: &[&Path]) -> Result<()> {
    let canon = |p: &Path| std::fs::canonicalize(p).ok();
    for out in outputs {
        if let Some(o) = canon(out) {
            if inputs.iter().any(|i| canon(i).as_ref() == Some(&o)) {
                return Err(Error::Config(format!(
                    "output {} would overwrite an input",
                    out.display()
                )));
            }
        }
    }
    Ok(())
}

/// Writes `<output>.config`: every effective parameter as `key=value`, in a
/// form `--config` accepts.
fn write_echo<T: Serialize>(output: &Path, command: &str, args: &T, workers: usize) -> Result<()> {
    let mut flat = BTreeMap::new();
    flatten_json(&serde_json::to_value(args).expect("arguments serialize"), &mut flat);
    let mut text = format!("# enwalk {command}\nworkers={workers}\n");
    for (k, v) in flat {
        text.push_str(&format!("{k}={v}\n"));
    }
    let mut path = output.as_os_str().to_owned();
    path.push(".config");
    let path = PathBuf::from(path);
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))
}

fn flatten_json(value: &serde_json::Value, out: &mut BTreeMap<String, String>) {
    use serde_json::Value;
    if let Value::Object(map) = value {
        for (k, v) in map {
            let key = k.replace('_', "-");
            match v {
                Value::Object(_) => flatten_json(v, out),
                Value::Null => {}
                Value::String(s) => {
                    out.insert(key, s.clone());
                }
                Value::Array(items) => {
                    let joined: Vec<String> = items
                        .iter()
                        .map(|x| x.as_str().map_or_else(|| x.to_string(), str::to_string))
                        .collect();
                    out.insert(key, joined.join(","));
                }
                other => {
                    out.insert(key, other.to_string());
                }
            }
        }
    }
}

/// Reads a `key=value` file into flag arguments.
fn config_args(path: &Path) -> Result<Vec<OsString>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut args = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::parse(path, i + 1, "expected `key=value`"))?;
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        if key == "model" {
            // repeatable: one flag per comma-separated entry
            for v in value.split(',').filter(|v| !v.is_empty()) {
                args.push(OsString::from(format!("--model={v}")));
            }
        } else {
            args.push(OsString::from(format!("--{key}={value}")));
        }
    }
    Ok(args)
}

/// Splices the `--config` file's flags in right after the subcommand name,
/// so that flags on the command line, which come later, override them.
fn expand_config(argv: Vec<OsString>) -> Result<Vec<OsString>> {
    let mut config = None;
    let mut rest = Vec::with_capacity(argv.len());
    let mut iter = argv.into_iter();
    while let Some(arg) = iter.next() {
        let s = arg.to_string_lossy();
        if s == "--config" {
            match iter.next() {
                Some(v) => config = Some(PathBuf::from(v)),
                None => rest.push(arg),
            }
        } else if let Some(v) = s.strip_prefix("--config=") {
            config = Some(PathBuf::from(v));
        } else {
            rest.push(arg);
        }
    }
    let Some(path) = config else {
        return Ok(rest);
    };
    let extra = config_args(&path)?;
    let at = rest
        .iter()
        .position(|a| SUBCOMMANDS.contains(&a.to_string_lossy().as_ref()))
        .map_or(rest.len(), |i| i + 1);
    let mut out = rest[..at].to_vec();
    out.extend(extra);
    out.extend_from_slice(&rest[at..]);
    Ok(out)
}

#[derive(Serialize)]
struct EvalReport {
    nodes: usize,
    suspended: usize,
    classification: Option<CrossValidation>,
    auc: f64,
    cdf: Vec<(usize, f64)>,
    precision_at: Vec<(usize, f64)>,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("report serializes") + "\n";
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn run(cli: Cli) -> Result<()> {
    let workers = cli
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if workers == 0 {
        return Err(Error::Config("workers must be at least 1".into()));
    }
    // a second initialization only happens in tests; ignoring it is harmless
    let _ = rayon::ThreadPoolBuilder::new().num_threads(workers).build_global();
    let command = cli.command.name();

    match &cli.command {
        Command::Synth(a) => {
            let config = SynthConfig {
                nodes: a.n,
                spam_fraction: a.spam_frac,
                vigilant_fraction: a.vigilant_frac,
                seed: a.seed,
                trust_labels: a.trust_labels,
                ..Default::default()
            };
            let net = generate(&config)?;
            net.write(&a.out_dir)?;
            let (normal, vigilant, flood) = config.cohort_sizes();
            println!(
                "{} nodes ({normal} normal, {vigilant} vigilant, {flood} follow-flood), {} edges -> {}",
                net.graph.node_count(),
                net.graph.edge_count(),
                a.out_dir.display()
            );
            write_echo(&a.out_dir.join("synth"), command, a, workers)
        }
        Command::Ingest(a) => {
            let graph = a.graph.load()?;
            std::fs::create_dir_all(&a.out_dir).map_err(|e| Error::io(&a.out_dir, e))?;
            let outs = [a.out_dir.join("edges.tsv"), a.out_dir.join("users.jsonl"), a.out_dir.join("labels.tsv")];
            ensure_distinct(&a.graph.inputs(), &outs.iter().map(PathBuf::as_path).collect::<Vec<_>>())?;
            write_edges(&graph, &outs[0])?;
            write_users(&graph, &outs[1])?;
            write_labels(&graph, &outs[2])?;
            let s = graph.stats();
            println!(
                "nodes={} edges={} self_loops_dropped={} duplicates_merged={} defaulted_records={}",
                graph.node_count(),
                graph.edge_count(),
                s.self_loops_dropped,
                s.duplicate_edges_merged,
                s.defaulted_records
            );
            write_echo(&a.out_dir.join("ingest"), command, a, workers)
        }
        Command::Dynamics(a) => {
            ensure_distinct(&a.graph.inputs(), &[&a.out])?;
            let graph = a.graph.load()?;
            let dynamics = Dynamics::new(&graph);
            write_pairs(&dynamics, &a.out)?;
            write_echo(&a.out, command, a, workers)
        }
        Command::Walk(a) => {
            ensure_distinct(&a.graph.inputs(), &[&a.out])?;
            let config = a.config()?;
            let graph = a.graph.load()?;
            let dynamics = Dynamics::new(&graph);
            let corpus = Walker::new(&dynamics, config)?.generate_corpus();
            corpus.write(&graph, &a.out)?;
            log::info!("{} walks, {} tokens", corpus.len(), corpus.token_count());
            write_echo(&a.out, command, a, workers)
        }
        Command::Embed(a) => {
            let mut inputs = a.graph.inputs();
            inputs.push(&a.walks);
            ensure_distinct(&inputs, &[&a.out])?;
            let graph = a.graph.load()?;
            let corpus = WalkCorpus::read(&graph, &a.walks)?;
            let config = EmbedConfig {
                dim: a.dim,
                window: a.window,
                negatives: a.negatives,
                epochs: a.epochs,
                learning_rate: a.lr,
                seed: a.seed,
                deterministic: a.deterministic,
                workers,
                ..Default::default()
            };
            let (embedding, report) = train(&corpus, graph.ids(), &config)?;
            for (epoch, loss) in report.epoch_mean_loss.iter().enumerate() {
                log::info!("epoch {epoch}: mean loss {loss:.5}");
            }
            embedding.write(&a.out)?;
            write_echo(&a.out, command, a, workers)
        }
        Command::Pagerank(a) => {
            let mut inputs = a.graph.inputs();
            inputs.extend(a.trust_model.as_deref());
            ensure_distinct(&inputs, &[&a.out])?;
            let graph = a.graph.load()?;
            let variant = match a.variant {
                VariantArg::Traditional => PageRankVariant::Traditional,
                VariantArg::Trust => PageRankVariant::TrustInducedAndPrior,
            };
            let trust = a.trust_model.as_deref().map(TrustModel::read).transpose()?;
            let config = PageRankConfig {
                teleport: a.teleport,
                tolerance: a.tolerance,
                max_iterations: a.max_iter,
                variant,
            };
            let result = pagerank(&graph, &config, trust.as_ref())?;
            log::info!("pagerank: {} iterations, converged={}", result.iterations, result.converged);
            result.spamicity(&graph).write(&a.out)?;
            write_echo(&a.out, command, a, workers)
        }
        Command::Mrf(a) => {
            let mut inputs = a.graph.inputs();
            inputs.push(&a.trust_model);
            ensure_distinct(&inputs, &[&a.out, &a.beliefs])?;
            let graph = a.graph.load()?;
            let trust = TrustModel::read(&a.trust_model)?;
            let config = MrfConfig {
                damping: a.damping,
                tolerance: a.tolerance,
                max_iterations: a.max_iter,
                ..Default::default()
            };
            let result = lbp_marginals(&graph, &config, &trust)?;
            log::info!("loopy BP: {} sweeps, converged={}", result.iterations, result.converged);
            result.scores(&graph).write(&a.out)?;
            result.write_beliefs(&graph, &a.beliefs)?;
            write_echo(&a.out, command, a, workers)
        }
        Command::TrustFit(a) => {
            let mut inputs = a.graph.inputs();
            inputs.push(&a.trust_labels);
            ensure_distinct(&inputs, &[&a.out])?;
            let graph = a.graph.load()?;
            let labeled = read_trust_labels(&graph, &a.trust_labels)?;
            let model = fit_trust(&labeled)?;
            model.write(&a.out)?;
            write_echo(&a.out, command, a, workers)
        }
        Command::Eval(a) => {
            let mut inputs = a.graph.inputs();
            inputs.extend(a.embeddings.as_deref());
            inputs.extend(a.scores.as_deref());
            let mut outputs = vec![a.out.as_path()];
            outputs.extend(a.scores_out.as_deref());
            ensure_distinct(&inputs, &outputs)?;
            let graph = a.graph.load()?;
            let labels = label_vector(&graph);
            let logistic = LogisticConfig::default();
            let (scores, classification) = match (&a.embeddings, &a.scores) {
                (Some(path), _) => {
                    let embedding = EmbeddingMatrix::read(path)?.aligned_to(&graph)?;
                    let features = embedding.rows();
                    let cv = cross_validate(&features, &labels, a.folds, a.seed, &logistic)?;
                    let scores = out_of_fold_scores(graph.ids(), &features, &labels, a.folds, a.seed, &logistic)?;
                    (scores, Some(cv))
                }
                (None, Some(path)) => (ScoreTable::read(path)?.reordered(graph.ids())?, None),
                (None, None) => unreachable!("clap requires one of them"),
            };
            if let Some(path) = &a.scores_out {
                scores.write(path)?;
            }
            let SuspendedCdf { cdf, auc } = suspended_cdf(&scores, &labels)?;
            let precision_at = a
                .n
                .iter()
                .map(|&n| precision_at_n(&scores, &labels, n).map(|p| (n, p)))
                .collect::<Result<Vec<_>>>()?;
            if let Some(cv) = &classification {
                let m = cv.mean;
                println!(
                    "P={:.4} R={:.4} F1={:.4} A={:.4} ({} folds, {} per class)",
                    m.precision, m.recall, m.f1, m.accuracy, cv.folds, cv.per_class
                );
            }
            println!("AUC={auc:.4}");
            for (n, p) in &precision_at {
                println!("P@{n}={p:.4}");
            }
            let report = EvalReport {
                nodes: graph.node_count(),
                suspended: labels.iter().filter(|&&l| l).count(),
                classification,
                auc,
                cdf: cdf.into_iter().enumerate().map(|(i, c)| (i + 1, c)).collect(),
                precision_at,
            };
            write_json(&a.out, &report)?;
            write_echo(&a.out, command, a, workers)
        }
        Command::Compare(a) => {
            let mut named = Vec::with_capacity(a.models.len());
            for spec in &a.models {
                let (name, path) = spec
                    .split_once('=')
                    .ok_or_else(|| Error::Config(format!("model `{spec}` is not NAME=FILE")))?;
                named.push((name.to_string(), PathBuf::from(path)));
            }
            let mut inputs = a.graph.inputs();
            inputs.extend(named.iter().map(|(_, p)| p.as_path()));
            ensure_distinct(&inputs, &[&a.out, &a.cdf])?;
            let graph = a.graph.load()?;
            let labels = label_vector(&graph);
            let tables = named
                .into_iter()
                .map(|(name, path)| ScoreTable::read(&path).map(|t| (name, t)))
                .collect::<Result<Vec<_>>>()?;
            let comparison = compare_models(&tables, graph.ids(), &labels, &a.n)?;
            print!("{}", comparison.table());
            write_json(&a.out, &comparison)?;
            comparison.write_cdf(&a.cdf)?;
            write_echo(&a.out, command, a, workers)
        }
    }
}

fn main() -> ExitCode {
    let argv = match expand_config(std::env::args_os().collect()) {
        Ok(argv) => argv,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
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
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
