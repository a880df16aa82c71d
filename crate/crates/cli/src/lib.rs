//! `kgraph` command-line front end.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on data errors.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};

mod commands;
pub mod config;
pub mod error;
pub mod graphdir;

pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "kgraph", version, about = "Build, embed, cluster and update knowledge graphs")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
#[command(next_help_heading = "Global options")]
pub struct GlobalArgs {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub threads: Option<u64>,
    /// Log format on stderr.
    #[arg(long, global = true, value_enum, default_value_t = LogFormat::Text)]
    pub log: LogFormat,
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    /// TOML file supplying default flag values (also `KGRAPH_CONFIG`).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LogFormat {
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load triples into a graph directory.
    Ingest(IngestArgs),
    /// Extract triples from parsed sentences or LLM output lines.
    Extract(ExtractArgs),
    /// Learn entity embeddings.
    #[command(subcommand)]
    Embed(EmbedCommand),
    /// Cluster entity embeddings.
    #[command(subcommand)]
    Cluster(ClusterCommand),
    /// Predict relations or evaluate link prediction with a TransE model.
    #[command(subcommand)]
    Predict(PredictCommand),
    /// Apply a delta to a graph and reconstruct affected embeddings.
    Update(UpdateArgs),
    /// Query entity-linking and common-sense services.
    #[command(subcommand)]
    Link(LinkCommand),
    /// Write a graph in an interchange format.
    Export(ExportArgs),
    /// Silhouette matrix of embeddings × clustering algorithms.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum IngestFormat {
    Ntriples,
    Tsv,
    Graphml,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long, value_enum)]
    pub format: IngestFormat,
    /// Input file, `-` for stdin.
    pub input: PathBuf,
    /// Graph directory to create.
    #[arg(long)]
    pub out: PathBuf,
    /// Add to an existing graph directory as one new version.
    #[arg(long)]
    pub append: bool,
    /// File of allowed relation names, one per line.
    #[arg(long)]
    pub schema: Option<PathBuf>,
    #[arg(long)]
    pub allow_self_loops: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExtractFormat {
    Conllu,
    LlmLines,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    #[arg(long, value_enum)]
    pub format: ExtractFormat,
    /// Input file, `-` for stdin.
    #[arg(default_value = "-")]
    pub input: PathBuf,
    /// Triples TSV, `-` for stdout.
    #[arg(long, default_value = "-")]
    pub out: PathBuf,
    /// JSON report of skipped sentences and rejected lines.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum EmbedCommand {
    /// Uniform random walks + skip-gram.
    Deepwalk(WalkArgs),
    /// Biased (p, q) random walks + skip-gram.
    Node2vec(Node2vecArgs),
    /// Translational embeddings of entities and relations.
    Transe(TransEArgs),
}

#[derive(Debug, Args)]
pub struct WalkArgs {
    /// Graph directory.
    #[arg(long)]
    pub graph: PathBuf,
    /// Embedding JSON file.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 64)]
    pub dim: usize,
    /// Steps per walk.
    #[arg(long, default_value_t = 40)]
    pub walk_length: usize,
    #[arg(long, default_value_t = 10)]
    pub walks_per_node: usize,
    #[arg(long, default_value_t = 5)]
    pub window: usize,
    #[arg(long, default_value_t = 5)]
    pub negatives: usize,
    #[arg(long, default_value_t = 5)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0.025)]
    pub lr: f64,
    /// Follow edges only in their direction.
    #[arg(long)]
    pub directed: bool,
    /// Also write the first three principal components as CSV.
    #[arg(long)]
    pub pca: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Node2vecArgs {
    #[command(flatten)]
    pub walk: WalkArgs,
    /// Return parameter.
    #[arg(long, default_value_t = 1.0)]
    pub p: f64,
    /// In-out parameter.
    #[arg(long, default_value_t = 1.0)]
    pub q: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NormArg {
    L1,
    L2,
}

#[derive(Debug, Args)]
pub struct TransEArgs {
    /// Graph directory.
    #[arg(long)]
    pub graph: PathBuf,
    /// Model JSON file.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 50)]
    pub dim: usize,
    #[arg(long, default_value_t = 1.0)]
    pub margin: f64,
    #[arg(long, default_value_t = 0.01)]
    pub lr: f64,
    #[arg(long, default_value_t = 500)]
    pub epochs: usize,
    #[arg(long, default_value_t = 128)]
    pub batch_size: usize,
    #[arg(long, value_enum, default_value_t = NormArg::L1)]
    pub norm: NormArg,
    /// Accept corruptions that happen to be true triples.
    #[arg(long)]
    pub unfiltered_corruptions: bool,
    /// Hold these triples (TSV) out of training.
    #[arg(long)]
    pub holdout: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SelectK {
    Silhouette,
    Elbow,
    Gap,
}

#[derive(Debug, Args)]
pub struct KArgs {
    /// Number of clusters.
    #[arg(long, conflicts_with = "select_k")]
    pub k: Option<usize>,
    /// Choose k automatically.
    #[arg(long, value_enum)]
    pub select_k: Option<SelectK>,
    /// Largest k tried by --select-k.
    #[arg(long, default_value_t = 10)]
    pub k_max: usize,
    /// Reference datasets for the gap statistic.
    #[arg(long, default_value_t = 10)]
    pub gap_b: usize,
}

#[derive(Debug, Args)]
pub struct ClusterIo {
    /// Embedding or TransE model JSON.
    #[arg(long)]
    pub embeddings: PathBuf,
    /// `entity,cluster` CSV, `-` for stdout.
    #[arg(long, default_value = "-")]
    pub out: PathBuf,
    /// JSON summary (k, silhouette, inertia, sizes).
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum ClusterCommand {
    Kmeans {
        #[command(flatten)]
        io: ClusterIo,
        #[command(flatten)]
        k: KArgs,
        #[arg(long, default_value_t = 300)]
        max_iter: usize,
        /// Restarts; the lowest-inertia run wins.
        #[arg(long, default_value_t = 10)]
        n_init: usize,
    },
    Agglo {
        #[command(flatten)]
        io: ClusterIo,
        #[command(flatten)]
        k: KArgs,
        #[arg(long, value_enum, default_value_t = LinkageArg::Average)]
        linkage: LinkageArg,
    },
    /// Cluster, explain with rules, adapt embeddings, repeat.
    Excut {
        #[command(flatten)]
        io: ClusterIo,
        #[command(flatten)]
        k: KArgs,
        /// Graph directory.
        #[arg(long)]
        graph: PathBuf,
        /// Entities to cluster, one per line (default: all).
        #[arg(long)]
        targets: Option<PathBuf>,
        #[arg(long, default_value_t = 10)]
        max_iters: usize,
        /// Rules kept per cluster.
        #[arg(long, default_value_t = 3)]
        top_m: usize,
        /// Step toward the cluster centroid per iteration.
        #[arg(long, default_value_t = 0.5)]
        eta: f64,
        /// Rules and per-iteration changes as JSON.
        #[arg(long)]
        rules: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LinkageArg {
    Single,
    Complete,
    Average,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DirectionArg {
    Head,
    Tail,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum PredictCommand {
    /// Rank relations between two entities.
    Relation {
        /// TransE model JSON.
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        head: String,
        #[arg(long)]
        tail: String,
        /// Also score the reversed pair.
        #[arg(long)]
        both_directions: bool,
        /// Keep the best N.
        #[arg(long)]
        top: Option<usize>,
        #[arg(long, default_value = "-")]
        out: PathBuf,
    },
    /// MRR, MR and Hits@k on a test set.
    Evaluate {
        /// TransE model JSON.
        #[arg(long)]
        model: PathBuf,
        /// Test triples TSV.
        #[arg(long)]
        test: PathBuf,
        /// Graph whose triples are filtered out when ranking.
        #[arg(long)]
        graph: Option<PathBuf>,
        /// Filtered ranking (default raw).
        #[arg(long)]
        filtered: bool,
        #[arg(long, value_enum, default_value_t = DirectionArg::Both)]
        direction: DirectionArg,
        #[arg(long, value_delimiter = ',', default_values_t = vec![1, 3, 10])]
        hits: Vec<usize>,
        /// Rank against N sampled candidates (not comparable with full ranking).
        #[arg(long)]
        sample: Option<usize>,
        #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
        format: ReportFormat,
        #[arg(long, default_value = "-")]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LayerArg {
    Connectivity,
    Translational,
    Composite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FallbackArg {
    Zero,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScopeArg {
    New,
    Touched,
}

#[derive(Debug, Args)]
pub struct UpdateArgs {
    /// Graph directory.
    #[arg(long)]
    pub graph: PathBuf,
    /// Lines `+|-<TAB>head<TAB>relation<TAB>tail`.
    #[arg(long)]
    pub delta: PathBuf,
    /// TransE model trained on the graph before the delta.
    #[arg(long)]
    pub model: PathBuf,
    /// Updated model file.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = LayerArg::Composite)]
    pub layer: LayerArg,
    #[arg(long, default_value_t = 1)]
    pub min_neighbors: usize,
    #[arg(long, value_enum, default_value_t = FallbackArg::Zero)]
    pub fallback: FallbackArg,
    #[arg(long, value_enum, default_value_t = ScopeArg::New)]
    pub scope: ScopeArg,
    /// Change report JSON, `-` for stdout.
    #[arg(long, default_value = "-")]
    pub report: PathBuf,
}

#[derive(Debug, Args)]
pub struct ServiceArgs {
    /// `http(s)://` URL or a fixture directory (default from the environment).
    #[arg(long)]
    pub endpoint: Option<String>,
    /// Save live responses as fixtures under this directory.
    #[arg(long)]
    pub record: Option<PathBuf>,
    /// Refuse all network access.
    #[arg(long)]
    pub offline: bool,
}

#[derive(Debug, Subcommand)]
pub enum LinkCommand {
    /// Annotate text with DBpedia resources.
    Dbpedia {
        text: String,
        /// Spotlight confidence threshold in [0, 1].
        #[arg(long)]
        confidence: f64,
        #[command(flatten)]
        service: ServiceArgs,
    },
    /// ConceptNet relations between two concepts.
    Conceptnet {
        a: String,
        b: String,
        #[command(flatten)]
        service: ServiceArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExportFormat {
    Dot,
    Graphml,
    Ntriples,
    Tsv,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    /// Graph directory.
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, value_enum)]
    pub format: ExportFormat,
    #[arg(long, default_value = "-")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// `name=file` embedding or model JSON; repeatable.
    #[arg(long = "embeddings", required = true)]
    pub embeddings: Vec<String>,
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[arg(long, value_enum, default_value_t = LinkageArg::Average)]
    pub linkage: LinkageArg,
    #[arg(long, value_enum, default_value_t = ReportFormat::Csv)]
    pub format: ReportFormat,
    #[arg(long, default_value = "-")]
    pub out: PathBuf,
}

fn init_logging(global: &GlobalArgs) {
    let level = match global.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let mut builder = env_logger::Builder::new();
    builder.filter_level(level).parse_default_env();
    if global.log == LogFormat::Json {
        builder.format(|buf, record| {
            use std::io::Write;
            let line = serde_json::json!({
                "ts": buf.timestamp_millis().to_string(),
                "level": record.level().as_str(),
                "target": record.target(),
                "message": record.args().to_string(),
            });
            writeln!(buf, "{line}")
        });
    }
    let _ = builder.try_init();
}

fn parse(argv: Vec<String>) -> Result<Cli, clap::Error> {
    Cli::try_parse_from(config::to_os(argv))
}

/// Run with full argv (program name first) and return the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let argv: Vec<String> = argv.into_iter().map(|a| a.into().to_string_lossy().into_owned()).collect();
    let argv = match config::config_path(&argv) {
        Some(path) => match config::load(&path).and_then(|t| config::merge(&Cli::command(), argv, &t, &path)) {
            Ok(a) => a,
            Err(e) => {
                eprintln!("error: {e}");
                return e.exit_code();
            }
        },
        None => argv,
    };
    let cli = match parse(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    init_logging(&cli.global);
    let result = match cli.global.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n as usize).build() {
            Ok(pool) => pool.install(|| commands::dispatch(&cli)),
            Err(e) => Err(CliError::flag("--threads", e)),
        },
        None => commands::dispatch(&cli),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }
}
