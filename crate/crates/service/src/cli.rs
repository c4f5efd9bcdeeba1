//! The `kgrec` command line.

use std::fs;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kgrec::embedding::{train_with, BatchOrder, ComplexDiagonal, RelationInit, TrainingConfig};
use kgrec::eval::{
    evaluate, kfold_split, EmbeddingRecommender, EvalDataset, EvalOptions, PopularityBaseline, RandomBaseline,
    Recommender,
};
use kgrec::explain::{build_explanation, explanation_stats, ExplainOptions, ExplanationBundle, Neighborhood, SynonymLexicon};
use kgrec::graph::{graph_stats, load_dataset, GraphVariant, KnowledgeGraph, LoadOptions, NodeKind};
use kgrec::Model;
use serde::Serialize;

use crate::session::ApiSession;

pub type CliResult<T = ()> = std::result::Result<T, Box<dyn std::error::Error + Send + Sync>>;

#[derive(Debug, Parser)]
#[command(name = "kgrec", version, about = "Knowledge graph embeddings for explainable recommendation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse rating, opinion and review files and write the knowledge graph.
    Ingest(IngestArgs),
    /// Train embeddings on a graph; prints one JSON object per epoch.
    Train(TrainArgs),
    /// Top-N items for a user as `rank<TAB>item<TAB>score` lines.
    Recommend(RecommendArgs),
    /// Cross-validated comparison of recommenders.
    Evaluate(EvaluateArgs),
    /// Aspect-opinion explanation bundle for one user.
    Explain(ExplainArgs),
    /// Summary statistics over a directory of explanation bundles.
    ExplainStats(ExplainStatsArgs),
    /// Serve the HTTP API.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long, env = "KGREC_RATINGS")]
    pub ratings: PathBuf,
    #[arg(long, env = "KGREC_OPINIONS")]
    pub opinions: PathBuf,
    /// Only parsed here for validation; `serve` reads the file itself.
    #[arg(long, env = "KGREC_REVIEWS")]
    pub reviews: Option<PathBuf>,
    #[arg(long, default_value = "GERA")]
    pub variant: GraphVariant,
    #[arg(long)]
    pub min_user_ratings: Option<usize>,
    #[arg(long, env = "KGREC_GRAPH")]
    pub out: PathBuf,
    /// Write dataset statistics as JSON.
    #[arg(long)]
    pub stats: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum InitArg {
    Identity,
    Uniform,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum OrderArg {
    Shuffled,
    File,
}

#[derive(Debug, Args)]
pub struct Hyper {
    #[arg(long, default_value_t = 400)]
    pub dim: usize,
    #[arg(long, default_value_t = 0.01)]
    pub lr: f64,
    #[arg(long, default_value_t = 5)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0.1)]
    pub margin: f64,
    #[arg(long, default_value_t = 10)]
    pub negatives: usize,
    #[arg(long, default_value_t = 1)]
    pub partitions: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = InitArg::Identity)]
    pub relation_init: InitArg,
    #[arg(long, value_enum, default_value_t = OrderArg::Shuffled)]
    pub batch_order: OrderArg,
}

impl Hyper {
    pub fn config(&self) -> TrainingConfig {
        TrainingConfig {
            dimension: self.dim,
            learning_rate: self.lr,
            epochs: self.epochs,
            margin: self.margin,
            negatives_per_positive: self.negatives,
            seed: self.seed,
            partitions: self.partitions,
            batch_order: match self.batch_order {
                OrderArg::Shuffled => BatchOrder::Shuffled,
                OrderArg::File => BatchOrder::FileOrder,
            },
            relation_init: match self.relation_init {
                InitArg::Identity => RelationInit::Identity,
                InitArg::Uniform => RelationInit::Uniform,
            },
        }
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long, env = "KGREC_GRAPH")]
    pub graph: PathBuf,
    #[command(flatten)]
    pub hyper: Hyper,
    #[arg(long, env = "KGREC_MODEL")]
    pub out: PathBuf,
    /// Write the epoch log here instead of standard output.
    #[arg(long)]
    pub log: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RecommendArgs {
    #[arg(long, env = "KGREC_MODEL")]
    pub model: PathBuf,
    #[arg(long, env = "KGREC_GRAPH")]
    pub graph: PathBuf,
    #[arg(long)]
    pub user: String,
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    #[arg(long)]
    pub include_seen: bool,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long, env = "KGREC_RATINGS")]
    pub ratings: PathBuf,
    #[arg(long, env = "KGREC_OPINIONS")]
    pub opinions: PathBuf,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    #[arg(long, value_delimiter = ',', default_value = "10,20,30")]
    pub ks: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "rdm,pop,ger,gea,gera")]
    pub models: Vec<String>,
    #[command(flatten)]
    pub hyper: Hyper,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExplainArgs {
    #[arg(long, env = "KGREC_MODEL")]
    pub model: PathBuf,
    #[arg(long, env = "KGREC_GRAPH")]
    pub graph: PathBuf,
    #[arg(long)]
    pub user: String,
    #[arg(long, default_value_t = 30)]
    pub cutoff: usize,
    #[arg(long, default_value_t = 20)]
    pub neighbors: usize,
    /// Explicit neighbourhood; overrides `--neighbors`.
    #[arg(long, value_delimiter = ',')]
    pub neighbor_users: Option<Vec<String>>,
    #[arg(long)]
    pub include_seen: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExplainStatsArgs {
    /// Directory of bundle `.json` files.
    #[arg(long)]
    pub bundles: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, env = "KGREC_MODEL")]
    pub model: PathBuf,
    #[arg(long, env = "KGREC_GRAPH")]
    pub graph: PathBuf,
    #[arg(long, env = "KGREC_REVIEWS")]
    pub reviews: Option<PathBuf>,
    /// `variant<TAB>canonical` aspect synonyms for review highlighting.
    #[arg(long, env = "KGREC_LEXICON")]
    pub lexicon: Option<PathBuf>,
    #[arg(long, env = "KGREC_HOST", default_value = "127.0.0.1")]
    pub host: std::net::IpAddr,
    #[arg(long, env = "KGREC_PORT", default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value_t = 0)]
    pub projection_seed: u64,
}

fn write_json<T: Serialize>(value: &T, out: Option<&Path>, stdout: &mut dyn Write) -> CliResult {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        Some(path) => fs::write(path, text + "\n")?,
        None => writeln!(stdout, "{text}")?,
    }
    Ok(())
}

fn ingest(a: &IngestArgs, stdout: &mut dyn Write) -> CliResult {
    let options = LoadOptions {
        min_user_ratings: a.min_user_ratings,
    };
    let data = load_dataset(&a.ratings, &a.opinions, a.reviews.as_deref(), options)?;
    let (graph, rejected) = KnowledgeGraph::build(&data.ratings, &data.opinions, a.variant);
    for e in &rejected {
        log::warn!("rejected: {e}");
    }
    graph.save(&a.out)?;
    let stats = graph_stats(&data.ratings, &data.opinions);
    if let Some(path) = &a.stats {
        write_json(&stats, Some(path), stdout)?;
    }
    writeln!(
        stdout,
        "{} users, {} items, {} aspects, {} edges ({} warnings, {} rejected records)",
        graph.node_count(NodeKind::User),
        graph.node_count(NodeKind::Item),
        graph.node_count(NodeKind::Aspect),
        graph.edge_count(),
        data.warnings.len(),
        rejected.len()
    )?;
    Ok(())
}

fn train(a: &TrainArgs, stdout: &mut dyn Write) -> CliResult {
    let graph = KnowledgeGraph::load(&a.graph)?;
    let mut sink: Box<dyn Write + '_> = match &a.log {
        Some(path) => Box::new(fs::File::create(path)?),
        None => Box::new(&mut *stdout),
    };
    let mut failed = None;
    let outcome = train_with::<f32, _, _>(&graph, &a.hyper.config(), &ComplexDiagonal, |epoch| {
        let line = serde_json::to_string(epoch).expect("epoch stats serialize");
        if let Err(e) = writeln!(sink, "{line}") {
            failed.get_or_insert(e);
        }
    })?;
    if let Some(e) = failed {
        return Err(e.into());
    }
    outcome.model.save(&a.out)?;
    Ok(())
}

pub fn recommend_lines(a: &RecommendArgs) -> CliResult<Vec<String>> {
    let session = ApiSession::load(&a.model, &a.graph, None)?;
    let entries = session.recommendations(&a.user, a.n, a.include_seen).map_err(|e| e.message)?;
    Ok(entries
        .into_iter()
        .map(|e| format!("{}\t{}\t{}", e.rank, e.item, e.score))
        .collect())
}

fn parse_models(names: &[String], hyper: &Hyper) -> CliResult<Vec<Box<dyn Recommender>>> {
    names
        .iter()
        .map(|name| -> CliResult<Box<dyn Recommender>> {
            Ok(match name.to_ascii_lowercase().as_str() {
                "rdm" => Box::new(RandomBaseline { seed: hyper.seed }),
                "pop" => Box::new(PopularityBaseline),
                other => Box::new(EmbeddingRecommender {
                    variant: other.parse().map_err(|_| format!("unknown model `{name}`"))?,
                    config: hyper.config(),
                }),
            })
        })
        .collect()
}

fn run_evaluate(a: &EvaluateArgs, stdout: &mut dyn Write) -> CliResult {
    let data = load_dataset(&a.ratings, &a.opinions, None, LoadOptions::default())?;
    let dataset = EvalDataset::new(&data.ratings, &data.opinions);
    let plan = kfold_split(&dataset.ratings, a.folds, a.hyper.seed)?;
    let models = parse_models(&a.models, &a.hyper)?;
    let refs: Vec<&dyn Recommender> = models.iter().map(|m| m.as_ref()).collect();
    let options = EvalOptions {
        ks: a.ks.clone(),
        ..Default::default()
    };
    let report = evaluate(&refs, &dataset, &plan, &options)?;
    match &a.out {
        Some(path) => fs::write(path, report.to_json() + "\n")?,
        None => writeln!(stdout, "{}", report.to_json())?,
    }
    for m in &report.models {
        let f1: Vec<String> = a
            .ks
            .iter()
            .map(|&k| format!("F1@{k}={:.4}", m.mean_f1(k).unwrap_or(f64::NAN)))
            .collect();
        log::info!("{} {}", m.name, f1.join(" "));
    }
    Ok(())
}

pub fn explain_bundle(a: &ExplainArgs) -> CliResult<ExplanationBundle> {
    let model = Model::load(&a.model)?;
    let graph = KnowledgeGraph::load(&a.graph)?;
    let user = graph.require(NodeKind::User, &a.user)?;
    let neighborhood = match &a.neighbor_users {
        Some(keys) => Neighborhood::Users(
            keys.iter()
                .map(|k| graph.require(NodeKind::User, k))
                .collect::<kgrec::Result<_>>()?,
        ),
        None => Neighborhood::Nearest(a.neighbors),
    };
    let options = ExplainOptions {
        cutoff: a.cutoff,
        neighborhood,
        exclude_seen: !a.include_seen,
    };
    Ok(build_explanation(&model, &graph, user, &options)?)
}

pub fn read_bundles(dir: &Path) -> CliResult<Vec<ExplanationBundle>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    paths.retain(|p| p.extension().is_some_and(|e| e == "json"));
    paths.sort();
    paths
        .iter()
        .map(|p| -> CliResult<ExplanationBundle> {
            let text = fs::read_to_string(p)?;
            serde_json::from_str(&text).map_err(|e| format!("{}: {e}", p.display()).into())
        })
        .collect()
}

fn serve(a: &ServeArgs) -> CliResult {
    let mut session = ApiSession::load(&a.model, &a.graph, a.reviews.as_deref())?;
    session.projection_seed = a.projection_seed;
    if let Some(path) = &a.lexicon {
        session.lexicon = Some(SynonymLexicon::load(path)?);
    }
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(crate::api::serve(Arc::new(session), SocketAddr::new(a.host, a.port)))?;
    Ok(())
}

pub fn run(cli: Cli, stdout: &mut dyn Write) -> CliResult {
    match cli.command {
        Command::Ingest(a) => ingest(&a, stdout),
        Command::Train(a) => train(&a, stdout),
        Command::Recommend(a) => {
            for line in recommend_lines(&a)? {
                writeln!(stdout, "{line}")?;
            }
            Ok(())
        }
        Command::Evaluate(a) => run_evaluate(&a, stdout),
        Command::Explain(a) => write_json(&explain_bundle(&a)?, a.out.as_deref(), stdout),
        Command::ExplainStats(a) => write_json(&explanation_stats(&read_bundles(&a.bundles)?)?, a.out.as_deref(), stdout),
        Command::Serve(a) => serve(&a),
    }
}
