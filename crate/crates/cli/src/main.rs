//! `submatch` command-line tool.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use submatch::fuzz::{plant_query, plant_query_shaped, run_noise_sweep, Planted};
use submatch::io::{load_config, load_graph, save_graph, ConfigDocument, MappingDocument};
use submatch::synth::{cfg_like, random_connected};
use submatch::{
    AttributeSelector, AttributedGraph, DocumentError, FuzzError, GraphError, MatchError, MatchMode, Matcher,
    NodeId, ParamError,
};
use thiserror::Error;

const EXIT_NO_START_NODES: u8 = 3;
const EXIT_INVALID: u8 = 4;
const EXIT_NO_MAPPING: u8 = 5;

#[derive(Debug, Error)]
enum CliError {
    #[error(transparent)]
    Document(#[from] DocumentError),
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Fuzz(#[from] FuzzError),
    #[error(transparent)]
    Match(MatchError),
    #[error("no mapping found")]
    NoMapping,
    #[error("{path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
}

impl From<MatchError> for CliError {
    fn from(e: MatchError) -> Self {
        match e {
            MatchError::Params(p) => CliError::Params(p),
            other => CliError::Match(other),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Match(MatchError::NoStartNodes { .. }) => EXIT_NO_START_NODES,
            CliError::NoMapping => EXIT_NO_MAPPING,
            _ => EXIT_INVALID,
        }
    }
}

#[derive(Parser)]
#[command(name = "submatch", version, about = "Inexact subgraph matching for attributed graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Find the query graph inside the target graph.
    Match(MatchArgs),
    /// List start nodes and their candidates as JSON.
    FindStarts(FindStartsArgs),
    /// Plant a query in the target, add noise, match it back and score it.
    Fuzz(FuzzArgs),
    /// Write a synthetic graph or a planted query.
    #[command(subcommand)]
    Generate(Generate),
}

/// Overrides for values in the config file.
#[derive(Args, Default)]
struct ParamArgs {
    /// TOML config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Only accept zero-cost pairings.
    #[arg(long)]
    exact: bool,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    lambda1: Option<f64>,
    #[arg(long)]
    lambda2: Option<f64>,
    /// Largest acceptable local cost of a pairing.
    #[arg(long)]
    threshold: Option<f64>,
    /// Minimum attribute similarity for a candidate pairing.
    #[arg(long)]
    candidate_threshold: Option<f64>,
    /// Comma-separated node attribute keys to compare (default: all).
    #[arg(long, value_delimiter = ',')]
    attrs: Option<Vec<String>>,
    #[arg(long)]
    max_backtracks: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
}

impl ParamArgs {
    fn config(&self) -> Result<ConfigDocument, CliError> {
        let mut c = match &self.config {
            Some(p) => load_config(p)?,
            None => ConfigDocument::default(),
        };
        if self.exact {
            c.mode = MatchMode::Exact;
        }
        macro_rules! apply {
            ($($field:ident => $target:ident),*) => {
                $(if let Some(v) = self.$field.clone() { c.$target = v; })*
            };
        }
        apply!(k => k, gamma => gamma, lambda1 => lambda1, lambda2 => lambda2,
               threshold => pairing_cost_threshold, candidate_threshold => candidate_threshold,
               max_backtracks => max_backtracks, seed => seed, trials => trials);
        if let Some(keys) = &self.attrs {
            c.attributes = AttributeSelector::keys(keys.iter().map(|k| k.trim().to_string()))?;
        }
        c.params().validate()?;
        Ok(c)
    }
}

#[derive(Args)]
struct MatchArgs {
    /// Target graph (JSON).
    target: PathBuf,
    /// Query graph (JSON).
    query: PathBuf,
    /// Output file for the mapping document (default: stdout).
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Include wall-clock runtime in the output.
    #[arg(long)]
    runtime: bool,
    #[command(flatten)]
    params: ParamArgs,
}

#[derive(Args)]
struct FindStartsArgs {
    target: PathBuf,
    query: PathBuf,
    #[command(flatten)]
    params: ParamArgs,
}

#[derive(Args)]
struct FuzzArgs {
    /// Target graph (JSON).
    target: PathBuf,
    /// Number of nodes in the planted query.
    #[arg(long)]
    plant_nodes: usize,
    /// Preferred number of induced edges in the planted query.
    #[arg(long)]
    plant_edges: Option<usize>,
    /// Grow the plant from this node instead of a random one.
    #[arg(long)]
    plant_seed_node: Option<String>,
    #[arg(long, default_value_t = 2000)]
    plant_attempts: usize,
    /// Comma-separated structural noise levels.
    #[arg(long, value_delimiter = ',')]
    structural: Option<Vec<f64>>,
    /// Comma-separated attribute noise levels.
    #[arg(long, value_delimiter = ',')]
    attribute: Option<Vec<f64>>,
    /// Output CSV file (default: stdout).
    #[arg(long, short)]
    out: Option<PathBuf>,
    #[command(flatten)]
    params: ParamArgs,
}

#[derive(Subcommand)]
enum Generate {
    /// Directed control-flow-like graph.
    Cfg {
        #[arg(long, default_value_t = 1765)]
        nodes: usize,
        #[arg(long, default_value_t = 3111)]
        edges: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Connected undirected graph with unique node attributes.
    Connected {
        #[arg(long)]
        nodes: usize,
        #[arg(long, default_value_t = 3.0)]
        mean_degree: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Cut a connected query out of a target.
    Plant {
        target: PathBuf,
        #[arg(long)]
        nodes: usize,
        #[arg(long)]
        edges: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, short)]
        out: PathBuf,
        /// Also write the correct pairs as JSON.
        #[arg(long)]
        truth: Option<PathBuf>,
    },
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => fs::write(p, text).map_err(|source| CliError::Write {
            path: p.display().to_string(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run_match(args: &MatchArgs) -> Result<(), CliError> {
    let config = args.params.config()?;
    let params = config.params();
    let target = load_graph(&args.target)?;
    let query = load_graph(&args.query)?;
    info!(
        "target {} nodes, query {} nodes",
        target.node_count(),
        query.node_count()
    );
    let result = Matcher::new(&target, &query, &params)?.run()?;
    let doc = MappingDocument::from_result(&result, &target, &query, &params, args.runtime)?;
    emit(args.out.as_deref(), &doc.to_json())?;
    if doc.mappings.is_empty() {
        return Err(CliError::NoMapping);
    }
    Ok(())
}

#[derive(Serialize)]
struct StartRecord {
    target: NodeId,
    candidates: Vec<NodeId>,
}

#[derive(Serialize)]
struct StartsDocument {
    k: usize,
    start_nodes: Vec<StartRecord>,
}

fn run_find_starts(args: &FindStartsArgs) -> Result<(), CliError> {
    let params = args.params.config()?.params();
    let target = load_graph(&args.target)?;
    let query = load_graph(&args.query)?;
    let matcher = Matcher::new(&target, &query, &params)?;
    let starts = matcher.start_nodes();
    let doc = StartsDocument {
        k: params.k,
        start_nodes: starts
            .to_id_pairs(&target, &query)
            .into_iter()
            .map(|(target, candidates)| StartRecord { target, candidates })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("start nodes serialize");
    text.push('\n');
    emit(None, &text)?;
    if starts.is_empty() {
        return Err(MatchError::NoStartNodes { k: params.k }.into());
    }
    Ok(())
}

fn plant(
    target: &AttributedGraph,
    seed_node: Option<&str>,
    nodes: usize,
    edges: Option<usize>,
    attempts: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Planted, CliError> {
    Ok(match seed_node {
        Some(id) => {
            let seed_node = NodeId::from(id);
            let (query, truth) = plant_query(target, &seed_node, nodes, rng)?;
            Planted {
                query,
                truth,
                seed_node,
            }
        }
        None => plant_query_shaped(target, nodes, edges, attempts, rng)?,
    })
}

fn run_fuzz(args: &FuzzArgs) -> Result<(), CliError> {
    let config = args.params.config()?;
    let params = config.params();
    let target = load_graph(&args.target)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let planted = plant(
        &target,
        args.plant_seed_node.as_deref(),
        args.plant_nodes,
        args.plant_edges,
        args.plant_attempts,
        &mut rng,
    )?;
    info!(
        "planted {} nodes, {} edges from {}",
        planted.query.node_count(),
        planted.query.edge_count(),
        planted.seed_node
    );
    let structural = args.structural.clone().unwrap_or(vec![config.structural_level]);
    let attribute = args.attribute.clone().unwrap_or(vec![config.attribute_level]);
    let grid: Vec<(f64, f64)> = structural
        .iter()
        .flat_map(|&s| attribute.iter().map(move |&a| (s, a)))
        .collect();
    let report = run_noise_sweep(&target, &planted, &grid, &params, config.trials, config.seed)?;
    emit(args.out.as_deref(), &report.to_csv())
}

#[derive(Serialize)]
struct TruthRecord<'a> {
    target: &'a NodeId,
    query: &'a NodeId,
}

fn run_generate(g: &Generate) -> Result<(), CliError> {
    match g {
        Generate::Cfg {
            nodes,
            edges,
            seed,
            out,
        } => {
            let graph = cfg_like(*nodes, *edges, &mut ChaCha8Rng::seed_from_u64(*seed))?;
            save_graph(&graph, out)?;
        }
        Generate::Connected {
            nodes,
            mean_degree,
            seed,
            out,
        } => {
            let graph = random_connected(*nodes, *mean_degree, &mut ChaCha8Rng::seed_from_u64(*seed))?;
            save_graph(&graph, out)?;
        }
        Generate::Plant {
            target,
            nodes,
            edges,
            seed,
            out,
            truth,
        } => {
            let target = load_graph(target)?;
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let planted = plant(&target, None, *nodes, *edges, 2000, &mut rng)?;
            save_graph(&planted.query, out)?;
            if let Some(path) = truth {
                let records: Vec<TruthRecord> = planted
                    .truth
                    .pairs
                    .iter()
                    .map(|(target, query)| TruthRecord { target, query })
                    .collect();
                let mut text = serde_json::to_string_pretty(&records).expect("truth serializes");
                text.push('\n');
                emit(Some(path), &text)?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("SUBMATCH_LOG")).init();
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Match(a) => run_match(a),
        Command::FindStarts(a) => run_find_starts(a),
        Command::Fuzz(a) => run_fuzz(a),
        Command::Generate(g) => run_generate(g),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("submatch: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
