//! Command-line surface for the alignment pipeline: `align` runs the full
//! loop and writes a report, `tub` computes the structural upper bound,
//! `perturb` removes edges for noise experiments, and `bench` sweeps
//! configurations into a CSV.

mod bench;
mod report;

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufReader, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use iteralign::diffusion::DiffusionConfig;
use iteralign::eval::EvalReport;
use iteralign::features::PostprocessConfig;
use iteralign::graph::{parse_correspondences, parse_edge_list, perturb_edges, write_edge_list};
use iteralign::{run_iteralign, wl, AlignConfig, Error};

use bench::{parse_diffusion, parse_rank_mode, parse_strategy};
use report::{RunManifest, RunReport};

/// Error with the process exit code it should map to: 1 for I/O and parse
/// problems, 2 for infeasible configurations.
#[derive(Debug)]
pub struct CliError {
    message: String,
    code: u8,
}

impl CliError {
    fn new(message: String, code: u8) -> CliError {
        CliError { message, code }
    }

    pub fn usage(message: impl Into<String>) -> CliError {
        CliError::new(message.into(), 1)
    }

    pub fn io(path: &str, err: std::io::Error) -> CliError {
        CliError::new(format!("{path}: {err}"), 1)
    }
}

impl From<Error> for CliError {
    fn from(err: Error) -> CliError {
        let code = match err {
            Error::PerturbationInfeasible { .. }
            | Error::MatchingInfeasible { .. }
            | Error::InvalidRatio { .. }
            | Error::IsolatedNode { .. }
            | Error::EmptyGraph => 2,
            _ => 1,
        };
        CliError::new(err.to_string(), code)
    }
}

pub fn open(path: &str) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::io(path, e))
}

#[derive(Parser)]
#[command(
    name = "iteralign",
    version,
    about = "Unsupervised plain-graph alignment"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Align two graphs and write a JSON report plus a pairs file.
    Align(AlignArgs),
    /// Print the Weisfeiler-Lehman upper bound for a graph pair.
    Tub(TubArgs),
    /// Remove a fraction of edges without isolating any node.
    Perturb(PerturbArgs),
    /// Run a declarative sweep of alignment configurations.
    Bench(BenchArgs),
}

#[derive(Args)]
struct AlignArgs {
    /// Source graph edge list.
    #[arg(long)]
    source: String,
    /// Target graph edge list.
    #[arg(long)]
    target: String,
    /// Ground-truth correspondence file (two labels per line).
    #[arg(long)]
    truth: Option<String>,
    /// Matching strategy: optimal | fast.
    #[arg(long, default_value = "optimal")]
    strategy: String,
    /// Diffusion steps T.
    #[arg(long, default_value_t = 5)]
    steps: usize,
    /// Pairs matched per iteration K.
    #[arg(long, default_value_t = 20)]
    k: usize,
    /// Diffusion operator: rw | sym | sym-selfloop.
    #[arg(long, default_value = "sym-selfloop")]
    diffusion: String,
    /// L2-normalize embeddings after reordering.
    #[arg(long)]
    normalize: bool,
    /// Maximum number of iterations.
    #[arg(long, default_value_t = 1000)]
    max_iters: usize,
    /// Seed recorded in the report (the loop itself is deterministic).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// First-iteration candidates need degree strictly above this.
    #[arg(long, default_value_t = 6)]
    degree_threshold: usize,
    /// Embeddings used for ranking metrics: final-anchored | first-iteration.
    #[arg(long, default_value = "final-anchored")]
    rank_mode: String,
    /// Q cutoffs for Hits@Q.
    #[arg(long, value_delimiter = ',', default_values_t = [1usize, 5, 10])]
    hits_at: Vec<usize>,
    /// Report path; the matching is also written to `<out>.pairs.tsv`.
    #[arg(long, default_value = "report.json")]
    out: String,
}

#[derive(Args)]
struct TubArgs {
    #[arg(long)]
    source: String,
    #[arg(long)]
    target: String,
}

#[derive(Args)]
struct PerturbArgs {
    /// Input edge list.
    #[arg(long)]
    graph: String,
    /// Fraction of edges to remove, in [0, 1).
    #[arg(long)]
    ratio: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output edge list path.
    #[arg(long)]
    out: String,
}

#[derive(Args)]
struct BenchArgs {
    /// Sweep config file (TOML key/value text).
    #[arg(long)]
    config: PathBuf,
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("ITERALIGN_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
        }
    }
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Align(args) => cmd_align(args),
        Command::Tub(args) => cmd_tub(args),
        Command::Perturb(args) => cmd_perturb(args),
        Command::Bench(args) => bench::run_bench(&args.config),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn cmd_align(args: AlignArgs) -> Result<(), CliError> {
    let total_start = Instant::now();
    let mut timings: BTreeMap<String, u128> = BTreeMap::new();

    let parse_start = Instant::now();
    let source = parse_edge_list(open(&args.source)?)?;
    let target = parse_edge_list(open(&args.target)?)?;
    if source.dropped.self_loops + source.dropped.duplicates > 0 {
        eprintln!(
            "{}: dropped {} self-loops, {} duplicate edges",
            args.source, source.dropped.self_loops, source.dropped.duplicates
        );
    }
    if target.dropped.self_loops + target.dropped.duplicates > 0 {
        eprintln!(
            "{}: dropped {} self-loops, {} duplicate edges",
            args.target, target.dropped.self_loops, target.dropped.duplicates
        );
    }
    let truth = args
        .truth
        .as_deref()
        .map(|path| -> Result<_, CliError> {
            Ok(parse_correspondences(
                open(path)?,
                &source.labels,
                &target.labels,
            )?)
        })
        .transpose()?;
    timings.insert("parse".to_owned(), parse_start.elapsed().as_millis());

    let strategy = parse_strategy(&args.strategy)?;
    let kind = parse_diffusion(&args.diffusion)?;
    let rank_mode = parse_rank_mode(&args.rank_mode)?;
    let config = AlignConfig {
        strategy,
        diffusion: DiffusionConfig {
            kind,
            steps: args.steps,
        },
        postprocess: PostprocessConfig {
            normalize: args.normalize,
        },
        k_per_iter: args.k,
        first_iter_degree_threshold: args.degree_threshold,
        max_iterations: args.max_iters,
        seed: args.seed,
    };

    let align_start = Instant::now();
    let result = run_iteralign(&source.graph, &target.graph, &config)?;
    timings.insert("align".to_owned(), align_start.elapsed().as_millis());

    let tub_start = Instant::now();
    let bound = wl::tub(&source.graph, &target.graph);
    timings.insert("tub".to_owned(), tub_start.elapsed().as_millis());

    let eval_start = Instant::now();
    let eval = EvalReport::build(
        &result,
        &source.graph,
        &target.graph,
        truth.as_ref(),
        rank_mode,
        &args.hits_at,
        bound,
    )?;
    timings.insert("eval".to_owned(), eval_start.elapsed().as_millis());
    timings.insert("total".to_owned(), total_start.elapsed().as_millis());

    let manifest = RunManifest::new(
        &args.source,
        &args.target,
        args.truth.as_deref(),
        &config,
        rank_mode,
        &args.hits_at,
    );
    let run_report = RunReport {
        tool: "iteralign".to_owned(),
        version: env!("CARGO_PKG_VERSION").to_owned(),
        manifest,
        report: eval,
        timings_ms: timings,
    };
    fs::write(&args.out, run_report.to_json()).map_err(|e| CliError::io(&args.out, e))?;

    let pairs_path = format!("{}.pairs.tsv", args.out);
    let mut pairs_file = File::create(&pairs_path).map_err(|e| CliError::io(&pairs_path, e))?;
    for anchor in result.anchors() {
        writeln!(
            pairs_file,
            "{}\t{}",
            source.labels.label_of(anchor.source),
            target.labels.label_of(anchor.target)
        )
        .map_err(|e| CliError::io(&pairs_path, e))?;
    }

    println!(
        "matched {} pairs in {} iterations ({}); report: {}",
        result.len(),
        result.per_iteration().len(),
        result.termination().as_str(),
        args.out
    );
    if let Some(accuracy) = run_report.report.matching_accuracy {
        println!("accuracy {accuracy:.4} (tub {bound:.4})");
    }
    Ok(())
}

fn cmd_tub(args: TubArgs) -> Result<(), CliError> {
    let source = parse_edge_list(open(&args.source)?)?;
    let target = parse_edge_list(open(&args.target)?)?;
    let cs = wl::wl_refine(&source.graph);
    let ct = wl::wl_refine(&target.graph);
    let source_bound = cs.class_count() as f64 / source.graph.node_count() as f64;
    let target_bound = ct.class_count() as f64 / target.graph.node_count() as f64;
    let json = serde_json::json!({
        "source_nodes": source.graph.node_count(),
        "source_classes": cs.class_count(),
        "source_bound": source_bound,
        "target_nodes": target.graph.node_count(),
        "target_classes": ct.class_count(),
        "target_bound": target_bound,
        "tub": source_bound.min(target_bound),
    });
    println!("{}", serde_json::to_string_pretty(&json).expect("json"));
    Ok(())
}

fn cmd_perturb(args: PerturbArgs) -> Result<(), CliError> {
    let parsed = parse_edge_list(open(&args.graph)?)?;
    let perturbed = perturb_edges(&parsed.graph, args.ratio, args.seed)?;
    let removed = parsed.graph.edge_count() - perturbed.edge_count();
    let mut out = Vec::new();
    write_edge_list(&perturbed, &parsed.labels, &mut out)
        .map_err(|e| CliError::new(e.to_string(), 1))?;
    fs::write(&args.out, out).map_err(|e| CliError::io(&args.out, e))?;
    println!(
        "removed {removed} of {} edges ({} remain); wrote {}",
        parsed.graph.edge_count(),
        perturbed.edge_count(),
        args.out
    );
    Ok(())
}
