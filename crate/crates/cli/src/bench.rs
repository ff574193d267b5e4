//! Declarative benchmark sweeps: a TOML config lists value grids for steps,
//! K, noise ratios, and seeds; every combination becomes one alignment run
//! and one CSV row.

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::Deserialize;

use iteralign::diffusion::{DiffusionConfig, DiffusionKind};
use iteralign::driver::MatchStrategy;
use iteralign::eval::{EvalReport, RankMode};
use iteralign::features::PostprocessConfig;
use iteralign::graph::{parse_correspondences, parse_edge_list, perturb_edges, Graph, GroundTruth};
use iteralign::{run_iteralign, AlignConfig};

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub source: String,
    pub target: String,
    pub truth: Option<String>,
    pub out: Option<String>,
    #[serde(default = "default_strategies")]
    pub strategy: Vec<String>,
    #[serde(default = "default_diffusions")]
    pub diffusion: Vec<String>,
    pub steps: Vec<usize>,
    pub k: Vec<usize>,
    #[serde(default = "default_ratios", alias = "ratios")]
    pub target_ratios: Vec<f64>,
    #[serde(default = "default_ratios")]
    pub source_ratios: Vec<f64>,
    pub seeds: Vec<u64>,
    /// When omitted, normalization follows the noise level of each run:
    /// enabled whenever edges were removed, disabled on clean runs.
    pub normalize: Option<bool>,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_threshold")]
    pub degree_threshold: usize,
    #[serde(default)]
    pub rank_mode: Option<String>,
    #[serde(default)]
    pub parallel: bool,
}

fn default_strategies() -> Vec<String> {
    vec!["optimal".to_owned()]
}

fn default_diffusions() -> Vec<String> {
    vec!["sym-selfloop".to_owned()]
}

fn default_ratios() -> Vec<f64> {
    vec![0.0]
}

fn default_max_iters() -> usize {
    1000
}

fn default_threshold() -> usize {
    6
}

pub fn parse_strategy(s: &str) -> Result<MatchStrategy, CliError> {
    match s {
        "optimal" => Ok(MatchStrategy::Optimal),
        "fast" => Ok(MatchStrategy::Fast),
        other => Err(CliError::usage(format!(
            "unknown strategy {other:?} (expected optimal|fast)"
        ))),
    }
}

pub fn parse_diffusion(s: &str) -> Result<DiffusionKind, CliError> {
    match s {
        "rw" => Ok(DiffusionKind::RandomWalk),
        "sym" => Ok(DiffusionKind::SymmetricNormalized),
        "sym-selfloop" => Ok(DiffusionKind::SymmetricSelfLoop),
        other => Err(CliError::usage(format!(
            "unknown diffusion kind {other:?} (expected rw|sym|sym-selfloop)"
        ))),
    }
}

pub fn parse_rank_mode(s: &str) -> Result<RankMode, CliError> {
    match s {
        "final-anchored" => Ok(RankMode::FinalAnchored),
        "first-iteration" => Ok(RankMode::FirstIteration),
        other => Err(CliError::usage(format!(
            "unknown rank mode {other:?} (expected final-anchored|first-iteration)"
        ))),
    }
}

struct RunPoint {
    strategy: MatchStrategy,
    diffusion: DiffusionKind,
    steps: usize,
    k: usize,
    source_ratio: f64,
    target_ratio: f64,
    seed: u64,
}

const HITS_AT: [usize; 3] = [1, 5, 10];

pub fn run_bench(config_path: &Path) -> Result<(), CliError> {
    let text = fs::read_to_string(config_path)
        .map_err(|e| CliError::usage(format!("{}: {e}", config_path.display())))?;
    let spec: SweepSpec =
        toml::from_str(&text).map_err(|e| CliError::usage(format!("malformed sweep spec: {e}")))?;

    let mut points = Vec::new();
    for strategy in &spec.strategy {
        let strategy = parse_strategy(strategy)?;
        for diffusion in &spec.diffusion {
            let diffusion = parse_diffusion(diffusion)?;
            for &steps in &spec.steps {
                for &k in &spec.k {
                    for &source_ratio in &spec.source_ratios {
                        for &target_ratio in &spec.target_ratios {
                            for &seed in &spec.seeds {
                                points.push(RunPoint {
                                    strategy,
                                    diffusion,
                                    steps,
                                    k,
                                    source_ratio,
                                    target_ratio,
                                    seed,
                                });
                            }
                        }
                    }
                }
            }
        }
    }
    if points.is_empty() {
        return Err(CliError::usage("sweep produces no runs".to_owned()));
    }
    let rank_mode = spec
        .rank_mode
        .as_deref()
        .map(parse_rank_mode)
        .transpose()?
        .unwrap_or_default();

    let source_parse = parse_edge_list(crate::open(&spec.source)?)?;
    let target_parse = parse_edge_list(crate::open(&spec.target)?)?;
    let truth = spec
        .truth
        .as_deref()
        .map(|path| -> Result<GroundTruth, CliError> {
            Ok(parse_correspondences(
                crate::open(path)?,
                &source_parse.labels,
                &target_parse.labels,
            )?)
        })
        .transpose()?;

    let run_one = |point: &RunPoint| -> Result<String, CliError> {
        let source = perturbed(&source_parse.graph, point.source_ratio, point.seed)?;
        let target = perturbed(
            &target_parse.graph,
            point.target_ratio,
            point.seed.wrapping_add(1),
        )?;
        let noisy = point.source_ratio > 0.0 || point.target_ratio > 0.0;
        let config = AlignConfig {
            strategy: point.strategy,
            diffusion: DiffusionConfig {
                kind: point.diffusion,
                steps: point.steps,
            },
            postprocess: PostprocessConfig {
                normalize: spec.normalize.unwrap_or(noisy),
            },
            k_per_iter: point.k,
            first_iter_degree_threshold: spec.degree_threshold,
            max_iterations: spec.max_iters,
            seed: point.seed,
        };
        let result = run_iteralign(&source, &target, &config)?;
        let bound = iteralign::wl::tub(&source, &target);
        let report = EvalReport::build(
            &result,
            &source,
            &target,
            truth.as_ref(),
            rank_mode,
            &HITS_AT,
            bound,
        )?;
        Ok(format!(
            "{:.4},{:.4},{}",
            point.source_ratio,
            point.target_ratio,
            report.csv_row(&HITS_AT)
        ))
    };

    let rows: Result<Vec<String>, CliError> = if spec.parallel {
        points.par_iter().map(run_one).collect()
    } else {
        points.iter().map(run_one).collect()
    };
    let rows = rows?;

    let mut csv = String::new();
    csv.push_str("source_ratio,target_ratio,");
    csv.push_str(&EvalReport::csv_header(&HITS_AT));
    csv.push('\n');
    for row in rows {
        csv.push_str(&row);
        csv.push('\n');
    }
    match &spec.out {
        Some(path) => fs::write(path, csv).map_err(|e| CliError::io(path, e))?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn perturbed(graph: &Graph, ratio: f64, seed: u64) -> Result<Graph, CliError> {
    if ratio == 0.0 {
        Ok(graph.clone())
    } else {
        Ok(perturb_edges(graph, ratio, seed)?)
    }
}
