//! On-disk run report: manifest, evaluation figures, and stage timings.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use iteralign::eval::{EvalReport, RankMode};
use iteralign::AlignConfig;

/// Everything needed to replay a run: input paths, the parsed configuration,
/// and the tool version. Timings live outside the manifest so replays can be
/// compared byte for byte.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub source: String,
    pub target: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truth: Option<String>,
    pub strategy: String,
    pub diffusion: String,
    pub steps: usize,
    pub k_per_iter: usize,
    pub normalize: bool,
    pub degree_threshold: usize,
    pub max_iterations: usize,
    pub seed: u64,
    pub rank_mode: String,
    pub hits_at: Vec<usize>,
}

impl RunManifest {
    pub fn new(
        source: &str,
        target: &str,
        truth: Option<&str>,
        config: &AlignConfig,
        rank_mode: RankMode,
        hits_at: &[usize],
    ) -> RunManifest {
        RunManifest {
            source: source.to_owned(),
            target: target.to_owned(),
            truth: truth.map(str::to_owned),
            strategy: config.strategy.as_str().to_owned(),
            diffusion: config.diffusion.kind.as_str().to_owned(),
            steps: config.diffusion.steps,
            k_per_iter: config.k_per_iter,
            normalize: config.postprocess.normalize,
            degree_threshold: config.first_iter_degree_threshold,
            max_iterations: config.max_iterations,
            seed: config.seed,
            rank_mode: rank_mode.as_str().to_owned(),
            hits_at: hits_at.to_vec(),
        }
    }
}

/// The full report written by `align`: deterministic content first, wall
/// clock last.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub tool: String,
    pub version: String,
    pub manifest: RunManifest,
    pub report: EvalReport,
    pub timings_ms: BTreeMap<String, u128>,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
