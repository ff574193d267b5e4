//! Ranking construction and the Hits@Q / MRR / accuracy metrics for an
//! alignment run.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diffusion::{
    build_diffusion_matrix, diffuse, init_features_anchored, init_features_identity,
};
use crate::driver::{AlignmentResult, Anchor};
use crate::error::{Error, Result};
use crate::features::{normalize_rows, pad_to_common_dim, reorder_rows};
use crate::graph::{Graph, GroundTruth};
use crate::matching::euclidean;

/// Which embeddings rank the candidates for Hits@Q / MRR.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum RankMode {
    /// One final anchored initialization over the complete anchor set,
    /// diffused and post-processed like a regular iteration.
    #[default]
    FinalAnchored,
    /// The first iteration's identity-initialized embeddings.
    FirstIteration,
}

impl RankMode {
    pub fn as_str(self) -> &'static str {
        match self {
            RankMode::FinalAnchored => "final-anchored",
            RankMode::FirstIteration => "first-iteration",
        }
    }
}

/// For every ground-truth source node, the 1-based rank of its true
/// counterpart among all target nodes by ascending embedding distance, ties
/// broken by target index.
#[derive(Debug, Clone)]
pub struct RankTable {
    ranks: Vec<u32>,
}

impl RankTable {
    pub fn from_ranks(ranks: Vec<u32>) -> RankTable {
        debug_assert!(ranks.iter().all(|&r| r >= 1));
        RankTable { ranks }
    }

    pub fn ranks(&self) -> &[u32] {
        &self.ranks
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }
}

/// Builds the rank table for `truth` using the embeddings selected by
/// `mode`. With [`RankMode::FinalAnchored`] the complete anchor set is
/// re-injected and diffused once more; if the run produced no anchors this
/// falls back to the identity-initialized embeddings.
pub fn build_rank_table(
    result: &AlignmentResult,
    source: &Graph,
    target: &Graph,
    truth: &GroundTruth,
    mode: RankMode,
) -> Result<RankTable> {
    let config = result.config();
    let qs = build_diffusion_matrix(source, config.diffusion.kind)?;
    let qt = build_diffusion_matrix(target, config.diffusion.kind)?;
    let anchors = result.anchor_set().pairs();
    let (hs0, ht0) = if mode == RankMode::FinalAnchored && !anchors.is_empty() {
        init_features_anchored(source, target, &anchors)?
    } else {
        (
            init_features_identity(source),
            init_features_identity(target),
        )
    };
    let steps = config.diffusion.steps.max(1);
    let hs = reorder_rows(&diffuse(&qs, &hs0, steps)?);
    let ht = reorder_rows(&diffuse(&qt, &ht0, steps)?);
    let (mut hs, mut ht) = pad_to_common_dim(&hs, &ht);
    if config.postprocess.normalize {
        hs = normalize_rows(&hs);
        ht = normalize_rows(&ht);
    }

    let ranks: Vec<u32> = truth
        .pairs()
        .par_iter()
        .map(|&(u, v)| {
            let query = hs.row(u);
            let dists: Vec<f32> = (0..target.node_count())
                .map(|j| euclidean(query, ht.row(j)))
                .collect();
            rank_among(&dists, v)
        })
        .collect();
    Ok(RankTable::from_ranks(ranks))
}

/// 1-based rank of index `true_idx` when all entries are sorted by ascending
/// distance with ties broken by index.
fn rank_among(dists: &[f32], true_idx: usize) -> u32 {
    let true_dist = dists[true_idx];
    let mut rank = 1u32;
    for (j, &d) in dists.iter().enumerate() {
        if j != true_idx && (d < true_dist || (d == true_dist && j < true_idx)) {
            rank += 1;
        }
    }
    rank
}

/// Fraction of ground-truth pairs whose true counterpart ranks within the
/// top `q`.
pub fn hits_at_q(table: &RankTable, q: usize) -> f64 {
    if table.is_empty() {
        return 0.0;
    }
    let hits = table.ranks().iter().filter(|&&r| r as usize <= q).count();
    hits as f64 / table.len() as f64
}

/// Mean reciprocal rank over all ground-truth pairs.
pub fn mrr(table: &RankTable) -> Result<f64> {
    if table.is_empty() {
        return Err(Error::EmptyGroundTruth);
    }
    let sum: f64 = table.ranks().iter().map(|&r| 1.0 / r as f64).sum();
    Ok(sum / table.len() as f64)
}

/// Fraction of ground-truth pairs that the matching reproduced exactly. The
/// truth set defines the denominator.
pub fn matching_accuracy(anchors: &[Anchor], truth: &GroundTruth) -> f64 {
    if truth.is_empty() {
        return 0.0;
    }
    let correct = anchors
        .iter()
        .filter(|a| truth.contains(a.source, a.target))
        .count();
    correct as f64 / truth.len() as f64
}

/// Evaluation summary of one alignment run, serializable to JSON (struct
/// field order is the canonical key order) and to a flat CSV row.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalReport {
    pub source_nodes: usize,
    pub source_edges: usize,
    pub target_nodes: usize,
    pub target_edges: usize,
    pub strategy: String,
    pub diffusion: String,
    pub steps: usize,
    pub k_per_iter: usize,
    pub normalize: bool,
    pub degree_threshold: usize,
    pub max_iterations: usize,
    pub seed: u64,
    pub rank_mode: String,
    pub matching_size: usize,
    pub iterations: usize,
    pub per_iteration: Vec<usize>,
    pub termination: String,
    pub tub: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matching_accuracy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hits: Option<BTreeMap<usize, f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mrr: Option<f64>,
    pub notes: Vec<String>,
}

impl EvalReport {
    /// Assembles the report for a finished run. `truth` enables the
    /// ranking metrics and exact-match accuracy; `hits_at` lists the Q
    /// cutoffs to report.
    pub fn build(
        result: &AlignmentResult,
        source: &Graph,
        target: &Graph,
        truth: Option<&GroundTruth>,
        rank_mode: RankMode,
        hits_at: &[usize],
        tub: f64,
    ) -> Result<EvalReport> {
        let config = result.config();
        let mut notes = Vec::new();
        let (accuracy, hits, mean_rr) = match truth {
            Some(truth) if !truth.is_empty() => {
                let table = build_rank_table(result, source, target, truth, rank_mode)?;
                let hits: BTreeMap<usize, f64> =
                    hits_at.iter().map(|&q| (q, hits_at_q(&table, q))).collect();
                notes.push(
                    "hits/mrr are ranked from re-diffused embeddings selected by rank_mode; \
                     matching_accuracy scores the matching itself"
                        .to_owned(),
                );
                (
                    Some(matching_accuracy(result.anchors(), truth)),
                    Some(hits),
                    Some(mrr(&table)?),
                )
            }
            _ => (None, None, None),
        };
        if source.node_count() != target.node_count() {
            notes.push(
                "graphs differ in size; first-iteration embeddings were zero-padded \
                 on the left to a common dimension"
                    .to_owned(),
            );
        }
        Ok(EvalReport {
            source_nodes: source.node_count(),
            source_edges: source.edge_count(),
            target_nodes: target.node_count(),
            target_edges: target.edge_count(),
            strategy: config.strategy.as_str().to_owned(),
            diffusion: config.diffusion.kind.as_str().to_owned(),
            steps: config.diffusion.steps,
            k_per_iter: config.k_per_iter,
            normalize: config.postprocess.normalize,
            degree_threshold: config.first_iter_degree_threshold,
            max_iterations: config.max_iterations,
            seed: config.seed,
            rank_mode: rank_mode.as_str().to_owned(),
            matching_size: result.len(),
            iterations: result.per_iteration().len(),
            per_iteration: result.per_iteration().to_vec(),
            termination: result.termination().as_str().to_owned(),
            tub,
            matching_accuracy: accuracy,
            hits,
            mrr: mean_rr,
            notes,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// CSV column names matching [`EvalReport::csv_row`].
    pub fn csv_header(hits_at: &[usize]) -> String {
        let mut cols = vec![
            "source_nodes".to_owned(),
            "source_edges".to_owned(),
            "target_nodes".to_owned(),
            "target_edges".to_owned(),
            "strategy".to_owned(),
            "diffusion".to_owned(),
            "steps".to_owned(),
            "k_per_iter".to_owned(),
            "normalize".to_owned(),
            "seed".to_owned(),
            "matching_size".to_owned(),
            "iterations".to_owned(),
            "termination".to_owned(),
            "tub".to_owned(),
            "matching_accuracy".to_owned(),
        ];
        for q in hits_at {
            cols.push(format!("hits_at_{q}"));
        }
        cols.push("mrr".to_owned());
        cols.join(",")
    }

    pub fn csv_row(&self, hits_at: &[usize]) -> String {
        let fmt_opt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:.6}"));
        let mut cols = vec![
            self.source_nodes.to_string(),
            self.source_edges.to_string(),
            self.target_nodes.to_string(),
            self.target_edges.to_string(),
            self.strategy.clone(),
            self.diffusion.clone(),
            self.steps.to_string(),
            self.k_per_iter.to_string(),
            self.normalize.to_string(),
            self.seed.to_string(),
            self.matching_size.to_string(),
            self.iterations.to_string(),
            self.termination.clone(),
            format!("{:.6}", self.tub),
            fmt_opt(self.matching_accuracy),
        ];
        for q in hits_at {
            cols.push(fmt_opt(self.hits.as_ref().and_then(|h| h.get(q).copied())));
        }
        cols.push(fmt_opt(self.mrr));
        cols.join(",")
    }
}
