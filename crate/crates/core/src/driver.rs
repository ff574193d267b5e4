//! The iterative alignment loop: alternate feature initialization, heat
//! diffusion, post-processing, and matching, growing an anchor set until the
//! smaller graph is covered or progress stops.

use serde::{Deserialize, Serialize};

use crate::diffusion::{
    build_diffusion_matrix, diffuse, init_features_anchored, init_features_identity,
    DiffusionConfig,
};
use crate::error::{Error, Result};
use crate::features::{normalize_rows, pad_to_common_dim, reorder_rows, PostprocessConfig};
use crate::graph::Graph;
use crate::matching::{fast_match, optimal_match, sparse_distances};

/// Node matching strategy for each iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum MatchStrategy {
    /// Assignment-based matching, minimum total distance.
    #[default]
    Optimal,
    /// Per-source nearest-neighbor matching with top-K selection.
    Fast,
}

impl MatchStrategy {
    pub fn as_str(self) -> &'static str {
        match self {
            MatchStrategy::Optimal => "optimal",
            MatchStrategy::Fast => "fast",
        }
    }
}

/// Full configuration of an alignment run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlignConfig {
    pub strategy: MatchStrategy,
    pub diffusion: DiffusionConfig,
    pub postprocess: PostprocessConfig,
    /// Pairs matched per iteration (clamped to the remaining unmatched
    /// count in late iterations).
    pub k_per_iter: usize,
    /// First-iteration candidates are restricted to nodes with degree
    /// strictly above this threshold, on both sides.
    pub first_iter_degree_threshold: usize,
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for AlignConfig {
    fn default() -> Self {
        AlignConfig {
            strategy: MatchStrategy::Optimal,
            diffusion: DiffusionConfig::default(),
            postprocess: PostprocessConfig::default(),
            k_per_iter: 20,
            first_iter_degree_threshold: 6,
            max_iterations: 1000,
            seed: 0,
        }
    }
}

/// A matched node pair together with the iteration that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Anchor {
    pub source: usize,
    pub target: usize,
    pub iteration: usize,
    pub distance: f32,
}

/// Append-only set of anchors, one-to-one on both sides.
#[derive(Debug, Clone, Default)]
pub struct AnchorSet {
    anchors: Vec<Anchor>,
    matched_sources: Vec<bool>,
    matched_targets: Vec<bool>,
}

impl AnchorSet {
    fn new(source_nodes: usize, target_nodes: usize) -> AnchorSet {
        AnchorSet {
            anchors: Vec::new(),
            matched_sources: vec![false; source_nodes],
            matched_targets: vec![false; target_nodes],
        }
    }

    fn push(&mut self, anchor: Anchor) {
        debug_assert!(!self.matched_sources[anchor.source]);
        debug_assert!(!self.matched_targets[anchor.target]);
        self.matched_sources[anchor.source] = true;
        self.matched_targets[anchor.target] = true;
        self.anchors.push(anchor);
    }

    pub fn anchors(&self) -> &[Anchor] {
        &self.anchors
    }

    /// Anchor pairs in insertion order, as `(source, target)`.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.anchors.iter().map(|a| (a.source, a.target)).collect()
    }

    pub fn len(&self) -> usize {
        self.anchors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.anchors.is_empty()
    }

    pub fn source_matched(&self, node: usize) -> bool {
        self.matched_sources[node]
    }

    pub fn target_matched(&self, node: usize) -> bool {
        self.matched_targets[node]
    }
}

/// Why the loop stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    /// Every node of the smaller graph is matched.
    FullCoverage,
    /// An iteration produced no new pairs.
    NoProgress,
    MaxIterations,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::FullCoverage => "full-coverage",
            Termination::NoProgress => "no-progress",
            Termination::MaxIterations => "max-iterations",
        }
    }
}

/// Outcome of [`run_iteralign`]: the accumulated anchors plus run metadata.
#[derive(Debug, Clone)]
pub struct AlignmentResult {
    anchors: AnchorSet,
    per_iteration: Vec<usize>,
    termination: Termination,
    config: AlignConfig,
}

impl AlignmentResult {
    /// The final matching: all anchors in the order they were found.
    pub fn anchors(&self) -> &[Anchor] {
        self.anchors.anchors()
    }

    pub fn anchor_set(&self) -> &AnchorSet {
        &self.anchors
    }

    pub fn len(&self) -> usize {
        self.anchors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.anchors.is_empty()
    }

    /// New pairs found per iteration.
    pub fn per_iteration(&self) -> &[usize] {
        &self.per_iteration
    }

    pub fn termination(&self) -> Termination {
        self.termination
    }

    pub fn config(&self) -> &AlignConfig {
        &self.config
    }
}

/// Nodes with degree strictly above `threshold`, in ascending node order.
/// Falls back to the `fallback_k` highest-degree nodes when the filter
/// leaves nothing.
pub fn select_high_degree_candidates(
    graph: &Graph,
    threshold: usize,
    fallback_k: usize,
) -> Vec<usize> {
    let filtered: Vec<usize> = (0..graph.node_count())
        .filter(|&v| graph.degree(v) > threshold)
        .collect();
    if !filtered.is_empty() {
        return filtered;
    }
    let mut by_degree: Vec<usize> = (0..graph.node_count()).collect();
    by_degree.sort_by(|&a, &b| graph.degree(b).cmp(&graph.degree(a)).then(a.cmp(&b)));
    by_degree.truncate(fallback_k.min(graph.node_count()));
    by_degree.sort_unstable();
    by_degree
}

/// Runs the full iterative alignment loop.
pub fn run_iteralign(
    source: &Graph,
    target: &Graph,
    config: &AlignConfig,
) -> Result<AlignmentResult> {
    if source.node_count() == 0 || target.node_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    let qs = build_diffusion_matrix(source, config.diffusion.kind)?;
    let qt = build_diffusion_matrix(target, config.diffusion.kind)?;
    let steps = config.diffusion.steps.max(1);
    let k = config.k_per_iter.max(1);
    let max_iterations = config.max_iterations.max(1);
    let coverage = source.node_count().min(target.node_count());

    let mut anchors = AnchorSet::new(source.node_count(), target.node_count());
    let mut per_iteration = Vec::new();
    let mut termination = Termination::MaxIterations;

    for iteration in 1..=max_iterations {
        let remaining = coverage - anchors.len();
        if remaining == 0 {
            termination = Termination::FullCoverage;
            break;
        }
        let first = iteration == 1;
        let (candidates, pool) = if first {
            (
                select_high_degree_candidates(source, config.first_iter_degree_threshold, k),
                select_high_degree_candidates(target, config.first_iter_degree_threshold, k),
            )
        } else {
            (
                (0..source.node_count())
                    .filter(|&v| !anchors.source_matched(v))
                    .collect(),
                (0..target.node_count())
                    .filter(|&v| !anchors.target_matched(v))
                    .collect(),
            )
        };
        let k_round = k.min(remaining).min(candidates.len()).min(pool.len());
        if k_round == 0 {
            termination = Termination::NoProgress;
            break;
        }

        let (hs0, ht0) = if first {
            (
                init_features_identity(source),
                init_features_identity(target),
            )
        } else {
            init_features_anchored(source, target, &anchors.pairs())?
        };
        let hs = reorder_rows(&diffuse(&qs, &hs0, steps)?);
        let ht = reorder_rows(&diffuse(&qt, &ht0, steps)?);
        let (mut hs, mut ht) = pad_to_common_dim(&hs, &ht);
        if config.postprocess.normalize {
            hs = normalize_rows(&hs);
            ht = normalize_rows(&ht);
        }

        let matching = match config.strategy {
            MatchStrategy::Optimal => {
                let distances = sparse_distances(&hs, &ht, &candidates, &pool, k_round)?;
                match optimal_match(&distances, k_round) {
                    Ok(m) => Some(m),
                    // Sparsified rows can in principle leave no feasible
                    // matching of the requested size; fall back to the
                    // largest achievable one.
                    Err(Error::MatchingInfeasible { achieved, .. }) if achieved > 0 => {
                        Some(optimal_match(&distances, achieved)?)
                    }
                    Err(Error::MatchingInfeasible { .. }) => None,
                    Err(e) => return Err(e),
                }
            }
            MatchStrategy::Fast => Some(fast_match(&hs, &ht, &candidates, &pool, k_round)?),
        };
        let matching = match matching {
            Some(m) if !m.is_empty() => m,
            _ => {
                termination = Termination::NoProgress;
                break;
            }
        };
        for pair in matching.pairs() {
            anchors.push(Anchor {
                source: candidates[pair.source],
                target: pool[pair.target],
                iteration,
                distance: pair.distance,
            });
        }
        per_iteration.push(matching.len());
        if anchors.len() == coverage {
            termination = Termination::FullCoverage;
            break;
        }
    }
    if anchors.len() == coverage {
        termination = Termination::FullCoverage;
    }

    Ok(AlignmentResult {
        anchors,
        per_iteration,
        termination,
        config: *config,
    })
}
