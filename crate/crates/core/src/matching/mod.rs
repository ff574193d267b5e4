//! Cross-graph node matching: pairwise distances, row sparsification, the
//! optimal assignment-based matcher, the fast nearest-neighbor matcher, and
//! an exhaustive oracle for testing.
//!
//! All matchers work in positional index space: sources index into the
//! candidate list and targets into the pool list handed to
//! [`pairwise_distances`] or [`fast_match`]. Callers translate back to node
//! ids.

mod assignment;
mod kdtree;

use rayon::prelude::*;

use crate::diffusion::FeatureMatrix;
use crate::error::{Error, Result};

pub use kdtree::KdTree;

/// Dimension above which exact nearest-neighbor search falls back from the
/// KD-tree to a parallel linear scan.
const KDTREE_MAX_DIM: usize = 30;

/// Dense block of Euclidean distances between candidate and pool embeddings.
#[derive(Debug, Clone)]
pub struct DistanceBlock {
    rows: usize,
    cols: usize,
    data: Vec<f32>,
}

impl DistanceBlock {
    pub fn from_rows(rows: &[Vec<f32>]) -> DistanceBlock {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols));
        DistanceBlock {
            rows: rows.len(),
            cols,
            data: rows.iter().flatten().copied().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f32 {
        self.data[i * self.cols + j]
    }
}

/// Row-sparsified distance structure: each source row keeps its smallest
/// candidate entries sorted ascending by `(distance, target)`; every other
/// entry is implicitly infinite.
#[derive(Debug, Clone)]
pub struct SparseDistanceMatrix {
    n_targets: usize,
    rows: Vec<Vec<(u32, f32)>>,
}

impl SparseDistanceMatrix {
    pub fn n_sources(&self) -> usize {
        self.rows.len()
    }

    pub fn n_targets(&self) -> usize {
        self.n_targets
    }

    pub fn row(&self, i: usize) -> &[(u32, f32)] {
        &self.rows[i]
    }
}

/// A one-to-one set of matched pairs in positional index space, sorted by
/// source.
#[derive(Debug, Clone, PartialEq)]
pub struct Matching {
    pairs: Vec<MatchedPair>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchedPair {
    pub source: usize,
    pub target: usize,
    pub distance: f32,
}

impl Matching {
    fn from_pairs(mut pairs: Vec<MatchedPair>) -> Matching {
        pairs.sort_by_key(|p| p.source);
        debug_assert!(pairs.windows(2).all(|w| w[0].source < w[1].source));
        Matching { pairs }
    }

    pub fn pairs(&self) -> &[MatchedPair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Total distance, summed in ascending source order.
    pub fn total_distance(&self) -> f64 {
        self.pairs.iter().map(|p| p.distance as f64).sum()
    }
}

fn squared_euclidean(a: &[f32], b: &[f32]) -> f32 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0.0f32;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        acc += d * d;
    }
    acc
}

pub(crate) fn euclidean(a: &[f32], b: &[f32]) -> f32 {
    squared_euclidean(a, b).sqrt()
}

/// Dense Euclidean distances between the given candidate rows of `hs` and
/// pool rows of `ht`.
pub fn pairwise_distances(
    hs: &FeatureMatrix,
    ht: &FeatureMatrix,
    candidates: &[usize],
    pool: &[usize],
) -> Result<DistanceBlock> {
    if hs.cols() != ht.cols() {
        return Err(Error::DimensionMismatch {
            expected: hs.cols(),
            found: ht.cols(),
        });
    }
    let cols = pool.len();
    let mut data = vec![0.0f32; candidates.len() * cols];
    data.par_chunks_mut(cols)
        .zip(candidates.par_iter())
        .for_each(|(row, &u)| {
            let a = hs.row(u);
            for (slot, &v) in row.iter_mut().zip(pool) {
                *slot = euclidean(a, ht.row(v));
            }
        });
    Ok(DistanceBlock {
        rows: candidates.len(),
        cols,
        data,
    })
}

/// Keeps the `min(2k, |pool|)` smallest entries of each row, ties broken
/// toward the lower target index.
pub fn sparsify_rows(d: &DistanceBlock, k: usize) -> SparseDistanceMatrix {
    let keep = (2 * k).min(d.cols());
    let rows = (0..d.rows())
        .into_par_iter()
        .map(|i| sparsify_row(d.row(i), keep))
        .collect();
    SparseDistanceMatrix {
        n_targets: d.cols(),
        rows,
    }
}

fn sparsify_row(row: &[f32], keep: usize) -> Vec<(u32, f32)> {
    let mut entries: Vec<(u32, f32)> = row
        .iter()
        .enumerate()
        .map(|(j, &v)| (j as u32, v))
        .collect();
    if keep < entries.len() {
        entries.select_nth_unstable_by(keep, |a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        entries.truncate(keep);
    }
    entries.sort_unstable_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    entries
}

/// Computes sparsified distances directly, row by row, without materializing
/// the dense block. Equivalent to `sparsify_rows(&pairwise_distances(..), k)`.
pub fn sparse_distances(
    hs: &FeatureMatrix,
    ht: &FeatureMatrix,
    candidates: &[usize],
    pool: &[usize],
    k: usize,
) -> Result<SparseDistanceMatrix> {
    if hs.cols() != ht.cols() {
        return Err(Error::DimensionMismatch {
            expected: hs.cols(),
            found: ht.cols(),
        });
    }
    let keep = (2 * k).min(pool.len());
    let rows = candidates
        .par_iter()
        .map(|&u| {
            let a = hs.row(u);
            let dists: Vec<f32> = pool.iter().map(|&v| euclidean(a, ht.row(v))).collect();
            sparsify_row(&dists, keep)
        })
        .collect();
    Ok(SparseDistanceMatrix {
        n_targets: pool.len(),
        rows,
    })
}

/// Minimum-total-distance one-to-one matching of size `k` over the finite
/// entries of `d`, found by successive shortest augmenting paths with dual
/// potentials. The search stops as soon as `k` real source-target pairs are
/// matched; unmatched sources are implicitly assigned to zero-cost dummies.
pub fn optimal_match(d: &SparseDistanceMatrix, k: usize) -> Result<Matching> {
    let assigned = assignment::solve_k_assignment(&d.rows, d.n_targets, k)?;
    let pairs = assigned
        .into_iter()
        .map(|(i, j)| MatchedPair {
            source: i,
            target: j,
            distance: d.rows[i]
                .iter()
                .find(|&&(col, _)| col as usize == j)
                .map(|&(_, v)| v)
                .expect("assigned pair comes from a finite entry"),
        })
        .collect();
    Ok(Matching::from_pairs(pairs))
}

/// Local nearest-neighbor matching: each candidate source picks its closest
/// pool target (exact search), colliding targets keep only their closest
/// source, and the `k` smallest surviving pairs are returned. May return
/// fewer than `k` pairs after deduplication.
pub fn fast_match(
    hs: &FeatureMatrix,
    ht: &FeatureMatrix,
    candidates: &[usize],
    pool: &[usize],
    k: usize,
) -> Result<Matching> {
    if hs.cols() != ht.cols() {
        return Err(Error::DimensionMismatch {
            expected: hs.cols(),
            found: ht.cols(),
        });
    }
    if candidates.is_empty() || pool.is_empty() {
        return Ok(Matching::from_pairs(Vec::new()));
    }
    let dim = ht.cols();
    let nearest: Vec<(u32, f32)> = if dim <= KDTREE_MAX_DIM {
        let tree = KdTree::build(dim, pool.iter().map(|&v| ht.row(v)));
        candidates
            .par_iter()
            .map(|&u| {
                let (pos, d2) = tree.nearest(hs.row(u));
                (pos, d2.sqrt())
            })
            .collect()
    } else {
        candidates
            .par_iter()
            .map(|&u| {
                let a = hs.row(u);
                let mut best = (u32::MAX, f32::INFINITY);
                for (pos, &v) in pool.iter().enumerate() {
                    let d2 = squared_euclidean(a, ht.row(v));
                    if d2 < best.1 {
                        best = (pos as u32, d2);
                    }
                }
                (best.0, best.1.sqrt())
            })
            .collect()
    };

    // Collapse target collisions, keeping the closer pair (smaller source
    // index on exact ties, via ascending iteration).
    let mut best_for_target: Vec<Option<(f32, u32)>> = vec![None; pool.len()];
    for (src, &(tgt, dist)) in nearest.iter().enumerate() {
        let slot = &mut best_for_target[tgt as usize];
        if slot.is_none_or(|(d, _)| dist < d) {
            *slot = Some((dist, src as u32));
        }
    }
    let mut survivors: Vec<MatchedPair> = best_for_target
        .iter()
        .enumerate()
        .filter_map(|(tgt, slot)| {
            slot.map(|(distance, src)| MatchedPair {
                source: src as usize,
                target: tgt,
                distance,
            })
        })
        .collect();
    survivors.sort_by(|a, b| {
        a.distance
            .total_cmp(&b.distance)
            .then(a.source.cmp(&b.source))
            .then(a.target.cmp(&b.target))
    });
    survivors.truncate(k);
    Ok(Matching::from_pairs(survivors))
}

/// Exhaustive minimum-total-distance matching of size `k`, limited to 10x10
/// instances. Ties are broken toward the lexicographically smallest pair
/// list, i.e. smaller source then smaller target. This is the test oracle
/// for [`optimal_match`].
pub fn brute_force_match(d: &DistanceBlock, k: usize) -> Result<Matching> {
    if d.rows() > 10 || d.cols() > 10 {
        return Err(Error::BruteForceTooLarge {
            rows: d.rows(),
            cols: d.cols(),
        });
    }
    if k > d.rows().min(d.cols()) {
        return Err(Error::MatchingInfeasible {
            requested: k,
            achieved: d.rows().min(d.cols()),
        });
    }
    let mut best: Option<(f64, Vec<(usize, usize)>)> = None;
    let mut chosen: Vec<(usize, usize)> = Vec::with_capacity(k);
    let mut used_cols = [false; 10];
    enumerate(d, k, 0, 0.0, &mut chosen, &mut used_cols, &mut best);
    let (_, pairs) = best.ok_or(Error::MatchingInfeasible {
        requested: k,
        achieved: 0,
    })?;
    Ok(Matching::from_pairs(
        pairs
            .into_iter()
            .map(|(i, j)| MatchedPair {
                source: i,
                target: j,
                distance: d.get(i, j),
            })
            .collect(),
    ))
}

fn enumerate(
    d: &DistanceBlock,
    k: usize,
    next_row: usize,
    partial: f64,
    chosen: &mut Vec<(usize, usize)>,
    used_cols: &mut [bool; 10],
    best: &mut Option<(f64, Vec<(usize, usize)>)>,
) {
    if chosen.len() == k {
        let candidate = (partial, chosen.clone());
        let replace = match best {
            None => true,
            Some((total, pairs)) => {
                candidate.0 < *total || (candidate.0 == *total && candidate.1 < *pairs)
            }
        };
        if replace {
            *best = Some(candidate);
        }
        return;
    }
    let remaining_needed = k - chosen.len();
    if d.rows() - next_row < remaining_needed {
        return;
    }
    // Prune on cost only when strictly worse, so equal-cost alternatives
    // still reach the lexicographic tie-break.
    if let Some((total, _)) = best {
        if partial > *total {
            return;
        }
    }
    for row in next_row..d.rows() {
        for col in 0..d.cols() {
            if used_cols[col] {
                continue;
            }
            let cost = d.get(row, col) as f64;
            chosen.push((row, col));
            used_cols[col] = true;
            enumerate(d, k, row + 1, partial + cost, chosen, used_cols, best);
            used_cols[col] = false;
            chosen.pop();
        }
        // Skipping this row entirely is handled by the loop advancing to
        // later rows as the next pick.
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn block(rows: &[&[f32]]) -> DistanceBlock {
        DistanceBlock::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>())
    }

    #[test]
    fn pairwise_distance_values() {
        let hs = FeatureMatrix::from_rows(&[vec![0.0, 0.0], vec![1.0, 0.0]]);
        let ht = FeatureMatrix::from_rows(&[vec![3.0, 4.0], vec![0.0, 1.0]]);
        let d = pairwise_distances(&hs, &ht, &[0, 1], &[0, 1]).unwrap();
        assert_eq!(d.get(0, 0), 5.0);
        assert!((d.get(1, 1) - std::f32::consts::SQRT_2).abs() < 1e-6);
        let same = pairwise_distances(&hs, &hs, &[0], &[0]).unwrap();
        assert_eq!(same.get(0, 0), 0.0);
    }

    #[test]
    fn pairwise_rejects_dim_mismatch() {
        let hs = FeatureMatrix::zeros(1, 2);
        let ht = FeatureMatrix::zeros(1, 3);
        assert!(pairwise_distances(&hs, &ht, &[0], &[0]).is_err());
    }

    #[test]
    fn sparsify_keeps_two_k_smallest() {
        let d = block(&[&[5.0, 1.0, 3.0, 2.0]]);
        let s = sparsify_rows(&d, 1);
        assert_eq!(s.row(0), &[(1, 1.0), (3, 2.0)]);
    }

    #[test]
    fn sparsify_degenerate_keeps_all() {
        let d = block(&[&[5.0, 1.0, 3.0]]);
        let s = sparsify_rows(&d, 2);
        assert_eq!(s.row(0).len(), 3);
    }

    #[test]
    fn sparsify_breaks_ties_by_index() {
        let d = block(&[&[1.0, 1.0, 2.0]]);
        let s = sparsify_rows(&d, 1);
        assert_eq!(s.row(0), &[(0, 1.0), (1, 1.0)]);
    }

    #[test]
    fn optimal_match_two_by_two() {
        let d = sparsify_rows(&block(&[&[1.0, 2.0], &[2.0, 1.0]]), 2);
        let m = optimal_match(&d, 2).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m.total_distance(), 2.0);
        assert_eq!(m.pairs()[0].target, 0);
        assert_eq!(m.pairs()[1].target, 1);
    }

    #[test]
    fn optimal_match_size_one_breaks_tie_to_low_source() {
        let d = sparsify_rows(&block(&[&[1.0, 2.0], &[2.0, 1.0]]), 1);
        let m = optimal_match(&d, 1).unwrap();
        assert_eq!(m.total_distance(), 1.0);
        assert_eq!((m.pairs()[0].source, m.pairs()[0].target), (0, 0));
    }

    #[test]
    fn optimal_match_singleton() {
        let d = sparsify_rows(&block(&[&[0.0]]), 1);
        let m = optimal_match(&d, 1).unwrap();
        assert_eq!((m.pairs()[0].source, m.pairs()[0].target), (0, 0));
    }

    #[test]
    fn optimal_match_reports_infeasibility() {
        // Both sources can only reach target 0.
        let s = SparseDistanceMatrix {
            n_targets: 2,
            rows: vec![vec![(0, 1.0)], vec![(0, 2.0)]],
        };
        match optimal_match(&s, 2) {
            Err(Error::MatchingInfeasible {
                requested: 2,
                achieved: 1,
            }) => {}
            other => panic!("expected infeasibility, got {other:?}"),
        }
    }

    #[test]
    fn optimal_match_prefers_cheap_sources() {
        // Dropping source 1 entirely is cheaper than any assignment using it.
        let d = sparsify_rows(&block(&[&[1.0, 9.0], &[8.0, 7.0], &[9.0, 2.0]]), 1);
        let m = optimal_match(&d, 2).unwrap();
        assert_eq!(m.total_distance(), 3.0);
        let picked: Vec<usize> = m.pairs().iter().map(|p| p.source).collect();
        assert_eq!(picked, vec![0, 2]);
    }

    #[test]
    fn brute_force_empty_and_singleton() {
        let d = block(&[&[4.0]]);
        assert!(brute_force_match(&d, 0).unwrap().is_empty());
        let m = brute_force_match(&d, 1).unwrap();
        assert_eq!((m.pairs()[0].source, m.pairs()[0].target), (0, 0));
    }

    #[test]
    fn brute_force_rejects_large_instances() {
        let d = DistanceBlock {
            rows: 11,
            cols: 3,
            data: vec![0.0; 33],
        };
        assert!(matches!(
            brute_force_match(&d, 1),
            Err(Error::BruteForceTooLarge { .. })
        ));
    }

    #[test]
    fn brute_force_tie_break_is_lexicographic() {
        let d = block(&[&[1.0, 1.0], &[1.0, 1.0]]);
        let m = brute_force_match(&d, 1).unwrap();
        assert_eq!((m.pairs()[0].source, m.pairs()[0].target), (0, 0));
        let m2 = brute_force_match(&d, 2).unwrap();
        let pairs: Vec<(usize, usize)> = m2.pairs().iter().map(|p| (p.source, p.target)).collect();
        assert_eq!(pairs, vec![(0, 0), (1, 1)]);
    }

    fn random_integer_block(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DistanceBlock {
        let data: Vec<Vec<f32>> = (0..rows)
            .map(|_| {
                (0..cols)
                    .map(|_| rng.random_range(0..=100) as f32)
                    .collect()
            })
            .collect();
        DistanceBlock::from_rows(&data)
    }

    #[test]
    fn optimal_matches_brute_force_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        for case in 0..400 {
            let rows = rng.random_range(1..=8);
            let cols = rng.random_range(1..=8);
            let d = random_integer_block(&mut rng, rows, cols);
            for k in 1..=rows.min(cols) {
                let oracle = brute_force_match(&d, k).unwrap();
                let fast = optimal_match(&sparsify_rows(&d, cols), k).unwrap();
                assert_eq!(
                    oracle.total_distance(),
                    fast.total_distance(),
                    "case {case}: {rows}x{cols} k={k}"
                );
                assert_eq!(fast.len(), k);
                let mut targets: Vec<usize> = fast.pairs().iter().map(|p| p.target).collect();
                targets.sort_unstable();
                targets.dedup();
                assert_eq!(targets.len(), k, "targets must be distinct");
            }
        }
    }

    #[test]
    fn optimal_matches_brute_force_with_float_costs() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xf10a7);
        for _ in 0..200 {
            let rows = rng.random_range(2..=6);
            let cols = rng.random_range(2..=6);
            let data: Vec<Vec<f32>> = (0..rows)
                .map(|_| (0..cols).map(|_| rng.random::<f32>() * 10.0).collect())
                .collect();
            let d = DistanceBlock::from_rows(&data);
            for k in 1..=rows.min(cols) {
                let oracle = brute_force_match(&d, k).unwrap();
                let fast = optimal_match(&sparsify_rows(&d, cols), k).unwrap();
                let diff = (oracle.total_distance() - fast.total_distance()).abs();
                assert!(diff <= 1e-5 * (1.0 + oracle.total_distance().abs()));
            }
        }
    }

    #[test]
    fn sparsification_is_exact_when_two_k_covers_pool() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xc0de);
        for _ in 0..100 {
            let n = rng.random_range(2..=7);
            let d = random_integer_block(&mut rng, n, n);
            for k in 1..=n {
                if 2 * k < n {
                    continue;
                }
                let full = optimal_match(&sparsify_rows(&d, n), k).unwrap();
                let sparse = optimal_match(&sparsify_rows(&d, k), k).unwrap();
                assert_eq!(full.total_distance(), sparse.total_distance());
            }
        }
    }

    #[test]
    fn solver_and_oracle_agree_on_sparse_instances() {
        // Random sparsity patterns, including infeasible ones: the solver's
        // infeasibility verdict must match the oracle seeing infinite costs.
        let mut rng = ChaCha8Rng::seed_from_u64(0x5a5a);
        for case in 0..300 {
            let rows = rng.random_range(1..=6);
            let cols = rng.random_range(1..=6);
            let mut sparse_rows: Vec<Vec<(u32, f32)>> = Vec::new();
            let mut dense = vec![vec![f32::INFINITY; cols]; rows];
            for entries in dense.iter_mut() {
                let mut row = Vec::new();
                for (j, slot) in entries.iter_mut().enumerate() {
                    if rng.random::<f64>() < 0.55 {
                        let v = rng.random_range(0..=50) as f32;
                        *slot = v;
                        row.push((j as u32, v));
                    }
                }
                row.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
                sparse_rows.push(row);
            }
            let s = SparseDistanceMatrix {
                n_targets: cols,
                rows: sparse_rows,
            };
            let block = DistanceBlock::from_rows(&dense);
            for k in 1..=rows.min(cols) {
                let oracle = brute_force_match(&block, k).unwrap();
                match optimal_match(&s, k) {
                    Ok(m) => {
                        assert!(m.total_distance().is_finite());
                        assert_eq!(
                            m.total_distance(),
                            oracle.total_distance(),
                            "case {case}: {rows}x{cols} k={k}"
                        );
                    }
                    Err(Error::MatchingInfeasible { .. }) => {
                        // No finite size-k matching: the oracle is forced
                        // through an infinite entry.
                        assert!(
                            oracle.total_distance().is_infinite(),
                            "case {case}: solver infeasible but oracle found {}",
                            oracle.total_distance()
                        );
                    }
                    Err(other) => panic!("unexpected error {other:?}"),
                }
            }
        }
    }

    fn unit_rows(values: &[&[f32]]) -> FeatureMatrix {
        FeatureMatrix::from_rows(&values.iter().map(|v| v.to_vec()).collect::<Vec<_>>())
    }

    #[test]
    fn fast_match_picks_unambiguous_neighbors() {
        let hs = unit_rows(&[&[0.0], &[10.0]]);
        let ht = unit_rows(&[&[1.0], &[9.0]]);
        let m = fast_match(&hs, &ht, &[0, 1], &[0, 1], 2).unwrap();
        let pairs: Vec<(usize, usize)> = m.pairs().iter().map(|p| (p.source, p.target)).collect();
        assert_eq!(pairs, vec![(0, 0), (1, 1)]);
        assert!(m.pairs().iter().all(|p| (p.distance - 1.0).abs() < 1e-6));
    }

    #[test]
    fn fast_match_collision_keeps_closer_source() {
        // Both sources are nearest to target 0; source 0 is closer.
        let hs = unit_rows(&[&[1.0], &[2.0]]);
        let ht = unit_rows(&[&[0.0], &[100.0]]);
        let m = fast_match(&hs, &ht, &[0, 1], &[0, 1], 2).unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!((m.pairs()[0].source, m.pairs()[0].target), (0, 0));
    }

    #[test]
    fn fast_match_tie_prefers_low_source() {
        let hs = unit_rows(&[&[0.0], &[4.0]]);
        let ht = unit_rows(&[&[1.0], &[3.0]]);
        // Distances tie at 1.0; K=1 keeps the pair with the lower source.
        let m = fast_match(&hs, &ht, &[0, 1], &[0, 1], 1).unwrap();
        assert_eq!((m.pairs()[0].source, m.pairs()[0].target), (0, 0));
    }

    #[test]
    fn fast_match_never_beats_optimal() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xface);
        for _ in 0..100 {
            let n = rng.random_range(2..=7);
            let dim = rng.random_range(1..=4);
            let rows = |rng: &mut ChaCha8Rng| -> Vec<Vec<f32>> {
                (0..n)
                    .map(|_| (0..dim).map(|_| rng.random::<f32>() * 5.0).collect())
                    .collect()
            };
            let hs = FeatureMatrix::from_rows(&rows(&mut rng));
            let ht = FeatureMatrix::from_rows(&rows(&mut rng));
            let ids: Vec<usize> = (0..n).collect();
            for k in 1..=n {
                let f = fast_match(&hs, &ht, &ids, &ids, k).unwrap();
                let d = pairwise_distances(&hs, &ht, &ids, &ids).unwrap();
                let o = optimal_match(&sparsify_rows(&d, n), f.len()).unwrap();
                assert!(f.total_distance() >= o.total_distance() - 1e-5);
                // One-to-one on both sides.
                let mut tgts: Vec<usize> = f.pairs().iter().map(|p| p.target).collect();
                tgts.sort_unstable();
                tgts.dedup();
                assert_eq!(tgts.len(), f.len());
            }
        }
    }

    #[test]
    fn fused_sparse_distances_matches_two_step_pipeline() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let hs = FeatureMatrix::from_rows(
            &(0..9)
                .map(|_| (0..5).map(|_| rng.random::<f32>()).collect())
                .collect::<Vec<_>>(),
        );
        let ht = FeatureMatrix::from_rows(
            &(0..11)
                .map(|_| (0..5).map(|_| rng.random::<f32>()).collect())
                .collect::<Vec<_>>(),
        );
        let cands: Vec<usize> = (0..9).collect();
        let pool: Vec<usize> = (0..11).collect();
        for k in [1, 2, 5] {
            let two_step = sparsify_rows(&pairwise_distances(&hs, &ht, &cands, &pool).unwrap(), k);
            let fused = sparse_distances(&hs, &ht, &cands, &pool, k).unwrap();
            for i in 0..cands.len() {
                assert_eq!(two_step.row(i), fused.row(i));
            }
        }
    }
}
