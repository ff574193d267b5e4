//! K-cardinality minimum-cost assignment on a row-sparse cost matrix.
//!
//! Successive shortest augmenting paths in the Jonker-Volgenant style: dual
//! potentials keep reduced costs non-negative, each round runs one Dijkstra
//! search started from every free source simultaneously, and the solve stops
//! after `k` augmentations. Starting from all free sources at once lets the
//! solver choose which sources participate, which is exactly the implicit
//! zero-cost dummy padding of the rectangular formulation. After each round
//! the current matching is a minimum-cost matching of its cardinality, so
//! stopping at `k` yields the optimal size-`k` matching.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Non-NaN cost ordered for use in the binary heap.
#[derive(PartialEq, Clone, Copy)]
struct Cost(f64);

impl Eq for Cost {}

impl PartialOrd for Cost {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Cost {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Finds a minimum-total-cost one-to-one assignment of exactly `k` pairs.
/// `rows[i]` lists the finite entries `(column, cost)` of source `i`; all
/// other entries are treated as infinite. Costs must be non-negative.
///
/// Returns pairs `(row, column)`. Errors if fewer than `k` pairs can be
/// matched among the finite entries, reporting how many were achievable.
pub(crate) fn solve_k_assignment(
    rows: &[Vec<(u32, f32)>],
    n_cols: usize,
    k: usize,
) -> Result<Vec<(usize, usize)>> {
    let n_rows = rows.len();
    if k > n_rows.min(n_cols) {
        return Err(Error::MatchingInfeasible {
            requested: k,
            achieved: n_rows.min(n_cols),
        });
    }

    let mut pi_row = vec![0.0f64; n_rows];
    let mut pi_col = vec![0.0f64; n_cols];
    let mut match_row: Vec<Option<u32>> = vec![None; n_rows];
    let mut match_col: Vec<Option<u32>> = vec![None; n_cols];

    let mut dist_row = vec![f64::INFINITY; n_rows];
    let mut dist_col = vec![f64::INFINITY; n_cols];
    let mut done_row = vec![false; n_rows];
    let mut done_col = vec![false; n_cols];
    let mut pred_col = vec![u32::MAX; n_cols];
    let mut heap: BinaryHeap<Reverse<(Cost, u32)>> = BinaryHeap::new();

    for round in 0..k {
        dist_row.fill(f64::INFINITY);
        dist_col.fill(f64::INFINITY);
        done_row.fill(false);
        done_col.fill(false);
        heap.clear();

        for (i, m) in match_row.iter().enumerate() {
            if m.is_none() {
                // Reduced cost of stepping from the virtual super-source.
                let d = -pi_row[i];
                dist_row[i] = d;
                heap.push(Reverse((Cost(d), i as u32)));
            }
        }

        let mut reached: Option<(usize, f64)> = None;
        while let Some(Reverse((Cost(d), id))) = heap.pop() {
            let id = id as usize;
            if id < n_rows {
                if done_row[id] || d > dist_row[id] {
                    continue;
                }
                done_row[id] = true;
                let matched_to = match_row[id];
                for &(col, cost) in &rows[id] {
                    if matched_to == Some(col) {
                        continue;
                    }
                    let j = col as usize;
                    if done_col[j] {
                        continue;
                    }
                    let nd = d + (cost as f64 + pi_row[id] - pi_col[j]);
                    if nd < dist_col[j] {
                        dist_col[j] = nd;
                        pred_col[j] = id as u32;
                        heap.push(Reverse((Cost(nd), (n_rows + j) as u32)));
                    }
                }
            } else {
                let j = id - n_rows;
                if done_col[j] || d > dist_col[j] {
                    continue;
                }
                done_col[j] = true;
                match match_col[j] {
                    None => {
                        reached = Some((j, d));
                        break;
                    }
                    Some(owner) => {
                        // Matched edges are tight, so walking back to the
                        // owning row costs nothing in reduced terms.
                        let i = owner as usize;
                        if !done_row[i] && d < dist_row[i] {
                            dist_row[i] = d;
                            heap.push(Reverse((Cost(d), i as u32)));
                        }
                    }
                }
            }
        }

        let Some((free_col, d_star)) = reached else {
            return Err(Error::MatchingInfeasible {
                requested: k,
                achieved: round,
            });
        };

        for i in 0..n_rows {
            pi_row[i] += if done_row[i] { dist_row[i] } else { d_star };
        }
        for j in 0..n_cols {
            pi_col[j] += if done_col[j] { dist_col[j] } else { d_star };
        }

        let mut j = free_col;
        loop {
            let i = pred_col[j] as usize;
            let previous = match_row[i];
            match_row[i] = Some(j as u32);
            match_col[j] = Some(i as u32);
            match previous {
                None => break,
                Some(next) => j = next as usize,
            }
        }
    }

    let pairs = match_row
        .iter()
        .enumerate()
        .filter_map(|(i, m)| m.map(|j| (i, j as usize)))
        .collect();
    Ok(pairs)
}
