//! Seeded synthetic instances for benchmarks and tests: Erdős–Rényi graphs
//! and node-permuted copies with known ground truth.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::graph::{Graph, GroundTruth};

/// Samples G(n, p). Nodes left isolated by the sampler are attached to one
/// uniformly random other node so diffusion operators stay well-defined.
pub fn erdos_renyi(n: usize, p: f64, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    let mut degree = vec![0usize; n];
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random::<f64>() < p {
                edges.push((i, j));
                degree[i] += 1;
                degree[j] += 1;
            }
        }
    }
    if n >= 2 {
        for v in 0..n {
            if degree[v] == 0 {
                let mut other = rng.random_range(0..n - 1);
                if other >= v {
                    other += 1;
                }
                edges.push((v, other));
                degree[v] += 1;
                degree[other] += 1;
            }
        }
    }
    Graph::from_edges(n, &edges).expect("indices in range by construction")
}

/// Builds a node-permuted copy of `graph`. Returns the copy together with
/// the permutation: node `v` of the input corresponds to node `perm[v]` of
/// the copy.
pub fn permuted_copy(graph: &Graph, seed: u64) -> (Graph, Vec<usize>) {
    let n = graph.node_count();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    perm.shuffle(&mut rng);
    let edges: Vec<(usize, usize)> = graph
        .edges()
        .iter()
        .map(|&(u, v)| (perm[u as usize], perm[v as usize]))
        .collect();
    let copy = Graph::from_edges(n, &edges).expect("permutation preserves range");
    (copy, perm)
}

/// Ground truth induced by a permutation: `(v, perm[v])` for every node.
pub fn permutation_truth(perm: &[usize]) -> GroundTruth {
    GroundTruth::from_pairs(perm.iter().enumerate().map(|(v, &p)| (v, p)).collect())
}
