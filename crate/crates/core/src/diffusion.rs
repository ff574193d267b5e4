//! Discrete heat diffusion: the one-step diffusion operator and explicit-Euler
//! evolution of node feature matrices.
//!
//! Features evolve as `H(t) = Q^t H(0)` where `Q` is one of three normalized
//! operators built from the adjacency and degree structure. The step size is
//! fixed at 1; the iteration never materializes `Q^t`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::sparse::SparseMatrix;

/// Choice of one-step diffusion operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum DiffusionKind {
    /// `D^{-1} A`: row-stochastic random-walk propagation.
    RandomWalk,
    /// `D^{-1/2} A D^{-1/2}`: symmetric normalized propagation.
    SymmetricNormalized,
    /// `I + D^{-1/2} A D^{-1/2}`: symmetric propagation with a self-loop
    /// term that preserves each node's own features.
    #[default]
    SymmetricSelfLoop,
}

impl DiffusionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DiffusionKind::RandomWalk => "rw",
            DiffusionKind::SymmetricNormalized => "sym",
            DiffusionKind::SymmetricSelfLoop => "sym-selfloop",
        }
    }
}

/// Diffusion schedule: the operator kind and the number of explicit-Euler
/// steps. The step size is fixed at 1 and deliberately not configurable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiffusionConfig {
    pub kind: DiffusionKind,
    pub steps: usize,
}

impl Default for DiffusionConfig {
    fn default() -> Self {
        DiffusionConfig {
            kind: DiffusionKind::default(),
            steps: 5,
        }
    }
}

/// Dense row-major node-embedding matrix, single precision.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f32>,
}

impl FeatureMatrix {
    pub fn zeros(rows: usize, cols: usize) -> FeatureMatrix {
        FeatureMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> FeatureMatrix {
        let mut m = FeatureMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f32>]) -> FeatureMatrix {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols));
        FeatureMatrix {
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

    pub fn row_mut(&mut self, i: usize) -> &mut [f32] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f32 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f32) {
        self.data[i * self.cols + j] = value;
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Builds the one-step diffusion operator for `graph`. Requires minimum
/// degree 1; an isolated node would divide by zero in the normalization.
pub fn build_diffusion_matrix(graph: &Graph, kind: DiffusionKind) -> Result<SparseMatrix> {
    if let Some(node) = graph.isolated_node() {
        return Err(Error::IsolatedNode { node });
    }
    let n = graph.node_count();
    let inv_sqrt: Vec<f32> = (0..n)
        .map(|v| 1.0 / (graph.degree(v) as f32).sqrt())
        .collect();
    let mut rows = Vec::with_capacity(n);
    for u in 0..n {
        let neighbors = graph.neighbors(u);
        let mut row = Vec::with_capacity(neighbors.len() + 1);
        match kind {
            DiffusionKind::RandomWalk => {
                let w = 1.0 / graph.degree(u) as f32;
                for &v in neighbors {
                    row.push((v, w));
                }
            }
            DiffusionKind::SymmetricNormalized => {
                for &v in neighbors {
                    row.push((v, inv_sqrt[u] * inv_sqrt[v as usize]));
                }
            }
            DiffusionKind::SymmetricSelfLoop => {
                let mut placed_diag = false;
                for &v in neighbors {
                    if !placed_diag && v as usize > u {
                        row.push((u as u32, 1.0));
                        placed_diag = true;
                    }
                    row.push((v, inv_sqrt[u] * inv_sqrt[v as usize]));
                }
                if !placed_diag {
                    row.push((u as u32, 1.0));
                }
            }
        }
        rows.push(row);
    }
    Ok(SparseMatrix::from_rows(rows))
}

/// One-hot initialization: `H(0) = I`, embedding dimension equal to the node
/// count.
pub fn init_features_identity(graph: &Graph) -> FeatureMatrix {
    FeatureMatrix::identity(graph.node_count())
}

/// Anchor-guided initialization. The i-th anchor pair `(u, v)` receives the
/// i-th standard basis vector in both graphs; every other row is zero. The
/// embedding dimension is the number of anchors.
pub fn init_features_anchored(
    source: &Graph,
    target: &Graph,
    anchors: &[(usize, usize)],
) -> Result<(FeatureMatrix, FeatureMatrix)> {
    if anchors.is_empty() {
        return Err(Error::EmptyAnchorSet);
    }
    let dim = anchors.len();
    let mut hs = FeatureMatrix::zeros(source.node_count(), dim);
    let mut ht = FeatureMatrix::zeros(target.node_count(), dim);
    for (i, &(u, v)) in anchors.iter().enumerate() {
        if u >= source.node_count() {
            return Err(Error::NodeOutOfRange {
                index: u,
                node_count: source.node_count(),
            });
        }
        if v >= target.node_count() {
            return Err(Error::NodeOutOfRange {
                index: v,
                node_count: target.node_count(),
            });
        }
        hs.set(u, i, 1.0);
        ht.set(v, i, 1.0);
    }
    Ok((hs, ht))
}

/// Evolves `h0` through `steps` successive sparse-dense products with `q`.
pub fn diffuse(q: &SparseMatrix, h0: &FeatureMatrix, steps: usize) -> Result<FeatureMatrix> {
    if h0.rows() != q.dim() {
        return Err(Error::DimensionMismatch {
            expected: q.dim(),
            found: h0.rows(),
        });
    }
    let mut h = h0.clone();
    for step in 1..=steps {
        h = q.mul_dense(&h)?;
        if !h.is_finite() {
            return Err(Error::NonFinite { step });
        }
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQRT_HALF: f32 = std::f32::consts::FRAC_1_SQRT_2;

    fn path3() -> Graph {
        Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap()
    }

    fn assert_rows_close(m: &FeatureMatrix, expected: &[&[f32]], tol: f32) {
        for (i, row) in expected.iter().enumerate() {
            for (j, &want) in row.iter().enumerate() {
                let got = m.get(i, j);
                assert!(
                    (got - want).abs() <= tol,
                    "({i},{j}): got {got}, want {want}"
                );
            }
        }
    }

    #[test]
    fn random_walk_matrix_on_path() {
        let q = build_diffusion_matrix(&path3(), DiffusionKind::RandomWalk).unwrap();
        let d = q.to_dense();
        assert_rows_close(
            &d,
            &[&[0.0, 1.0, 0.0], &[0.5, 0.0, 0.5], &[0.0, 1.0, 0.0]],
            0.0,
        );
    }

    #[test]
    fn symmetric_normalized_matrix_on_path() {
        let q = build_diffusion_matrix(&path3(), DiffusionKind::SymmetricNormalized).unwrap();
        let d = q.to_dense();
        assert_rows_close(
            &d,
            &[
                &[0.0, SQRT_HALF, 0.0],
                &[SQRT_HALF, 0.0, SQRT_HALF],
                &[0.0, SQRT_HALF, 0.0],
            ],
            1e-7,
        );
    }

    #[test]
    fn self_loop_matrix_on_path() {
        let q = build_diffusion_matrix(&path3(), DiffusionKind::SymmetricSelfLoop).unwrap();
        let d = q.to_dense();
        assert_rows_close(
            &d,
            &[
                &[1.0, SQRT_HALF, 0.0],
                &[SQRT_HALF, 1.0, SQRT_HALF],
                &[0.0, SQRT_HALF, 1.0],
            ],
            1e-7,
        );
    }

    #[test]
    fn symmetric_kinds_produce_symmetric_matrices() {
        let g = Graph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (1, 3)]).unwrap();
        for kind in [
            DiffusionKind::SymmetricNormalized,
            DiffusionKind::SymmetricSelfLoop,
        ] {
            let d = build_diffusion_matrix(&g, kind).unwrap().to_dense();
            for i in 0..5 {
                for j in 0..5 {
                    assert_eq!(d.get(i, j), d.get(j, i));
                }
            }
        }
    }

    #[test]
    fn isolated_node_rejected() {
        let g = Graph::from_edges(3, &[(0, 1)]).unwrap();
        let err = build_diffusion_matrix(&g, DiffusionKind::RandomWalk).unwrap_err();
        assert!(matches!(err, Error::IsolatedNode { node: 2 }));
    }

    #[test]
    fn identity_init_shapes() {
        assert_eq!(init_features_identity(&path3()).rows(), 3);
        let one = Graph::from_edges(1, &[]).unwrap();
        let h = init_features_identity(&one);
        assert_eq!((h.rows(), h.cols()), (1, 1));
        assert_eq!(h.get(0, 0), 1.0);
    }

    #[test]
    fn anchored_init_places_basis_vectors() {
        let g5 = Graph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]).unwrap();
        let (hs, ht) = init_features_anchored(&g5, &g5, &[(1, 2), (3, 3)]).unwrap();
        assert_eq!((hs.rows(), hs.cols()), (5, 2));
        assert_eq!(hs.row(1), &[1.0, 0.0]);
        assert_eq!(ht.row(2), &[1.0, 0.0]);
        assert_eq!(hs.row(3), &[0.0, 1.0]);
        assert_eq!(ht.row(3), &[0.0, 1.0]);
        let nonzero = |m: &FeatureMatrix| {
            (0..m.rows())
                .filter(|&i| m.row(i).iter().any(|&v| v != 0.0))
                .count()
        };
        assert_eq!(nonzero(&hs), 2);
        assert_eq!(nonzero(&ht), 2);
    }

    #[test]
    fn anchored_init_requires_anchors() {
        let g = path3();
        assert!(matches!(
            init_features_anchored(&g, &g, &[]),
            Err(Error::EmptyAnchorSet)
        ));
    }

    #[test]
    fn diffuse_single_step_self_loop() {
        let g = path3();
        let q = build_diffusion_matrix(&g, DiffusionKind::SymmetricSelfLoop).unwrap();
        let h = diffuse(&q, &init_features_identity(&g), 1).unwrap();
        assert_rows_close(&h, &[&[1.0, SQRT_HALF, 0.0]], 1e-4);
    }

    #[test]
    fn diffuse_two_steps_self_loop() {
        let g = path3();
        let q = build_diffusion_matrix(&g, DiffusionKind::SymmetricSelfLoop).unwrap();
        let h = diffuse(&q, &init_features_identity(&g), 2).unwrap();
        assert_rows_close(&h, &[&[1.5, std::f32::consts::SQRT_2, 0.5]], 1e-4);
    }

    #[test]
    fn single_step_from_identity_densifies_q() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (0, 3), (0, 2)]).unwrap();
        for kind in [
            DiffusionKind::RandomWalk,
            DiffusionKind::SymmetricNormalized,
            DiffusionKind::SymmetricSelfLoop,
        ] {
            let q = build_diffusion_matrix(&g, kind).unwrap();
            let h = diffuse(&q, &init_features_identity(&g), 1).unwrap();
            assert_eq!(h.data(), q.to_dense().data());
        }
    }

    #[test]
    fn diffuse_rejects_dimension_mismatch() {
        let g = path3();
        let q = build_diffusion_matrix(&g, DiffusionKind::RandomWalk).unwrap();
        assert!(diffuse(&q, &FeatureMatrix::zeros(2, 2), 1).is_err());
    }

    #[test]
    fn random_walk_rows_stay_stochastic() {
        let g = Graph::from_edges(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0), (1, 4)])
            .unwrap();
        let q = build_diffusion_matrix(&g, DiffusionKind::RandomWalk).unwrap();
        for steps in [1, 3, 7] {
            let h = diffuse(&q, &init_features_identity(&g), steps).unwrap();
            for i in 0..h.rows() {
                let sum: f32 = h.row(i).iter().sum();
                assert!((sum - 1.0).abs() < 1e-5, "row {i} sums to {sum}");
            }
        }
    }
}
