//! Post-processing that makes independently diffused embeddings comparable
//! across graphs: per-row ascending reordering, optional L2 normalization,
//! and zero-padding to a common dimension.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diffusion::FeatureMatrix;

/// Post-processing switches. Reordering is always applied by the pipeline;
/// normalization is opt-in (it mainly helps under structural noise).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PostprocessConfig {
    pub normalize: bool,
}

/// Sorts each row's components in ascending order. The multiset of values in
/// every row is preserved; only their positions change.
pub fn reorder_rows(h: &FeatureMatrix) -> FeatureMatrix {
    let mut out = h.clone();
    let cols = out.cols();
    if cols == 0 {
        return out;
    }
    out.data_mut()
        .par_chunks_mut(cols)
        .for_each(|row| row.sort_unstable_by(f32::total_cmp));
    out
}

/// Scales every nonzero row to unit Euclidean norm; all-zero rows stay zero.
pub fn normalize_rows(h: &FeatureMatrix) -> FeatureMatrix {
    let mut out = h.clone();
    let cols = out.cols();
    if cols == 0 {
        return out;
    }
    out.data_mut().par_chunks_mut(cols).for_each(|row| {
        let norm_sq: f64 = row.iter().map(|&v| (v as f64) * (v as f64)).sum();
        if norm_sq > 0.0 {
            let inv = 1.0 / norm_sq.sqrt() as f32;
            for v in row {
                *v *= inv;
            }
        }
    });
    out
}

/// Left-pads the narrower matrix with zero columns so both have the same
/// dimension. Rows are expected to be reordered ascending already, so padding
/// the head keeps the informative large values right-aligned.
pub fn pad_to_common_dim(hs: &FeatureMatrix, ht: &FeatureMatrix) -> (FeatureMatrix, FeatureMatrix) {
    let dim = hs.cols().max(ht.cols());
    (left_pad(hs, dim), left_pad(ht, dim))
}

fn left_pad(h: &FeatureMatrix, dim: usize) -> FeatureMatrix {
    if h.cols() == dim {
        return h.clone();
    }
    let shift = dim - h.cols();
    let mut out = FeatureMatrix::zeros(h.rows(), dim);
    for i in 0..h.rows() {
        out.row_mut(i)[shift..].copy_from_slice(h.row(i));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reorder_sorts_each_row_ascending() {
        let h = FeatureMatrix::from_rows(&[vec![3.0, 1.0, 2.0], vec![0.5, 0.5, 0.1]]);
        let r = reorder_rows(&h);
        assert_eq!(r.row(0), &[1.0, 2.0, 3.0]);
        assert_eq!(r.row(1), &[0.1, 0.5, 0.5]);
    }

    #[test]
    fn reorder_is_idempotent() {
        let h = FeatureMatrix::from_rows(&[vec![2.0, -1.0, 7.0, 0.0]]);
        let once = reorder_rows(&h);
        let twice = reorder_rows(&once);
        assert_eq!(once, twice);
    }

    #[test]
    fn normalize_unit_and_zero_rows() {
        let h = FeatureMatrix::from_rows(&[vec![3.0, 4.0], vec![0.0, 0.0], vec![1.0, 0.0]]);
        let n = normalize_rows(&h);
        assert!((n.get(0, 0) - 0.6).abs() < 1e-6);
        assert!((n.get(0, 1) - 0.8).abs() < 1e-6);
        assert_eq!(n.row(1), &[0.0, 0.0]);
        assert_eq!(n.row(2), &[1.0, 0.0]);
    }

    #[test]
    fn pad_left_aligns_zeros() {
        let hs = FeatureMatrix::from_rows(&[vec![0.2, 0.8]]);
        let ht = FeatureMatrix::from_rows(&[vec![0.1, 0.2, 0.3, 0.4]]);
        let (ps, pt) = pad_to_common_dim(&hs, &ht);
        assert_eq!(ps.row(0), &[0.0, 0.0, 0.2, 0.8]);
        assert_eq!(pt.row(0), &[0.1, 0.2, 0.3, 0.4]);
    }

    #[test]
    fn pad_equal_dims_is_identity() {
        let h = FeatureMatrix::from_rows(&[vec![1.0, 2.0]]);
        let (a, b) = pad_to_common_dim(&h, &h);
        assert_eq!(a, h);
        assert_eq!(b, h);
    }

    proptest! {
        #[test]
        fn reorder_preserves_row_multiset(row in prop::collection::vec(-1e3f32..1e3, 1..40)) {
            let h = FeatureMatrix::from_rows(std::slice::from_ref(&row));
            let r = reorder_rows(&h);
            let mut expected = row;
            expected.sort_by(f32::total_cmp);
            prop_assert_eq!(r.row(0), &expected[..]);
        }

        #[test]
        fn reorder_invariant_under_column_permutation(
            row in prop::collection::vec(-1e3f32..1e3, 2..30),
            seed in any::<u64>(),
        ) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut shuffled = row.clone();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            shuffled.shuffle(&mut rng);
            let a = reorder_rows(&FeatureMatrix::from_rows(&[row]));
            let b = reorder_rows(&FeatureMatrix::from_rows(&[shuffled]));
            prop_assert_eq!(a.row(0), b.row(0));
        }

        #[test]
        fn normalized_row_norms_are_zero_or_one(
            row in prop::collection::vec(-1e3f32..1e3, 1..40),
        ) {
            let n = normalize_rows(&FeatureMatrix::from_rows(&[row]));
            let norm: f64 = n.row(0).iter().map(|&v| (v as f64).powi(2)).sum::<f64>().sqrt();
            prop_assert!(norm < 1e-6 || (norm - 1.0).abs() < 1e-6);
        }
    }
}
