//! Comparison methods: row-normalized spectral clustering of the singular
//! vectors (nBiSC) and degree-normalized spectral co-clustering.
//!
//! Both share the truncated SVD and k-means machinery of the core algorithm
//! and use the same error type; they differ only in how singular-vector rows
//! are normalized before clustering.

use nalgebra::DMatrix;
use num_traits::Float;
use rand::Rng;

use crate::biscore::BiScoreError;
use crate::cluster::{kmeans, KmeansOptions};
use crate::graph::BipartiteAdjacency;
use crate::metrics::Labeling;
use crate::scalar::Scalar;
use crate::spectral::{svd_of_matrix, truncated_svd, SpectralEmbedding, SpectralError};

/// Output of a baseline method. Beyond the two labelings it carries the
/// singular values and clustering costs for reporting, plus a count of
/// degenerate rows per side (nodes whose embedding row was left at the
/// origin or whose degree was zero).
#[derive(Debug, Clone)]
pub struct BaselineResult<F: Scalar> {
    /// Row-community assignment, values in `1..=K`.
    pub row_labels: Labeling,
    /// Column-community assignment, values in `1..=L`.
    pub col_labels: Labeling,
    /// Singular values of the decomposed matrix, descending.
    pub sigma: Vec<F>,
    /// Within-cluster sum of squares of the row clustering.
    pub row_sse: F,
    /// Within-cluster sum of squares of the column clustering.
    pub col_sse: F,
    /// Degenerate row nodes (zero-norm embedding row / zero degree).
    pub zero_rows: usize,
    /// Degenerate column nodes.
    pub zero_cols: usize,
}

/// Clusters the unit-normalized rows of the left and right singular-vector
/// matrices: decompose with `κ = min(K, L)`, scale every row of `U` and `V`
/// to unit Euclidean norm, then k-means rows with `K` and columns with `L`.
///
/// Rows with norm below machine scale (`√ε`) are left at the origin instead
/// of being divided by a vanishing norm; their count is reported in
/// `zero_rows` / `zero_cols`.
pub fn nbisc<F: Scalar>(
    a: &BipartiteAdjacency<F>,
    k: usize,
    l: usize,
    opts: &KmeansOptions<F>,
    rng: &mut (impl Rng + ?Sized),
) -> Result<BaselineResult<F>, BiScoreError> {
    check_group_counts(a, k, l)?;
    let kappa = k.min(l);
    let embedding = truncated_svd(a, kappa)?;
    nbisc_from_embedding(embedding, k, l, opts, rng)
}

/// The clustering stage of [`nbisc`] on an already-computed decomposition at
/// `κ = min(K, L)`; output is identical to [`nbisc`] on the source matrix.
pub(crate) fn nbisc_from_embedding<F: Scalar>(
    embedding: SpectralEmbedding<F>,
    k: usize,
    l: usize,
    opts: &KmeansOptions<F>,
    rng: &mut (impl Rng + ?Sized),
) -> Result<BaselineResult<F>, BiScoreError> {
    let (u_normalized, zero_rows) = normalize_rows(&embedding.u);
    let (v_normalized, zero_cols) = normalize_rows(&embedding.v);
    let row_run = kmeans(&u_normalized, k, opts, rng)?;
    let col_run = kmeans(&v_normalized, l, opts, rng)?;
    Ok(BaselineResult {
        row_labels: row_run.labels,
        col_labels: col_run.labels,
        sigma: embedding.sigma,
        row_sse: row_run.sse,
        col_sse: col_run.sse,
        zero_rows,
        zero_cols,
    })
}

/// Degree-normalized spectral co-clustering: decompose
/// `A_n = D_r^{-1/2} A D_c^{-1/2}` (degrees regularized by adding each
/// side's mean degree), then k-means the rows of `D_r^{-1/2} Û` with `K`
/// and of `D_c^{-1/2} V̂` with `L`.
///
/// The mean-degree regularization keeps the normalization finite on sparse
/// draws with isolated nodes; zero-degree node counts are reported.
pub fn spectral_coclustering<F: Scalar>(
    a: &BipartiteAdjacency<F>,
    k: usize,
    l: usize,
    opts: &KmeansOptions<F>,
    rng: &mut (impl Rng + ?Sized),
) -> Result<BaselineResult<F>, BiScoreError> {
    check_group_counts(a, k, l)?;
    if a.total_weight() == F::zero() {
        return Err(BiScoreError::Spectral(SpectralError::ZeroMatrix));
    }
    let n = a.nrows();
    let m = a.ncols();
    let w = a.weights();

    let row_degrees: Vec<F> = (0..n)
        .map(|i| (0..m).fold(F::zero(), |acc, j| acc + w[(i, j)]))
        .collect();
    let col_degrees: Vec<F> = (0..m)
        .map(|j| (0..n).fold(F::zero(), |acc, i| acc + w[(i, j)]))
        .collect();
    let zero_rows = row_degrees.iter().filter(|&&d| d == F::zero()).count();
    let zero_cols = col_degrees.iter().filter(|&&d| d == F::zero()).count();
    let row_mean =
        row_degrees.iter().fold(F::zero(), |acc, &d| acc + d) / F::from_f64_lossy(n as f64);
    let col_mean =
        col_degrees.iter().fold(F::zero(), |acc, &d| acc + d) / F::from_f64_lossy(m as f64);

    let row_scale: Vec<F> = row_degrees
        .iter()
        .map(|&d| F::one() / Float::sqrt(d + row_mean))
        .collect();
    let col_scale: Vec<F> = col_degrees
        .iter()
        .map(|&d| F::one() / Float::sqrt(d + col_mean))
        .collect();

    let mut normalized = w.clone();
    for j in 0..m {
        for i in 0..n {
            normalized[(i, j)] *= row_scale[i] * col_scale[j];
        }
    }

    let kappa = k.min(l);
    let embedding = svd_of_matrix(&normalized, kappa)?;
    let mut row_points = embedding.u.clone();
    for i in 0..n {
        for c in 0..kappa {
            row_points[(i, c)] *= row_scale[i];
        }
    }
    let mut col_points = embedding.v.clone();
    for j in 0..m {
        for c in 0..kappa {
            col_points[(j, c)] *= col_scale[j];
        }
    }

    let row_run = kmeans(&row_points, k, opts, rng)?;
    let col_run = kmeans(&col_points, l, opts, rng)?;
    Ok(BaselineResult {
        row_labels: row_run.labels,
        col_labels: col_run.labels,
        sigma: embedding.sigma,
        row_sse: row_run.sse,
        col_sse: col_run.sse,
        zero_rows,
        zero_cols,
    })
}

pub(crate) fn check_group_counts<F: Scalar>(
    a: &BipartiteAdjacency<F>,
    k: usize,
    l: usize,
) -> Result<(), BiScoreError> {
    if k == 0 || l == 0 {
        return Err(BiScoreError::UnsupportedConfiguration { k, l });
    }
    if k > a.nrows() {
        return Err(BiScoreError::GroupsExceedNodes {
            side: "row",
            groups: k,
            nodes: a.nrows(),
        });
    }
    if l > a.ncols() {
        return Err(BiScoreError::GroupsExceedNodes {
            side: "column",
            groups: l,
            nodes: a.ncols(),
        });
    }
    Ok(())
}

/// Scales each row to unit norm; rows with norm below `√ε` stay at the
/// origin. Returns the scaled matrix and the count of such rows.
fn normalize_rows<F: Scalar>(matrix: &DMatrix<F>) -> (DMatrix<F>, usize) {
    let mut out = matrix.clone();
    let mut zeros = 0;
    let floor = Float::sqrt(F::epsilon());
    for i in 0..out.nrows() {
        let norm =
            Float::sqrt((0..out.ncols()).fold(F::zero(), |acc, c| acc + out[(i, c)] * out[(i, c)]));
        if norm < floor {
            zeros += 1;
            for c in 0..out.ncols() {
                out[(i, c)] = F::zero();
            }
        } else {
            for c in 0..out.ncols() {
                out[(i, c)] /= norm;
            }
        }
    }
    (out, zeros)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dcbm::{expected_adjacency, sample_adjacency, DcbmParams};
    use crate::metrics::combined_error_rate;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn scenario_like_mixing() -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 3, &[1.0, 0.1, 0.2, 0.3, 0.9, 0.1])
    }

    #[test]
    fn nbisc_recovers_noiseless_communities() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let params = DcbmParams::sample(&scenario_like_mixing(), 60, 63, 0.2, &mut rng).unwrap();
        let omega = expected_adjacency(&params);
        let mut method_rng = ChaCha8Rng::seed_from_u64(2);
        let result = nbisc(&omega, 2, 3, &KmeansOptions::default(), &mut method_rng).unwrap();
        let err = combined_error_rate(
            params.row_labels(),
            &result.row_labels,
            params.col_labels(),
            &result.col_labels,
        )
        .unwrap();
        assert_eq!(err, 0.0);
        assert_eq!(result.zero_rows, 0);
        assert_eq!(result.zero_cols, 0);
        assert_eq!(result.sigma.len(), 2);
    }

    #[test]
    fn nbisc_handles_zero_degree_nodes() {
        // Two clear blocks plus one fully disconnected row node.
        let mut w = DMatrix::<f64>::zeros(5, 4);
        for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            w[(i, j)] = 5.0;
        }
        for (i, j) in [(2, 2), (2, 3), (3, 2), (3, 3)] {
            w[(i, j)] = 5.0;
        }
        // Row 4 stays all-zero.
        let a = BipartiteAdjacency::new(w).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let result = nbisc(&a, 2, 2, &KmeansOptions::default(), &mut rng).unwrap();
        assert_eq!(result.zero_rows, 1);
        assert_eq!(result.zero_cols, 0);
        assert_eq!(result.row_labels.len(), 5);
        // The two connected blocks must still separate.
        let v = result.row_labels.values();
        assert_eq!(v[0], v[1]);
        assert_eq!(v[2], v[3]);
        assert_ne!(v[0], v[2]);
    }

    #[test]
    fn coclustering_separates_disconnected_blocks() {
        let mut w = DMatrix::<f64>::zeros(6, 6);
        for i in 0..3 {
            for j in 0..3 {
                w[(i, j)] = 2.0 + ((i + j) % 2) as f64;
            }
        }
        for i in 3..6 {
            for j in 3..6 {
                w[(i, j)] = 3.0 + ((i * j) % 2) as f64;
            }
        }
        let a = BipartiteAdjacency::new(w).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let result = spectral_coclustering(&a, 2, 2, &KmeansOptions::default(), &mut rng).unwrap();
        let rv = result.row_labels.values();
        let cv = result.col_labels.values();
        assert!(rv[0] == rv[1] && rv[1] == rv[2]);
        assert!(rv[3] == rv[4] && rv[4] == rv[5]);
        assert_ne!(rv[0], rv[3]);
        assert!(cv[0] == cv[1] && cv[1] == cv[2]);
        assert!(cv[3] == cv[4] && cv[4] == cv[5]);
        assert_ne!(cv[0], cv[3]);
    }

    #[test]
    fn coclustering_recovers_noiseless_constant_heterogeneity() {
        // With constant θ and γ the model is a plain block model, where
        // degree normalization is exact.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let b = scenario_like_mixing();
        let row_labels = crate::dcbm::sample_labels(40, 2, &mut rng).unwrap();
        let col_labels = crate::dcbm::sample_labels(44, 3, &mut rng).unwrap();
        let params =
            DcbmParams::new(b, vec![0.6; 40], vec![0.6; 44], row_labels, col_labels).unwrap();
        let omega = expected_adjacency(&params);
        let mut method_rng = ChaCha8Rng::seed_from_u64(6);
        let result =
            spectral_coclustering(&omega, 2, 3, &KmeansOptions::default(), &mut method_rng)
                .unwrap();
        let err = combined_error_rate(
            params.row_labels(),
            &result.row_labels,
            params.col_labels(),
            &result.col_labels,
        )
        .unwrap();
        assert_eq!(err, 0.0);
    }

    #[test]
    fn coclustering_is_invariant_to_positive_rescaling() {
        // Power-of-four scaling keeps all normalized intermediates on the
        // same rounding path; a tiny tolerance makes Lloyd run to its exact
        // assignment fixpoint so the branch structure matches too.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let params = DcbmParams::sample(&scenario_like_mixing(), 50, 54, 0.9, &mut rng).unwrap();
        let a = sample_adjacency(&params, &mut rng);
        let scaled = BipartiteAdjacency::new(a.weights() * 4.0).unwrap();
        let opts = KmeansOptions {
            tol: f64::MIN_POSITIVE,
            ..KmeansOptions::default()
        };
        let mut rng1 = ChaCha8Rng::seed_from_u64(8);
        let mut rng2 = ChaCha8Rng::seed_from_u64(8);
        let base = spectral_coclustering(&a, 2, 3, &opts, &mut rng1).unwrap();
        let big = spectral_coclustering(&scaled, 2, 3, &opts, &mut rng2).unwrap();
        assert_eq!(base.row_labels.values(), big.row_labels.values());
        assert_eq!(base.col_labels.values(), big.col_labels.values());
    }

    #[test]
    fn both_baselines_survive_sparse_draws() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let params = DcbmParams::sample(&scenario_like_mixing(), 120, 126, 0.1, &mut rng).unwrap();
        let a = sample_adjacency(&params, &mut rng);
        let mut rng1 = ChaCha8Rng::seed_from_u64(10);
        let first = nbisc(&a, 2, 3, &KmeansOptions::default(), &mut rng1).unwrap();
        let mut rng2 = ChaCha8Rng::seed_from_u64(11);
        let second = spectral_coclustering(&a, 2, 3, &KmeansOptions::default(), &mut rng2).unwrap();
        for (result, k, l) in [(&first, 2usize, 3usize), (&second, 2, 3)] {
            assert_eq!(result.row_labels.len(), 120);
            assert_eq!(result.col_labels.len(), 126);
            assert_eq!(result.row_labels.k(), k);
            assert_eq!(result.col_labels.k(), l);
        }
    }

    #[test]
    fn coclustering_rejects_all_zero_input() {
        let a = BipartiteAdjacency::new(DMatrix::<f64>::zeros(4, 5)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        assert!(matches!(
            spectral_coclustering(&a, 2, 2, &KmeansOptions::default(), &mut rng),
            Err(BiScoreError::Spectral(SpectralError::ZeroMatrix))
        ));
    }

    #[test]
    fn baselines_are_deterministic_given_seed() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let params = DcbmParams::sample(&scenario_like_mixing(), 30, 33, 0.8, &mut rng).unwrap();
        let a = sample_adjacency(&params, &mut rng);
        let run = |seed: u64| {
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            nbisc(&a, 2, 3, &KmeansOptions::default(), &mut r).unwrap()
        };
        let r1 = run(14);
        let r2 = run(14);
        assert_eq!(r1.row_labels.values(), r2.row_labels.values());
        assert_eq!(r1.col_labels.values(), r2.col_labels.values());
        assert_eq!(r1.sigma, r2.sigma);
    }

    #[test]
    fn group_count_bounds_are_checked() {
        let a = BipartiteAdjacency::new(DMatrix::<f64>::identity(3, 3)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        assert!(matches!(
            nbisc(&a, 4, 2, &KmeansOptions::default(), &mut rng),
            Err(BiScoreError::GroupsExceedNodes { side: "row", .. })
        ));
        assert!(matches!(
            spectral_coclustering(&a, 2, 4, &KmeansOptions::default(), &mut rng),
            Err(BiScoreError::GroupsExceedNodes { side: "column", .. })
        ));
    }
}
