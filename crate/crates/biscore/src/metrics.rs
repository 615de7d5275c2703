//! Clustering evaluation: permutation-minimized error rate and adjusted
//! Rand index.
//!
//! Spectral methods recover community labels only up to a relabeling, so the
//! error rate reported here is minimized over all label permutations (an
//! exact assignment on the confusion matrix). The adjusted Rand index is a
//! set-partition comparison and needs no alignment.

use thiserror::Error;

/// Errors from metric evaluation and labeling construction.
#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("labelings have different lengths ({truth} vs {pred})")]
    LengthMismatch { truth: usize, pred: usize },
    #[error("labelings declare different group counts ({truth} vs {pred})")]
    GroupMismatch { truth: usize, pred: usize },
    #[error("group count {0} exceeds the permutation-search bound 12")]
    TooManyGroups(usize),
    #[error("labeling must contain at least {min} items, found {found}")]
    TooShort { min: usize, found: usize },
    #[error("label {value} at position {index} is outside 1..={k}")]
    InvalidLabel {
        index: usize,
        value: usize,
        k: usize,
    },
    #[error("labeling must have at least one group")]
    ZeroGroups,
}

/// Community assignment for one node side: values in `1..=k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Labeling {
    values: Vec<usize>,
    k: usize,
}

impl Labeling {
    /// Validates that every value lies in `1..=k`.
    pub fn new(values: Vec<usize>, k: usize) -> Result<Self, MetricsError> {
        if k == 0 {
            return Err(MetricsError::ZeroGroups);
        }
        if values.is_empty() {
            return Err(MetricsError::TooShort { min: 1, found: 0 });
        }
        for (index, &value) in values.iter().enumerate() {
            if value < 1 || value > k {
                return Err(MetricsError::InvalidLabel { index, value, k });
            }
        }
        Ok(Self { values, k })
    }

    /// The per-node labels (1-based).
    pub fn values(&self) -> &[usize] {
        &self.values
    }

    /// Declared number of groups.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of labeled nodes.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// True when the labeling has no entries (unreachable for validated values).
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Restricts the labeling to the given positions, keeping `k`.
    pub fn select(&self, indices: &[usize]) -> Result<Self, MetricsError> {
        Labeling::new(indices.iter().map(|&i| self.values[i]).collect(), self.k)
    }
}

/// Fraction of misclassified nodes, minimized over all permutations of the
/// predicted labels: `min_pi (1/n) sum_i 1{pi(pred_i) != truth_i}`.
///
/// Both labelings must declare the same group count `k <= 12`; the exact
/// minimization runs as an assignment over the `k x k` confusion matrix.
pub fn error_rate(truth: &Labeling, pred: &Labeling) -> Result<f64, MetricsError> {
    if truth.len() != pred.len() {
        return Err(MetricsError::LengthMismatch {
            truth: truth.len(),
            pred: pred.len(),
        });
    }
    if truth.k() != pred.k() {
        return Err(MetricsError::GroupMismatch {
            truth: truth.k(),
            pred: pred.k(),
        });
    }
    let k = truth.k();
    if k > 12 {
        return Err(MetricsError::TooManyGroups(k));
    }

    // confusion[t][p] = count of nodes with truth label t+1 and predicted p+1
    let mut confusion = vec![vec![0usize; k]; k];
    for (&t, &p) in truth.values().iter().zip(pred.values()) {
        confusion[t - 1][p - 1] += 1;
    }

    // Maximum-weight assignment of predicted groups to truth groups via
    // subset DP: dp[mask] = best match count using the first popcount(mask)
    // truth groups, with predicted groups in `mask` consumed.
    let full = 1usize << k;
    let mut dp = vec![0usize; full];
    for mask in 1..full {
        let t = mask.count_ones() as usize - 1;
        let mut best = 0;
        let mut bits = mask;
        while bits != 0 {
            let p = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            best = best.max(dp[mask & !(1 << p)] + confusion[t][p]);
        }
        dp[mask] = best;
    }
    let matched = dp[full - 1];
    Ok((truth.len() - matched) as f64 / truth.len() as f64)
}

/// Per-replication combined error: the larger of the row-side and
/// column-side error rates.
pub fn combined_error_rate(
    row_truth: &Labeling,
    row_pred: &Labeling,
    col_truth: &Labeling,
    col_pred: &Labeling,
) -> Result<f64, MetricsError> {
    let r = error_rate(row_truth, row_pred)?;
    let c = error_rate(col_truth, col_pred)?;
    Ok(r.max(c))
}

/// Adjusted Rand index between two partitions of the same node set.
///
/// Computed from the contingency table with binomial coefficients; bounded
/// above by 1, equal to 1 exactly for identical set partitions, and 0 in
/// expectation under independent random labeling. The degenerate case where
/// the chance-correction denominator vanishes (e.g. one cluster vs itself)
/// is reported as 1.
pub fn ari(truth: &Labeling, pred: &Labeling) -> Result<f64, MetricsError> {
    if truth.len() != pred.len() {
        return Err(MetricsError::LengthMismatch {
            truth: truth.len(),
            pred: pred.len(),
        });
    }
    if truth.len() < 2 {
        return Err(MetricsError::TooShort {
            min: 2,
            found: truth.len(),
        });
    }

    let kt = truth.k();
    let kp = pred.k();
    let mut contingency = vec![vec![0u64; kp]; kt];
    for (&t, &p) in truth.values().iter().zip(pred.values()) {
        contingency[t - 1][p - 1] += 1;
    }

    fn choose2(x: u64) -> f64 {
        (x as f64) * (x as f64 - 1.0) / 2.0
    }

    let mut sum_cells = 0.0;
    let mut row_marginals = vec![0u64; kt];
    let mut col_marginals = vec![0u64; kp];
    for (t, row) in contingency.iter().enumerate() {
        for (p, &count) in row.iter().enumerate() {
            sum_cells += choose2(count);
            row_marginals[t] += count;
            col_marginals[p] += count;
        }
    }
    let sum_rows: f64 = row_marginals.iter().map(|&x| choose2(x)).sum();
    let sum_cols: f64 = col_marginals.iter().map(|&x| choose2(x)).sum();
    let total_pairs = choose2(truth.len() as u64);

    // Single final division: multiplying the classical formula through by
    // 2·C(n,2) keeps every intermediate an exactly-representable integer for
    // realistic n, so rational results like -1/2 come out bit-exact.
    let numerator = 2.0 * (total_pairs * sum_cells - sum_rows * sum_cols);
    let denominator = total_pairs * (sum_rows + sum_cols) - 2.0 * sum_rows * sum_cols;
    if denominator == 0.0 {
        return Ok(1.0);
    }
    Ok(numerator / denominator)
}

/// Per-replication combined agreement: the smaller of the row-side and
/// column-side adjusted Rand indices.
pub fn combined_ari(
    row_truth: &Labeling,
    row_pred: &Labeling,
    col_truth: &Labeling,
    col_pred: &Labeling,
) -> Result<f64, MetricsError> {
    let r = ari(row_truth, row_pred)?;
    let c = ari(col_truth, col_pred)?;
    Ok(r.min(c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn lab(values: &[usize], k: usize) -> Labeling {
        Labeling::new(values.to_vec(), k).unwrap()
    }

    /// Brute-force error rate over all k! permutations (k <= 6 here).
    fn error_rate_exhaustive(truth: &Labeling, pred: &Labeling) -> f64 {
        fn permutations(k: usize) -> Vec<Vec<usize>> {
            if k == 1 {
                return vec![vec![0]];
            }
            let mut out = Vec::new();
            for p in permutations(k - 1) {
                for pos in 0..k {
                    let mut q = p.clone();
                    q.insert(pos, k - 1);
                    out.push(q);
                }
            }
            out
        }
        let k = truth.k();
        let n = truth.len();
        permutations(k)
            .into_iter()
            .map(|perm| {
                let mismatches = truth
                    .values()
                    .iter()
                    .zip(pred.values())
                    .filter(|&(&t, &p)| perm[p - 1] + 1 != t)
                    .count();
                mismatches as f64 / n as f64
            })
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn labeling_validates_range() {
        assert!(Labeling::new(vec![1, 2, 3], 3).is_ok());
        assert!(matches!(
            Labeling::new(vec![0, 1], 2),
            Err(MetricsError::InvalidLabel { index: 0, .. })
        ));
        assert!(matches!(
            Labeling::new(vec![1, 4], 3),
            Err(MetricsError::InvalidLabel { index: 1, .. })
        ));
        assert!(matches!(
            Labeling::new(vec![], 2),
            Err(MetricsError::TooShort { .. })
        ));
    }

    #[test]
    fn error_rate_identity_is_zero() {
        let t = lab(&[1, 1, 2, 2], 2);
        assert_eq!(error_rate(&t, &t).unwrap(), 0.0);
    }

    #[test]
    fn error_rate_is_permutation_invariant() {
        let t = lab(&[1, 1, 2, 2], 2);
        let p = lab(&[2, 2, 1, 1], 2);
        assert_eq!(error_rate(&t, &p).unwrap(), 0.0);
    }

    #[test]
    fn error_rate_half_when_no_permutation_helps() {
        let t = lab(&[1, 1, 2, 2], 2);
        let p = lab(&[1, 2, 1, 2], 2);
        assert_eq!(error_rate(&t, &p).unwrap(), 0.5);
    }

    #[test]
    fn error_rate_matches_exhaustive_permutations() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for k in 2..=4usize {
            for _ in 0..200 {
                let n = rng.gen_range(k..30);
                let t = lab(&(0..n).map(|_| rng.gen_range(1..=k)).collect::<Vec<_>>(), k);
                let p = lab(&(0..n).map(|_| rng.gen_range(1..=k)).collect::<Vec<_>>(), k);
                assert_eq!(
                    error_rate(&t, &p).unwrap(),
                    error_rate_exhaustive(&t, &p),
                    "k={k} t={:?} p={:?}",
                    t.values(),
                    p.values()
                );
            }
        }
    }

    #[test]
    fn error_rate_is_symmetric_for_equal_k() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let k = rng.gen_range(2..=5);
            let n = rng.gen_range(k..40);
            let a = lab(&(0..n).map(|_| rng.gen_range(1..=k)).collect::<Vec<_>>(), k);
            let b = lab(&(0..n).map(|_| rng.gen_range(1..=k)).collect::<Vec<_>>(), k);
            assert_eq!(error_rate(&a, &b).unwrap(), error_rate(&b, &a).unwrap());
        }
    }

    #[test]
    fn error_rate_rejects_mismatches_and_large_k() {
        let a = lab(&[1, 2], 2);
        let b = lab(&[1, 2, 1], 2);
        assert!(matches!(
            error_rate(&a, &b),
            Err(MetricsError::LengthMismatch { .. })
        ));
        let c = lab(&[1, 2], 3);
        assert!(matches!(
            error_rate(&a, &c),
            Err(MetricsError::GroupMismatch { .. })
        ));
        let big = lab(&(1..=13).collect::<Vec<_>>(), 13);
        assert!(matches!(
            error_rate(&big, &big),
            Err(MetricsError::TooManyGroups(13))
        ));
    }

    #[test]
    fn combined_error_takes_the_max() {
        let rt = lab(&[1, 1, 2, 2], 2);
        let ct = lab(&[1, 2, 3, 1, 2, 3, 1, 2, 3, 1], 3);
        let cp = lab(&[1, 2, 3, 1, 2, 3, 1, 2, 3, 2], 3); // one of ten wrong
        assert_eq!(
            combined_error_rate(&rt, &rt, &ct, &cp).unwrap(),
            error_rate(&ct, &cp).unwrap()
        );
        assert_eq!(combined_error_rate(&rt, &rt, &ct, &ct).unwrap(), 0.0);
    }

    #[test]
    fn ari_perfect_agreement_is_one() {
        let t = lab(&[1, 1, 2, 2], 2);
        assert_eq!(ari(&t, &t).unwrap(), 1.0);
        let p = lab(&[2, 2, 1, 1], 2);
        assert_eq!(ari(&t, &p).unwrap(), 1.0);
    }

    #[test]
    fn ari_checkerboard_case() {
        let t = lab(&[1, 1, 2, 2], 2);
        let p = lab(&[1, 2, 1, 2], 2);
        assert_eq!(ari(&t, &p).unwrap(), -0.5);
    }

    #[test]
    fn ari_degenerate_single_cluster_is_one() {
        let t = lab(&[1, 1, 1], 1);
        assert_eq!(ari(&t, &t).unwrap(), 1.0);
    }

    #[test]
    fn ari_is_at_most_one_and_one_only_for_identical_partitions() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..300 {
            let k = rng.gen_range(1..=4);
            let n = rng.gen_range(2..25);
            let t = lab(&(0..n).map(|_| rng.gen_range(1..=k)).collect::<Vec<_>>(), k);
            let p = lab(&(0..n).map(|_| rng.gen_range(1..=k)).collect::<Vec<_>>(), k);
            let value = ari(&t, &p).unwrap();
            assert!(value <= 1.0 + 1e-12);
            let same_partition = {
                // identical as set partitions: co-membership must agree on all pairs
                let tv = t.values();
                let pv = p.values();
                (0..n).all(|i| (0..i).all(|j| (tv[i] == tv[j]) == (pv[i] == pv[j])))
            };
            assert_eq!(value >= 1.0 - 1e-12, same_partition);
        }
    }

    #[test]
    fn ari_mean_near_zero_under_random_labeling() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 60;
        let k = 3;
        let t = lab(&(0..n).map(|_| rng.gen_range(1..=k)).collect::<Vec<_>>(), k);
        let draws = 2000;
        let values: Vec<f64> = (0..draws)
            .map(|_| {
                let p = lab(&(0..n).map(|_| rng.gen_range(1..=k)).collect::<Vec<_>>(), k);
                ari(&t, &p).unwrap()
            })
            .collect();
        let mean = values.iter().sum::<f64>() / draws as f64;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (draws - 1) as f64;
        let se = (var / draws as f64).sqrt();
        assert!(
            mean.abs() <= 4.0 * se,
            "mean ARI {mean} against 4 standard errors {se}"
        );
    }

    #[test]
    fn combined_ari_takes_the_min() {
        let rt = lab(&[1, 1, 2, 2], 2);
        let ct = lab(&[1, 1, 2, 2], 2);
        let cp = lab(&[1, 2, 1, 2], 2);
        assert_eq!(combined_ari(&rt, &rt, &ct, &cp).unwrap(), -0.5);
        assert_eq!(combined_ari(&rt, &rt, &ct, &ct).unwrap(), 1.0);
    }

    #[test]
    fn labeling_select_restricts_positions() {
        let t = lab(&[1, 2, 3, 1, 2], 3);
        let s = t.select(&[0, 3, 4]).unwrap();
        assert_eq!(s.values(), &[1, 1, 2]);
        assert_eq!(s.k(), 3);
    }
}
