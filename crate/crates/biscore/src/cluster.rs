//! k-means clustering: k-means++ seeding plus Lloyd iterations, with
//! deterministic restarts and empty-cluster repair.
//!
//! This is the step that turns ratio/embedding rows into community labels.
//! Determinism contract: given the same input and the same seeded random
//! source, the result is bitwise identical — restart seeds are drawn up
//! front, assignment ties break toward the lowest center index, and the best
//! restart is selected by `(sse, restart index)`.

use core::cmp::Ordering;

use nalgebra::DMatrix;
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::error::ErrorKind;
use crate::metrics::Labeling;
use crate::scalar::Scalar;

/// Errors from k-means clustering.
#[derive(Debug, Error)]
pub enum ClusterError {
    #[error("cannot form {k} clusters from {n} points")]
    TooFewPoints { k: usize, n: usize },
    #[error("cluster count must be at least 1")]
    ZeroClusters,
    #[error("input matrix contains a non-finite entry")]
    NonFinite,
    #[error("input matrix must have at least one column")]
    ZeroDimensional,
    #[error("invalid k-means option: {0}")]
    InvalidOptions(&'static str),
}

impl ClusterError {
    pub(crate) fn kind(&self) -> ErrorKind {
        match self {
            ClusterError::NonFinite => ErrorKind::Degeneracy,
            _ => ErrorKind::Data,
        }
    }
}

/// Tuning knobs for [`kmeans`]. The defaults (10 restarts, 100 iterations,
/// tolerance 1e-9) are inexpensive at the matrix sizes this crate works with.
#[derive(Debug, Clone, Copy)]
pub struct KmeansOptions<F: Scalar> {
    /// Independent k-means++ restarts; the lowest-sse run wins.
    pub restarts: usize,
    /// Lloyd iteration cap per restart.
    pub max_iter: usize,
    /// Convergence threshold on the largest center-coordinate movement.
    pub tol: F,
}

impl<F: Scalar> Default for KmeansOptions<F> {
    fn default() -> Self {
        Self {
            restarts: 10,
            max_iter: 100,
            tol: F::from_f64_lossy(1e-9),
        }
    }
}

/// Output of [`kmeans`]: labels are 1-based and every cluster is non-empty.
#[derive(Debug, Clone)]
pub struct KmeansResult<F: Scalar> {
    /// Cluster assignment per input row, values in `1..=k`.
    pub labels: Labeling,
    /// `k x d` matrix of cluster centers.
    pub centers: DMatrix<F>,
    /// Within-cluster sum of squared distances of the winning restart.
    pub sse: F,
    /// Lloyd iterations used by the winning restart.
    pub iterations: usize,
}

/// Clusters the rows of `x` into `k` groups.
///
/// Runs `opts.restarts` independent k-means++ seedings (seeds drawn from
/// `rng` up front), iterates Lloyd's algorithm on each until the largest
/// center movement drops to `opts.tol` or `opts.max_iter` is reached, and
/// returns the restart with minimal sse (earliest restart on ties). Clusters
/// emptied by an assignment step are repaired by moving in the point
/// farthest from its current center (among clusters that keep at least two
/// members; lowest index on ties).
pub fn kmeans<F: Scalar>(
    x: &DMatrix<F>,
    k: usize,
    opts: &KmeansOptions<F>,
    rng: &mut (impl Rng + ?Sized),
) -> Result<KmeansResult<F>, ClusterError> {
    let n = x.nrows();
    let d = x.ncols();
    if k == 0 {
        return Err(ClusterError::ZeroClusters);
    }
    if k > n {
        return Err(ClusterError::TooFewPoints { k, n });
    }
    if d == 0 {
        return Err(ClusterError::ZeroDimensional);
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(ClusterError::NonFinite);
    }
    if opts.restarts == 0 {
        return Err(ClusterError::InvalidOptions("restarts must be at least 1"));
    }
    if opts.max_iter == 0 {
        return Err(ClusterError::InvalidOptions("max_iter must be at least 1"));
    }
    // `partial_cmp` rejects a NaN tolerance along with non-positive ones.
    if opts.tol.partial_cmp(&F::zero()) != Some(Ordering::Greater) {
        return Err(ClusterError::InvalidOptions("tol must be positive"));
    }

    let seeds: Vec<u64> = (0..opts.restarts).map(|_| rng.next_u64()).collect();
    let mut best: Option<KmeansResult<F>> = None;
    for seed in seeds {
        let candidate = single_restart(x, k, opts, seed);
        let replace = match &best {
            None => true,
            Some(current) => candidate.sse < current.sse,
        };
        if replace {
            best = Some(candidate);
        }
    }
    Ok(best.expect("at least one restart"))
}

fn single_restart<F: Scalar>(
    x: &DMatrix<F>,
    k: usize,
    opts: &KmeansOptions<F>,
    seed: u64,
) -> KmeansResult<F> {
    let n = x.nrows();
    let d = x.ncols();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // k-means++ seeding: first center uniform, then squared-distance-weighted.
    let mut centers = DMatrix::<F>::zeros(k, d);
    let first = rng.gen_range(0..n);
    centers.row_mut(0).copy_from(&x.row(first));
    let mut d2: Vec<F> = (0..n).map(|i| row_dist2(x, i, &centers, 0)).collect();
    for c in 1..k {
        let total: F = d2.iter().fold(F::zero(), |acc, &v| acc + v);
        let pick = if total > F::zero() {
            let target = F::from_f64_lossy(rng.gen::<f64>()) * total;
            let mut cum = F::zero();
            let mut chosen = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                cum += w;
                if cum > target {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            // All points coincide with an existing center; any index works.
            rng.gen_range(0..n)
        };
        centers.row_mut(c).copy_from(&x.row(pick));
        for (i, nearest) in d2.iter_mut().enumerate() {
            let dist = row_dist2(x, i, &centers, c);
            if dist < *nearest {
                *nearest = dist;
            }
        }
    }

    let mut assignment = vec![0usize; n];
    let mut iterations = 0;
    for iter in 1..=opts.max_iter {
        iterations = iter;
        assign_and_repair(x, &centers, &mut assignment, k);

        let mut new_centers = DMatrix::<F>::zeros(k, d);
        let mut counts = vec![0usize; k];
        for (i, &c) in assignment.iter().enumerate() {
            counts[c] += 1;
            for col in 0..d {
                new_centers[(c, col)] += x[(i, col)];
            }
        }
        for c in 0..k {
            let inv = F::one() / F::from_f64_lossy(counts[c] as f64);
            for col in 0..d {
                new_centers[(c, col)] *= inv;
            }
        }

        let mut movement = F::zero();
        for (old, new) in centers.iter().zip(new_centers.iter()) {
            let delta = Float::abs(*old - *new);
            if delta > movement {
                movement = delta;
            }
        }
        centers = new_centers;
        if movement <= opts.tol {
            break;
        }
    }

    // Final assignment against the final centers so labels, centers and sse
    // are mutually consistent.
    assign_and_repair(x, &centers, &mut assignment, k);
    let mut sse = F::zero();
    for (i, &c) in assignment.iter().enumerate() {
        sse += row_dist2(x, i, &centers, c);
    }
    let labels = Labeling::new(assignment.iter().map(|&c| c + 1).collect(), k)
        .expect("assignment indices are within 0..k");
    KmeansResult {
        labels,
        centers,
        sse,
        iterations,
    }
}

/// Assigns every point to its nearest center (lowest index on ties), then
/// repairs empty clusters by moving in the farthest point whose donor
/// cluster keeps at least two members.
fn assign_and_repair<F: Scalar>(
    x: &DMatrix<F>,
    centers: &DMatrix<F>,
    assignment: &mut [usize],
    k: usize,
) {
    for (i, slot) in assignment.iter_mut().enumerate() {
        let mut best_c = 0;
        let mut best_dist = row_dist2(x, i, centers, 0);
        for c in 1..k {
            let dist = row_dist2(x, i, centers, c);
            if dist < best_dist {
                best_dist = dist;
                best_c = c;
            }
        }
        *slot = best_c;
    }

    let n = x.nrows();
    let mut counts = vec![0usize; k];
    for &c in assignment.iter() {
        counts[c] += 1;
    }
    for empty in 0..k {
        if counts[empty] > 0 {
            continue;
        }
        let mut donor: Option<(F, usize)> = None;
        for i in 0..n {
            if counts[assignment[i]] < 2 {
                continue;
            }
            let dist = row_dist2(x, i, centers, assignment[i]);
            let farther = match &donor {
                None => true,
                Some((best_dist, _)) => dist > *best_dist,
            };
            if farther {
                donor = Some((dist, i));
            }
        }
        let (_, i) = donor.expect("k <= n guarantees a donor cluster with two members");
        counts[assignment[i]] -= 1;
        assignment[i] = empty;
        counts[empty] += 1;
    }
}

fn row_dist2<F: Scalar>(x: &DMatrix<F>, i: usize, centers: &DMatrix<F>, c: usize) -> F {
    let mut sum = F::zero();
    for col in 0..x.ncols() {
        let delta = x[(i, col)] - centers[(c, col)];
        sum += delta * delta;
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::ari;
    use approx::assert_relative_eq;
    use rand::RngCore;

    fn opts() -> KmeansOptions<f64> {
        KmeansOptions::default()
    }

    fn blob_data() -> DMatrix<f64> {
        // Two tight blobs (spread 0.01) separated by unit distance.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut rows = Vec::new();
        for _ in 0..4 {
            rows.push([rng.gen::<f64>() * 0.01, rng.gen::<f64>() * 0.01]);
        }
        for _ in 0..4 {
            rows.push([1.0 + rng.gen::<f64>() * 0.01, rng.gen::<f64>() * 0.01]);
        }
        DMatrix::from_fn(8, 2, |i, j| rows[i][j])
    }

    /// Exhaustive minimum sse over every 2-partition with non-empty parts.
    fn brute_force_best_2partition(x: &DMatrix<f64>) -> (f64, Vec<usize>) {
        let n = x.nrows();
        let mut best = (f64::INFINITY, Vec::new());
        for mask in 1..(1u32 << n) - 1 {
            let labels: Vec<usize> = (0..n)
                .map(|i| if mask & (1 << i) != 0 { 1 } else { 2 })
                .collect();
            let mut sse = 0.0;
            for part in 1..=2 {
                let members: Vec<usize> = (0..n).filter(|&i| labels[i] == part).collect();
                let mut center = vec![0.0; x.ncols()];
                for &i in &members {
                    for j in 0..x.ncols() {
                        center[j] += x[(i, j)];
                    }
                }
                for v in center.iter_mut() {
                    *v /= members.len() as f64;
                }
                for &i in &members {
                    for j in 0..x.ncols() {
                        sse += (x[(i, j)] - center[j]).powi(2);
                    }
                }
            }
            if sse < best.0 {
                best = (sse, labels);
            }
        }
        best
    }

    #[test]
    fn duplicated_distinct_rows_give_zero_sse() {
        let x = DMatrix::from_row_slice(6, 1, &[1.0, 5.0, 9.0, 1.0, 5.0, 9.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let result = kmeans(&x, 3, &opts(), &mut rng).unwrap();
        assert_eq!(result.sse, 0.0);
        let v = result.labels.values();
        assert_eq!(v[0], v[3]);
        assert_eq!(v[1], v[4]);
        assert_eq!(v[2], v[5]);
        assert_ne!(v[0], v[1]);
    }

    #[test]
    fn k_equals_n_gives_zero_sse() {
        let x = DMatrix::from_row_slice(4, 2, &[0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let result = kmeans(&x, 4, &opts(), &mut rng).unwrap();
        assert_eq!(result.sse, 0.0);
        let mut sorted = result.labels.values().to_vec();
        sorted.sort_unstable();
        assert_eq!(sorted, vec![1, 2, 3, 4]);
    }

    #[test]
    fn two_blobs_match_brute_force_partition() {
        let x = blob_data();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let result = kmeans(&x, 2, &opts(), &mut rng).unwrap();
        let (best_sse, best_labels) = brute_force_best_2partition(&x);
        assert_relative_eq!(result.sse, best_sse, max_relative = 1e-10);
        let found = &result.labels;
        let expect = Labeling::new(best_labels, 2).unwrap();
        assert_eq!(ari(&expect, found).unwrap(), 1.0);
    }

    #[test]
    fn sse_matches_recomputation() {
        let x = blob_data();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let result = kmeans(&x, 2, &opts(), &mut rng).unwrap();
        let mut recomputed = 0.0;
        for (i, &label) in result.labels.values().iter().enumerate() {
            for j in 0..x.ncols() {
                recomputed += (x[(i, j)] - result.centers[(label - 1, j)]).powi(2);
            }
        }
        assert_relative_eq!(result.sse, recomputed, max_relative = 1e-10);
    }

    #[test]
    fn sse_is_monotone_in_iteration_budget() {
        // Same seed, growing max_iter: sse can only go down (Lloyd descent).
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = DMatrix::from_fn(40, 2, |i, j| {
            ((i * 7 + j * 3) % 13) as f64 + (i as f64) * 0.01
        });
        let seeds: Vec<u64> = (0..1).map(|_| rng.next_u64()).collect();
        let mut previous = f64::INFINITY;
        for max_iter in 1..=8 {
            let mut local = ChaCha8Rng::seed_from_u64(seeds[0]);
            let o = KmeansOptions {
                restarts: 1,
                max_iter,
                tol: 1e-12,
            };
            let result = kmeans(&x, 3, &o, &mut local).unwrap();
            assert!(
                result.sse <= previous + 1e-12,
                "sse rose from {previous} to {} at max_iter {max_iter}",
                result.sse
            );
            previous = result.sse;
        }
    }

    #[test]
    fn best_of_restarts_is_no_worse_than_single_restarts() {
        let x = blob_data();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let multi = kmeans(
            &x,
            2,
            &KmeansOptions {
                restarts: 10,
                ..opts()
            },
            &mut rng,
        )
        .unwrap();
        for seed in 0..10u64 {
            let mut single_rng = ChaCha8Rng::seed_from_u64(seed);
            let single = kmeans(
                &x,
                2,
                &KmeansOptions {
                    restarts: 1,
                    ..opts()
                },
                &mut single_rng,
            )
            .unwrap();
            assert!(multi.sse <= single.sse + 1e-12);
        }
    }

    #[test]
    fn label_partition_invariant_under_row_permutation() {
        let x = blob_data();
        let permutation = [3usize, 7, 1, 5, 0, 6, 2, 4];
        let permuted = DMatrix::from_fn(8, 2, |i, j| x[(permutation[i], j)]);
        let mut rng1 = ChaCha8Rng::seed_from_u64(6);
        let mut rng2 = ChaCha8Rng::seed_from_u64(99);
        let original = kmeans(&x, 2, &opts(), &mut rng1).unwrap();
        let shuffled = kmeans(&permuted, 2, &opts(), &mut rng2).unwrap();
        // Undo the permutation and compare partitions.
        let mut unshuffled = vec![0usize; 8];
        for (new_pos, &old_pos) in permutation.iter().enumerate() {
            unshuffled[old_pos] = shuffled.labels.values()[new_pos];
        }
        let unshuffled = Labeling::new(unshuffled, 2).unwrap();
        assert_eq!(ari(&original.labels, &unshuffled).unwrap(), 1.0);
    }

    #[test]
    fn deterministic_given_seed() {
        let x = blob_data();
        let run = |seed: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            kmeans(&x, 2, &opts(), &mut rng).unwrap()
        };
        let a = run(7);
        let b = run(7);
        assert_eq!(a.labels.values(), b.labels.values());
        assert_eq!(a.sse, b.sse);
        assert_eq!(a.centers, b.centers);
    }

    #[test]
    fn empty_cluster_repair_keeps_all_clusters_non_empty() {
        // Three coincident points plus one far point, k=3: at least one seeded
        // center duplicates, so repair must fire to keep clusters non-empty.
        let x = DMatrix::from_row_slice(4, 1, &[0.0, 0.0, 0.0, 10.0]);
        for seed in 0..20u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let result = kmeans(&x, 3, &opts(), &mut rng).unwrap();
            let mut counts = [0usize; 3];
            for &v in result.labels.values() {
                counts[v - 1] += 1;
            }
            assert!(counts.iter().all(|&c| c > 0), "seed {seed}: {counts:?}");
        }
    }

    #[test]
    fn rejects_invalid_inputs() {
        let x = DMatrix::from_row_slice(2, 1, &[0.0, 1.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            kmeans(&x, 3, &opts(), &mut rng),
            Err(ClusterError::TooFewPoints { k: 3, n: 2 })
        ));
        assert!(matches!(
            kmeans(&x, 0, &opts(), &mut rng),
            Err(ClusterError::ZeroClusters)
        ));
        let bad = DMatrix::from_row_slice(2, 1, &[f64::NAN, 1.0]);
        assert!(matches!(
            kmeans(&bad, 1, &opts(), &mut rng),
            Err(ClusterError::NonFinite)
        ));
        let empty_dim = DMatrix::<f64>::zeros(3, 0);
        assert!(matches!(
            kmeans(&empty_dim, 1, &opts(), &mut rng),
            Err(ClusterError::ZeroDimensional)
        ));
    }
}
