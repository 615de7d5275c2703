//! The core two-sided clustering algorithm: truncated SVD of the adjacency
//! matrix, entrywise ratios of singular-vector columns against the leading
//! column (clipped to a threshold), and k-means on the ratio rows of each
//! side.
//!
//! Dividing by the leading column cancels node-level degree heterogeneity,
//! so clustering the ratios recovers communities without estimating the
//! degree parameters.

use core::cmp::Ordering;

use nalgebra::DMatrix;
use num_traits::Float;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cluster::{kmeans, ClusterError, KmeansOptions};
use crate::error::ErrorKind;
use crate::graph::BipartiteAdjacency;
use crate::metrics::Labeling;
use crate::scalar::Scalar;
use crate::spectral::{truncated_svd, SpectralEmbedding, SpectralError};

/// Errors from the core algorithm.
#[derive(Debug, Error)]
pub enum BiScoreError {
    #[error("unsupported configuration: min(K, L) must be at least 2, got K={k}, L={l}")]
    UnsupportedConfiguration { k: usize, l: usize },
    #[error("{side} group count {groups} exceeds the {side} node count {nodes}")]
    GroupsExceedNodes {
        side: &'static str,
        groups: usize,
        nodes: usize,
    },
    #[error("ratio construction needs at least 2 singular-vector columns, got {columns}")]
    TooFewColumns { columns: usize },
    #[error("clipping threshold must be positive")]
    NonPositiveTau,
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Cluster(#[from] ClusterError),
}

impl BiScoreError {
    pub(crate) fn kind(&self) -> ErrorKind {
        match self {
            BiScoreError::UnsupportedConfiguration { .. } | BiScoreError::TooFewColumns { .. } => {
                ErrorKind::Degeneracy
            }
            BiScoreError::GroupsExceedNodes { .. } | BiScoreError::NonPositiveTau => {
                ErrorKind::Data
            }
            BiScoreError::Spectral(e) => e.kind(),
            BiScoreError::Cluster(e) => e.kind(),
        }
    }
}

/// The clipped ratio matrices for both sides, together with the thresholds
/// that were applied. Population-level (unclipped) ratios use an infinite
/// threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioMatrices<F: Scalar> {
    /// n×(κ−1) ratios for row nodes.
    pub row: DMatrix<F>,
    /// m×(κ−1) ratios for column nodes.
    pub col: DMatrix<F>,
    /// Clip bound applied to `row` entries.
    pub tau_row: F,
    /// Clip bound applied to `col` entries.
    pub tau_col: F,
}

impl<F: Scalar> RatioMatrices<F> {
    /// Number of row nodes with at least one entry at the clip bound.
    pub fn clipped_row_nodes(&self) -> usize {
        count_clipped_rows(&self.row, self.tau_row)
    }

    /// Number of column nodes with at least one entry at the clip bound.
    pub fn clipped_col_nodes(&self) -> usize {
        count_clipped_rows(&self.col, self.tau_col)
    }
}

fn count_clipped_rows<F: Scalar>(matrix: &DMatrix<F>, tau: F) -> usize {
    if !tau.is_finite() {
        return 0;
    }
    (0..matrix.nrows())
        .filter(|&i| (0..matrix.ncols()).any(|k| Float::abs(matrix[(i, k)]) == tau))
        .count()
}

/// Options for [`biscore`]. Threshold fields default to the natural
/// logarithm of the respective side's node count.
#[derive(Debug, Clone, Copy)]
pub struct BiScoreOptions<F: Scalar> {
    /// Clip bound for row ratios; `None` means `ln(n)`.
    pub tau_row: Option<F>,
    /// Clip bound for column ratios; `None` means `ln(m)`.
    pub tau_col: Option<F>,
    /// Settings for both k-means runs.
    pub kmeans: KmeansOptions<F>,
}

impl<F: Scalar> Default for BiScoreOptions<F> {
    fn default() -> Self {
        Self {
            tau_row: None,
            tau_col: None,
            kmeans: KmeansOptions::default(),
        }
    }
}

/// Full output of [`biscore`].
#[derive(Debug, Clone)]
pub struct BiScoreResult<F: Scalar> {
    /// Row-community assignment, values in `1..=K`.
    pub row_labels: Labeling,
    /// Column-community assignment, values in `1..=L`.
    pub col_labels: Labeling,
    /// The canonicalized truncated decomposition that was clustered.
    pub embedding: SpectralEmbedding<F>,
    /// The clipped ratio matrices fed to k-means.
    pub ratios: RatioMatrices<F>,
    /// Within-cluster sum of squares of the row clustering.
    pub row_sse: F,
    /// Within-cluster sum of squares of the column clustering.
    pub col_sse: F,
}

/// Builds the ratio matrix from the first `κ` singular-vector columns:
/// entry `(i, k)` is `U_{i,k+1} / U_{i,1}`, clipped to `[-tau, tau]`.
///
/// Rows whose leading entry is below machine scale (`√ε · max_i |U_{i,1}|`)
/// get `sign(U_{i,k+1})·tau` instead of an unstable quotient, and exactly 0
/// where the numerator is also below that scale.
pub fn build_ratio_matrix<F: Scalar>(u: &DMatrix<F>, tau: F) -> Result<DMatrix<F>, BiScoreError> {
    if u.ncols() < 2 {
        return Err(BiScoreError::TooFewColumns { columns: u.ncols() });
    }
    // `partial_cmp` rejects NaN thresholds along with non-positive ones.
    if tau.partial_cmp(&F::zero()) != Some(Ordering::Greater) {
        return Err(BiScoreError::NonPositiveTau);
    }
    let lead_max = u
        .column(0)
        .iter()
        .fold(F::zero(), |acc, &x| Float::max(acc, Float::abs(x)));
    let machine_scale = Float::sqrt(F::epsilon()) * lead_max;
    let mut ratios = DMatrix::<F>::zeros(u.nrows(), u.ncols() - 1);
    for i in 0..u.nrows() {
        let lead = u[(i, 0)];
        for k in 1..u.ncols() {
            let value = u[(i, k)];
            ratios[(i, k - 1)] = if Float::abs(lead) < machine_scale {
                if Float::abs(value) < machine_scale {
                    F::zero()
                } else {
                    Float::signum(value) * tau
                }
            } else {
                let r = value / lead;
                if r > tau {
                    tau
                } else if r < -tau {
                    -tau
                } else {
                    r
                }
            };
        }
    }
    Ok(ratios)
}

/// Runs the full algorithm: decompose, build clipped ratios for both sides,
/// and cluster rows into `K` groups and columns into `L` groups.
///
/// The row clustering consumes restart seeds from `rng` first, then the
/// column clustering; the result is deterministic given the seed state.
pub fn biscore<F: Scalar>(
    a: &BipartiteAdjacency<F>,
    k: usize,
    l: usize,
    opts: &BiScoreOptions<F>,
    rng: &mut (impl Rng + ?Sized),
) -> Result<BiScoreResult<F>, BiScoreError> {
    let kappa = validate_groups(a, k, l)?;
    let embedding = truncated_svd(a, kappa)?;
    biscore_from_embedding(embedding, k, l, opts, rng)
}

/// Checks `min(K, L) ≥ 2`, `K ≤ n`, `L ≤ m`; returns `κ = min(K, L)`.
pub(crate) fn validate_groups<F: Scalar>(
    a: &BipartiteAdjacency<F>,
    k: usize,
    l: usize,
) -> Result<usize, BiScoreError> {
    let kappa = k.min(l);
    if kappa < 2 {
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
    Ok(kappa)
}

/// The clustering stage of [`biscore`] on an already-computed decomposition
/// of the adjacency matrix at `κ = min(K, L)`. Callers that run several
/// methods on the same matrix can reuse one decomposition; the output is
/// identical to [`biscore`] on the original matrix.
pub(crate) fn biscore_from_embedding<F: Scalar>(
    embedding: SpectralEmbedding<F>,
    k: usize,
    l: usize,
    opts: &BiScoreOptions<F>,
    rng: &mut (impl Rng + ?Sized),
) -> Result<BiScoreResult<F>, BiScoreError> {
    let tau_row = opts
        .tau_row
        .unwrap_or_else(|| F::from_f64_lossy((embedding.u.nrows() as f64).ln()));
    let tau_col = opts
        .tau_col
        .unwrap_or_else(|| F::from_f64_lossy((embedding.v.nrows() as f64).ln()));
    let row_ratios = build_ratio_matrix(&embedding.u, tau_row)?;
    let col_ratios = build_ratio_matrix(&embedding.v, tau_col)?;

    let row_run = kmeans(&row_ratios, k, &opts.kmeans, rng)?;
    let col_run = kmeans(&col_ratios, l, &opts.kmeans, rng)?;

    Ok(BiScoreResult {
        row_labels: row_run.labels,
        col_labels: col_run.labels,
        embedding,
        ratios: RatioMatrices {
            row: row_ratios,
            col: col_ratios,
            tau_row,
            tau_col,
        },
        row_sse: row_run.sse,
        col_sse: col_run.sse,
    })
}

/// Interchange shape for clustering results, shared by all methods. The
/// threshold fields are `null` for methods that do not clip ratios.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound(
    serialize = "F: Serialize",
    deserialize = "F: serde::de::DeserializeOwned"
))]
pub struct ClusterResultJson<F> {
    pub row_labels: Vec<usize>,
    pub col_labels: Vec<usize>,
    pub sigma: Vec<F>,
    pub row_sse: F,
    pub col_sse: F,
    pub tau_n: Option<F>,
    pub tau_m: Option<F>,
}

impl<F: Scalar> From<&BiScoreResult<F>> for ClusterResultJson<F> {
    fn from(r: &BiScoreResult<F>) -> Self {
        Self {
            row_labels: r.row_labels.values().to_vec(),
            col_labels: r.col_labels.values().to_vec(),
            sigma: r.embedding.sigma.clone(),
            row_sse: r.row_sse,
            col_sse: r.col_sse,
            tau_n: Some(r.ratios.tau_row),
            tau_m: Some(r.ratios.tau_col),
        }
    }
}
