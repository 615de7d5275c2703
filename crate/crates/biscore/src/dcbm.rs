//! Weighted bipartite degree-corrected block model: parameter construction,
//! Poisson sampling, and the population-level quantities used as oracles
//! (expected adjacency, its compressed form `S`, and unclipped population
//! ratio matrices).

use nalgebra::DMatrix;
use num_traits::Float;
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::biscore::RatioMatrices;
use crate::error::ErrorKind;
use crate::graph::BipartiteAdjacency;
use crate::metrics::{Labeling, MetricsError};
use crate::scalar::Scalar;
use crate::spectral::svd_of_matrix;

/// Relative threshold on the smallest singular value of the mixing matrix
/// below which it is considered rank-deficient.
const RANK_TOL: f64 = 1e-10;

/// Errors from model construction and sampling.
#[derive(Debug, Error)]
pub enum DcbmError {
    #[error("rho = {rho} is outside (0, 1]")]
    InvalidRho { rho: f64 },
    #[error("cannot cover {groups} groups with {count} draws")]
    GroupsExceedCount { groups: usize, count: usize },
    #[error("mixing matrix entry ({row}, {col}) is outside [0, 1]")]
    MixingEntryOutOfRange { row: usize, col: usize },
    #[error(
        "mixing matrix is rank-deficient (smallest singular value below {RANK_TOL} of the largest)"
    )]
    MixingRankDeficient,
    #[error("mixing matrix must be non-empty")]
    EmptyMixing,
    #[error("{side} heterogeneity parameter at index {index} is not strictly positive")]
    NonPositiveHeterogeneity { side: &'static str, index: usize },
    #[error("{side} heterogeneity length {got} does not match label count {expected}")]
    HeterogeneityLengthMismatch {
        side: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("{side} labeling has {got} groups but the mixing matrix implies {expected}")]
    GroupCountMismatch {
        side: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("{side} community {community} is empty")]
    EmptyCommunity {
        side: &'static str,
        community: usize,
    },
    #[error("population ratios require min(K, L) >= 2, got {kappa}")]
    KappaTooSmall { kappa: usize },
    #[error("leading {side} singular vector has a non-positive entry after canonicalization")]
    DegenerateLeadingVector { side: &'static str },
    #[error(transparent)]
    Labels(#[from] MetricsError),
}

impl DcbmError {
    pub(crate) fn kind(&self) -> ErrorKind {
        match self {
            DcbmError::KappaTooSmall { .. } | DcbmError::DegenerateLeadingVector { .. } => {
                ErrorKind::Degeneracy
            }
            _ => ErrorKind::Data,
        }
    }
}

/// Full parameter set of the block model.
///
/// Construction validates every invariant: mixing-matrix entries lie in
/// `[0, 1]` and the matrix has full rank `min(K, L)`, heterogeneity
/// parameters are strictly positive, and every community on both sides is
/// non-empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "DcbmParamsJson<F>",
    into = "DcbmParamsJson<F>",
    bound(
        serialize = "F: Serialize + Clone",
        deserialize = "F: serde::de::DeserializeOwned"
    )
)]
pub struct DcbmParams<F: Scalar> {
    b: DMatrix<F>,
    theta: Vec<F>,
    gamma: Vec<F>,
    row_labels: Labeling,
    col_labels: Labeling,
}

impl<F: Scalar> DcbmParams<F> {
    /// Validates and assembles a parameter set. `K` and `L` are the row and
    /// column counts of `b`.
    pub fn new(
        b: DMatrix<F>,
        theta: Vec<F>,
        gamma: Vec<F>,
        row_labels: Labeling,
        col_labels: Labeling,
    ) -> Result<Self, DcbmError> {
        validate_mixing(&b)?;

        if row_labels.k() != b.nrows() {
            return Err(DcbmError::GroupCountMismatch {
                side: "row",
                expected: b.nrows(),
                got: row_labels.k(),
            });
        }
        if col_labels.k() != b.ncols() {
            return Err(DcbmError::GroupCountMismatch {
                side: "column",
                expected: b.ncols(),
                got: col_labels.k(),
            });
        }
        check_heterogeneity("row", &theta, row_labels.len())?;
        check_heterogeneity("column", &gamma, col_labels.len())?;
        check_coverage("row", &row_labels)?;
        check_coverage("column", &col_labels)?;

        Ok(Self {
            b,
            theta,
            gamma,
            row_labels,
            col_labels,
        })
    }

    /// Draws a complete parameter set: uniform labels on both sides
    /// (conditioned on full coverage), then row and column heterogeneity
    /// parameters at signal level `rho` — in that order from `rng`.
    pub fn sample(
        b: &DMatrix<F>,
        n: usize,
        m: usize,
        rho: F,
        rng: &mut (impl Rng + ?Sized),
    ) -> Result<Self, DcbmError> {
        let row_labels = sample_labels(n, b.nrows(), rng)?;
        let col_labels = sample_labels(m, b.ncols(), rng)?;
        let theta = sample_degree_params(n, rho, rng)?;
        let gamma = sample_degree_params(m, rho, rng)?;
        Self::new(b.clone(), theta, gamma, row_labels, col_labels)
    }

    /// Row-community count.
    pub fn k(&self) -> usize {
        self.b.nrows()
    }

    /// Column-community count.
    pub fn l(&self) -> usize {
        self.b.ncols()
    }

    /// Number of row nodes.
    pub fn n(&self) -> usize {
        self.theta.len()
    }

    /// Number of column nodes.
    pub fn m(&self) -> usize {
        self.gamma.len()
    }

    /// The K×L mixing matrix.
    pub fn b(&self) -> &DMatrix<F> {
        &self.b
    }

    /// Row heterogeneity parameters.
    pub fn theta(&self) -> &[F] {
        &self.theta
    }

    /// Column heterogeneity parameters.
    pub fn gamma(&self) -> &[F] {
        &self.gamma
    }

    /// Ground-truth row communities.
    pub fn row_labels(&self) -> &Labeling {
        &self.row_labels
    }

    /// Ground-truth column communities.
    pub fn col_labels(&self) -> &Labeling {
        &self.col_labels
    }
}

/// Checks that a mixing matrix is non-empty, has entries in `[0, 1]`, and
/// has full row rank (smallest singular value above `RANK_TOL` relative to
/// the largest).
pub(crate) fn validate_mixing<F: Scalar>(b: &DMatrix<F>) -> Result<(), DcbmError> {
    if b.nrows() == 0 || b.ncols() == 0 {
        return Err(DcbmError::EmptyMixing);
    }
    for i in 0..b.nrows() {
        for j in 0..b.ncols() {
            let v = b[(i, j)];
            if !(v.is_finite() && v >= F::zero() && v <= F::one()) {
                return Err(DcbmError::MixingEntryOutOfRange { row: i, col: j });
            }
        }
    }
    let sv = b.clone().svd(false, false).singular_values;
    let largest = sv.iter().fold(F::zero(), |acc, &s| Float::max(acc, s));
    let smallest = sv.iter().fold(F::infinity(), |acc, &s| Float::min(acc, s));
    if smallest <= largest * F::from_f64_lossy(RANK_TOL) {
        return Err(DcbmError::MixingRankDeficient);
    }
    Ok(())
}

fn check_heterogeneity<F: Scalar>(
    side: &'static str,
    values: &[F],
    expected: usize,
) -> Result<(), DcbmError> {
    if values.len() != expected {
        return Err(DcbmError::HeterogeneityLengthMismatch {
            side,
            expected,
            got: values.len(),
        });
    }
    for (index, &v) in values.iter().enumerate() {
        if !(v.is_finite() && v > F::zero()) {
            return Err(DcbmError::NonPositiveHeterogeneity { side, index });
        }
    }
    Ok(())
}

fn check_coverage(side: &'static str, labels: &Labeling) -> Result<(), DcbmError> {
    let mut seen = vec![false; labels.k()];
    for &v in labels.values() {
        seen[v - 1] = true;
    }
    if let Some(missing) = seen.iter().position(|&s| !s) {
        return Err(DcbmError::EmptyCommunity {
            side,
            community: missing + 1,
        });
    }
    Ok(())
}

/// Draws `count` labels i.i.d. uniform on `{1..groups}`, redrawing the whole
/// vector until every group is represented.
pub fn sample_labels(
    count: usize,
    groups: usize,
    rng: &mut (impl Rng + ?Sized),
) -> Result<Labeling, DcbmError> {
    if groups == 0 || count == 0 || groups > count {
        return Err(DcbmError::GroupsExceedCount { groups, count });
    }
    loop {
        let values: Vec<usize> = (0..count).map(|_| rng.gen_range(1..=groups)).collect();
        let mut seen = vec![false; groups];
        for &v in &values {
            seen[v - 1] = true;
        }
        if seen.iter().all(|&s| s) {
            return Ok(Labeling::new(values, groups).expect("labels drawn within range"));
        }
    }
}

/// Draws `count` heterogeneity parameters `√rho · u`, `u ~ Uniform(0.5, 1)`.
pub fn sample_degree_params<F: Scalar>(
    count: usize,
    rho: F,
    rng: &mut (impl Rng + ?Sized),
) -> Result<Vec<F>, DcbmError> {
    if !(rho > F::zero() && rho <= F::one()) {
        return Err(DcbmError::InvalidRho {
            rho: rho.to_f64_lossy(),
        });
    }
    let sqrt_rho = Float::sqrt(rho);
    Ok((0..count)
        .map(|_| {
            let u = 0.5 + 0.5 * rng.gen::<f64>();
            sqrt_rho * F::from_f64_lossy(u)
        })
        .collect())
}

/// The expected adjacency matrix: entry `(i, j)` is
/// `θ_i · γ_j · B[c_row(i), c_col(j)]`.
pub fn expected_adjacency<F: Scalar>(params: &DcbmParams<F>) -> BipartiteAdjacency<F> {
    let rows = params.row_labels.values();
    let cols = params.col_labels.values();
    let mut w = DMatrix::<F>::zeros(params.n(), params.m());
    for j in 0..params.m() {
        let gamma_j = params.gamma[j];
        let cc = cols[j] - 1;
        for i in 0..params.n() {
            w[(i, j)] = params.theta[i] * gamma_j * params.b[(rows[i] - 1, cc)];
        }
    }
    BipartiteAdjacency::new(w).expect("expected adjacency entries are finite and non-negative")
}

/// Samples an adjacency matrix with independent Poisson entries whose means
/// are the expected adjacency. Entries are drawn in column-major order.
pub fn sample_adjacency<F: Scalar>(
    params: &DcbmParams<F>,
    rng: &mut (impl Rng + ?Sized),
) -> BipartiteAdjacency<F> {
    let rows = params.row_labels.values();
    let cols = params.col_labels.values();
    let mut w = DMatrix::<F>::zeros(params.n(), params.m());
    for j in 0..params.m() {
        let gamma_j = params.gamma[j].to_f64_lossy();
        let cc = cols[j] - 1;
        for i in 0..params.n() {
            let lambda = params.theta[i].to_f64_lossy()
                * gamma_j
                * params.b[(rows[i] - 1, cc)].to_f64_lossy();
            if lambda > 0.0 {
                let dist = Poisson::new(lambda).expect("positive finite mean");
                let draw: f64 = dist.sample(rng);
                w[(i, j)] = F::from_f64_lossy(draw);
            }
        }
    }
    BipartiteAdjacency::new(w).expect("Poisson draws are finite and non-negative")
}

/// The K×L compression of the expected adjacency:
/// `S_kl = (‖θ^(k)‖/‖θ‖) · B_kl · (‖γ^(l)‖/‖γ‖)`, where `θ^(k)` keeps only
/// the entries in community `k`. Its singular values, scaled by `‖θ‖·‖γ‖`,
/// equal those of the expected adjacency.
pub fn population_s<F: Scalar>(params: &DcbmParams<F>) -> DMatrix<F> {
    let theta_norms = community_norms(&params.theta, params.row_labels.values(), params.k());
    let gamma_norms = community_norms(&params.gamma, params.col_labels.values(), params.l());
    let theta_total = total_norm(&params.theta);
    let gamma_total = total_norm(&params.gamma);
    DMatrix::from_fn(params.k(), params.l(), |k, l| {
        (theta_norms[k] / theta_total) * params.b[(k, l)] * (gamma_norms[l] / gamma_total)
    })
}

fn community_norms<F: Scalar>(values: &[F], labels: &[usize], groups: usize) -> Vec<F> {
    let mut sums = vec![F::zero(); groups];
    for (&v, &label) in values.iter().zip(labels) {
        sums[label - 1] += v * v;
    }
    sums.into_iter().map(Float::sqrt).collect()
}

fn total_norm<F: Scalar>(values: &[F]) -> F {
    Float::sqrt(values.iter().fold(F::zero(), |acc, &v| acc + v * v))
}

/// Unclipped population ratio matrices from the exact decomposition of the
/// expected adjacency: entry `(i, k)` of the row matrix is
/// `U_{i,k+1} / U_{i,1}`, and analogously for columns.
///
/// The leading singular vectors are entrywise strictly positive for any
/// valid parameter set; if canonicalization cannot achieve that numerically,
/// a degeneracy error is returned instead of guessing signs.
pub fn population_ratio_matrices<F: Scalar>(
    params: &DcbmParams<F>,
) -> Result<RatioMatrices<F>, DcbmError> {
    let kappa = params.k().min(params.l());
    if kappa < 2 {
        return Err(DcbmError::KappaTooSmall { kappa });
    }
    let omega = expected_adjacency(params);
    let embedding = svd_of_matrix(omega.weights(), kappa)
        .expect("expected adjacency of valid params is non-zero and finite");
    if embedding.u.column(0).iter().any(|&x| x <= F::zero()) {
        return Err(DcbmError::DegenerateLeadingVector { side: "left" });
    }
    if embedding.v.column(0).iter().any(|&x| x <= F::zero()) {
        return Err(DcbmError::DegenerateLeadingVector { side: "right" });
    }
    let row = DMatrix::from_fn(params.n(), kappa - 1, |i, k| {
        embedding.u[(i, k + 1)] / embedding.u[(i, 0)]
    });
    let col = DMatrix::from_fn(params.m(), kappa - 1, |j, k| {
        embedding.v[(j, k + 1)] / embedding.v[(j, 0)]
    });
    Ok(RatioMatrices {
        row,
        col,
        tau_row: F::infinity(),
        tau_col: F::infinity(),
    })
}

/// Plain-JSON shape of [`DcbmParams`]: mixing matrix as nested row-major
/// arrays, labels as 1-based integer arrays.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound(
    serialize = "F: Serialize",
    deserialize = "F: serde::de::DeserializeOwned"
))]
struct DcbmParamsJson<F> {
    #[serde(rename = "K")]
    k: usize,
    #[serde(rename = "L")]
    l: usize,
    #[serde(rename = "B")]
    b: Vec<Vec<F>>,
    theta: Vec<F>,
    gamma: Vec<F>,
    row_labels: Vec<usize>,
    col_labels: Vec<usize>,
}

impl<F: Scalar> From<DcbmParams<F>> for DcbmParamsJson<F> {
    fn from(p: DcbmParams<F>) -> Self {
        let b = (0..p.b.nrows())
            .map(|i| (0..p.b.ncols()).map(|j| p.b[(i, j)]).collect())
            .collect();
        Self {
            k: p.b.nrows(),
            l: p.b.ncols(),
            b,
            theta: p.theta,
            gamma: p.gamma,
            row_labels: p.row_labels.values().to_vec(),
            col_labels: p.col_labels.values().to_vec(),
        }
    }
}

impl<F: Scalar> TryFrom<DcbmParamsJson<F>> for DcbmParams<F> {
    type Error = DcbmError;

    fn try_from(j: DcbmParamsJson<F>) -> Result<Self, DcbmError> {
        if j.b.len() != j.k || j.b.iter().any(|row| row.len() != j.l) {
            return Err(DcbmError::EmptyMixing);
        }
        if j.k == 0 || j.l == 0 {
            return Err(DcbmError::EmptyMixing);
        }
        let b = DMatrix::from_fn(j.k, j.l, |r, c| j.b[r][c]);
        let row_labels = Labeling::new(j.row_labels, j.k)?;
        let col_labels = Labeling::new(j.col_labels, j.l)?;
        DcbmParams::new(b, j.theta, j.gamma, row_labels, col_labels)
    }
}
