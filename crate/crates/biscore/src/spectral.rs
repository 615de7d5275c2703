//! Truncated singular value decomposition with a fixed orientation
//! convention.
//!
//! Both routes factor the smaller Gram matrix (`A·Aᵀ` or `Aᵀ·A`) and
//! back-multiply to recover the other factor. When the smaller dimension is
//! at most 512 the Gram matrix is decomposed completely with a symmetric
//! eigensolver; larger matrices use block subspace iteration, which is much
//! cheaper when only a handful of leading triplets are needed. (A dense
//! Golub–Kahan SVD of the rectangular matrix is deliberately not used: on
//! exactly low-rank inputs — which population matrices and noiseless draws
//! are — it can silently return orthonormal factors that do not reproduce
//! the input. The symmetric eigenproblem does not exhibit the failure.)
//! Both routes are fully deterministic: the iteration's start block comes
//! from a fixed-seed generator, and ties in the sort are broken by original
//! index.

use nalgebra::{DMatrix, DVector, SymmetricEigen, QR};
use num_traits::Float;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::error::ErrorKind;
use crate::graph::BipartiteAdjacency;
use crate::scalar::Scalar;

/// Largest "smaller dimension" for which the dense route is used.
const DENSE_LIMIT: usize = 512;

/// Iteration cap for the Gram-route subspace iteration.
const MAX_SUBSPACE_ITER: usize = 500;

/// Fixed seed for the subspace-iteration start block (a standard 64-bit
/// mixing constant). Determinism of the whole decomposition rests on this
/// being a constant.
const SUBSPACE_SEED: u64 = 0x9e37_79b9_7f4a_7c15;

/// Errors from the truncated SVD.
#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("kappa = {kappa} is outside 1..={max}")]
    KappaOutOfRange { kappa: usize, max: usize },
    #[error("all-zero matrix has no well-defined leading direction")]
    ZeroMatrix,
    #[error("matrix contains a non-finite entry")]
    NonFinite,
}

impl SpectralError {
    pub(crate) fn kind(&self) -> ErrorKind {
        match self {
            SpectralError::ZeroMatrix => ErrorKind::Degeneracy,
            _ => ErrorKind::Data,
        }
    }
}

/// Top-κ singular triplets of a matrix, sign-canonicalized.
///
/// Invariants maintained by [`truncated_svd`]: `u` (n×κ) and `v` (m×κ) have
/// orthonormal columns to 1e-8 in max norm, `sigma` is non-negative and
/// non-increasing, and the entry sum of the leading column of `u` is
/// non-negative.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralEmbedding<F: Scalar> {
    /// Left singular vectors, one column per retained triplet.
    pub u: DMatrix<F>,
    /// Singular values, descending.
    pub sigma: Vec<F>,
    /// Right singular vectors, one column per retained triplet.
    pub v: DMatrix<F>,
}

impl<F: Scalar> SpectralEmbedding<F> {
    /// Number of retained triplets.
    pub fn kappa(&self) -> usize {
        self.sigma.len()
    }

    /// Reconstructs `U·Σ·Vᵀ`.
    pub fn reconstruct(&self) -> DMatrix<F> {
        let mut scaled = self.u.clone();
        for (k, &s) in self.sigma.iter().enumerate() {
            scaled.column_mut(k).scale_mut(s);
        }
        scaled * self.v.transpose()
    }
}

/// Computes the top-`kappa` singular triplets of the adjacency matrix.
///
/// The result is canonicalized via [`canonicalize_signs`]. The truncation
/// residual satisfies `‖A − UΣVᵀ‖₂ ≤ σ_{κ+1} + 1e-6·σ₁` when `kappa <
/// min(n,m)`, and `‖A − UΣVᵀ‖_max ≤ 1e-8·σ₁` when `kappa = min(n,m)`.
pub fn truncated_svd<F: Scalar>(
    a: &BipartiteAdjacency<F>,
    kappa: usize,
) -> Result<SpectralEmbedding<F>, SpectralError> {
    svd_of_matrix(a.weights(), kappa)
}

/// [`truncated_svd`] on a raw matrix; shared with the normalized variants
/// used by the baseline methods and with population-level computations.
pub(crate) fn svd_of_matrix<F: Scalar>(
    m: &DMatrix<F>,
    kappa: usize,
) -> Result<SpectralEmbedding<F>, SpectralError> {
    let max_kappa = m.nrows().min(m.ncols());
    if kappa == 0 || kappa > max_kappa {
        return Err(SpectralError::KappaOutOfRange {
            kappa,
            max: max_kappa,
        });
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(SpectralError::NonFinite);
    }
    if m.iter().all(|v| *v == F::zero()) {
        return Err(SpectralError::ZeroMatrix);
    }
    let embedding = if max_kappa <= DENSE_LIMIT {
        dense_route(m, kappa)
    } else {
        gram_route(m, kappa)
    };
    Ok(canonicalize_signs(embedding))
}

/// Gram decomposition with a complete symmetric eigensolve; used for
/// matrices whose smaller dimension is at most [`DENSE_LIMIT`].
pub(crate) fn dense_route<F: Scalar>(m: &DMatrix<F>, kappa: usize) -> SpectralEmbedding<F> {
    let rows_smaller = m.nrows() <= m.ncols();
    let gram = if rows_smaller {
        m * m.transpose()
    } else {
        m.transpose() * m
    };
    let eig = SymmetricEigen::new(gram);
    let order = sorted_indices_desc(eig.eigenvalues.as_slice());
    let side = eig.eigenvalues.len();
    let ritz = DMatrix::from_fn(side, kappa, |i, k| eig.eigenvectors[(i, order[k])]);
    let lambdas: Vec<F> = order[..kappa]
        .iter()
        .map(|&k| Float::max(eig.eigenvalues[k], F::zero()))
        .collect();
    finish_gram_factorization(m, rows_smaller, ritz, lambdas)
}

/// Gram decomposition via block subspace iteration; used when the smaller
/// dimension exceeds [`DENSE_LIMIT`].
pub(crate) fn gram_route<F: Scalar>(m: &DMatrix<F>, kappa: usize) -> SpectralEmbedding<F> {
    let rows_smaller = m.nrows() <= m.ncols();
    let gram = if rows_smaller {
        m * m.transpose()
    } else {
        m.transpose() * m
    };
    let (ritz, lambdas) = leading_eigenpairs(&gram, kappa);
    finish_gram_factorization(m, rows_smaller, ritz, lambdas)
}

/// Shared tail of both routes: turns Gram eigenpairs of the smaller side
/// into a full singular triplet set by back-multiplication.
fn finish_gram_factorization<F: Scalar>(
    m: &DMatrix<F>,
    rows_smaller: bool,
    ritz: DMatrix<F>,
    lambdas: Vec<F>,
) -> SpectralEmbedding<F> {
    // Eigenvalues of the Gram matrix are squared singular values. Values at
    // round-off level relative to the largest are genuine rank deficiency
    // and are flushed to exactly zero.
    let zero_floor = lambdas[0] * F::epsilon() * F::from_f64_lossy(100.0);
    let sigma: Vec<F> = lambdas
        .iter()
        .map(|&l| {
            if l <= zero_floor {
                F::zero()
            } else {
                Float::sqrt(l)
            }
        })
        .collect();

    // Back-multiply to get the factor for the other side, one column per
    // positive singular value; columns for zero singular values are filled
    // in afterwards to keep the factor orthonormal.
    let mut other = if rows_smaller {
        m.transpose() * &ritz
    } else {
        m * &ritz
    };
    let mut zero_cols = Vec::new();
    for (k, &s) in sigma.iter().enumerate() {
        if s > F::zero() {
            other.column_mut(k).scale_mut(F::one() / s);
        } else {
            other.column_mut(k).fill(F::zero());
            zero_cols.push(k);
        }
    }
    complete_orthonormal_columns(&mut other, &zero_cols);

    let (u, v) = if rows_smaller {
        (ritz, other)
    } else {
        (other, ritz)
    };
    SpectralEmbedding { u, sigma, v }
}

/// Block subspace iteration for the top-`kappa` eigenpairs of a symmetric
/// positive semidefinite matrix. One `gram`-multiply per iteration: the
/// product `Y = G·Q` serves the Rayleigh–Ritz step, the residual check, and
/// the next subspace. Returns (eigenvector matrix side×kappa, eigenvalues
/// descending).
fn leading_eigenpairs<F: Scalar>(gram: &DMatrix<F>, kappa: usize) -> (DMatrix<F>, Vec<F>) {
    let side = gram.nrows();
    let p = (kappa + 2).min(side);
    let mut rng = ChaCha8Rng::seed_from_u64(SUBSPACE_SEED);
    let start = DMatrix::from_fn(side, p, |_, _| {
        let x: f64 = StandardNormal.sample(&mut rng);
        F::from_f64_lossy(x)
    });
    let mut q = QR::new(start).q();

    let tol = Float::max(
        F::from_f64_lossy(1e-11),
        F::epsilon() * F::from_f64_lossy(50.0),
    );

    for iter in 1..=MAX_SUBSPACE_ITER {
        let y = gram * &q;
        let mut h = q.transpose() * &y;
        // Symmetrize before the eigensolve; `h` is symmetric up to rounding.
        let ht = h.transpose();
        h += ht;
        h.scale_mut(F::from_f64_lossy(0.5));
        let eig = SymmetricEigen::new(h);
        let order = sorted_indices_desc(eig.eigenvalues.as_slice());

        let qw = &q * &eig.eigenvectors;
        let yw = &y * &eig.eigenvectors;
        let lambda_max = eig.eigenvalues[order[0]];
        let mut converged = true;
        for &col in &order[..kappa] {
            let lambda = eig.eigenvalues[col];
            let mut r2 = F::zero();
            for i in 0..side {
                let d = yw[(i, col)] - lambda * qw[(i, col)];
                r2 += d * d;
            }
            if Float::sqrt(r2) > tol * lambda_max {
                converged = false;
                break;
            }
        }

        if converged || iter == MAX_SUBSPACE_ITER {
            if !converged {
                log::warn!(
                    "subspace iteration stopped after {MAX_SUBSPACE_ITER} \
                     iterations without reaching tolerance; proceeding with \
                     the current approximation"
                );
            }
            let vectors = DMatrix::from_fn(side, kappa, |i, k| qw[(i, order[k])]);
            let lambdas = order[..kappa]
                .iter()
                .map(|&k| Float::max(eig.eigenvalues[k], F::zero()))
                .collect();
            return (vectors, lambdas);
        }
        q = QR::new(y).q();
    }
    unreachable!("loop returns on the final iteration");
}

/// Indices of `values` sorted by descending value, ascending index on ties.
fn sorted_indices_desc<F: Scalar>(values: &[F]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| {
        values[b]
            .partial_cmp(&values[a])
            .expect("finite values")
            .then(a.cmp(&b))
    });
    order
}

/// Fills the listed zero columns of `w` with unit vectors orthogonal to all
/// other columns (Gram–Schmidt against the standard basis), so that the full
/// column set is orthonormal.
fn complete_orthonormal_columns<F: Scalar>(w: &mut DMatrix<F>, zero_cols: &[usize]) {
    let rows = w.nrows();
    let mut valid: Vec<bool> = (0..w.ncols()).map(|c| !zero_cols.contains(&c)).collect();
    for &k in zero_cols {
        let mut placed = false;
        for basis in 0..rows {
            let mut cand = DVector::<F>::zeros(rows);
            cand[basis] = F::one();
            for j in 0..w.ncols() {
                if !valid[j] {
                    continue;
                }
                let proj = w.column(j).dot(&cand);
                for i in 0..rows {
                    cand[i] -= proj * w[(i, j)];
                }
            }
            let norm = Float::sqrt(cand.dot(&cand));
            if norm > F::from_f64_lossy(0.5) {
                cand.scale_mut(F::one() / norm);
                w.set_column(k, &cand);
                valid[k] = true;
                placed = true;
                break;
            }
        }
        assert!(
            placed,
            "orthonormal completion always succeeds when rows exceed rank"
        );
    }
}

/// Resolves the sign ambiguity of singular vectors.
///
/// For each column `k`, if the entry of `U_{·k}` with the largest absolute
/// value (first such entry on ties) is negative, both `U_{·k}` and `V_{·k}`
/// are negated. The leading column additionally gets its entry sum forced
/// non-negative by a joint flip. The product `UΣVᵀ` is unchanged. Idempotent.
pub fn canonicalize_signs<F: Scalar>(mut e: SpectralEmbedding<F>) -> SpectralEmbedding<F> {
    for k in 0..e.kappa() {
        let mut arg_max = 0;
        let mut best = Float::abs(e.u[(0, k)]);
        for i in 1..e.u.nrows() {
            let a = Float::abs(e.u[(i, k)]);
            if a > best {
                best = a;
                arg_max = i;
            }
        }
        if e.u[(arg_max, k)] < F::zero() {
            e.u.column_mut(k).neg_mut();
            e.v.column_mut(k).neg_mut();
        }
    }
    let leading_sum = e.u.column(0).iter().fold(F::zero(), |acc, &x| acc + x);
    if leading_sum < F::zero() {
        e.u.column_mut(0).neg_mut();
        e.v.column_mut(0).neg_mut();
    }
    e
}
