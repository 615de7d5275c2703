//! Citation-network community discovery: sweep candidate column-community
//! counts, cluster cited journals, rank each community's members by weighted
//! in-degree, and summarize citing-side attention as a normalized heatmap.
//!
//! The sweep reports fit diagnostics for every candidate and makes no
//! automatic choice; the caller inspects the table and fixes the community
//! count for the final clustering.

use std::collections::{BTreeMap, HashMap};

use nalgebra::DMatrix;
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::biscore::{biscore, BiScoreError, BiScoreOptions, BiScoreResult};
use crate::error::ErrorKind;
use crate::experiments::splitmix64;
use crate::graph::{weighted_in_degree, BipartiteAdjacency};
use crate::metrics::Labeling;
use crate::scalar::Scalar;

/// Errors from the discovery pipeline.
#[derive(Debug, Error)]
pub enum KnowledgeError {
    #[error("candidate list for the community-count sweep is empty")]
    EmptyCandidates,
    #[error("sweep candidate {candidate} is out of range; candidates must lie in 2..={max}")]
    CandidateOutOfRange { candidate: usize, max: usize },
    #[error("community {community} does not exist; the report has communities 1..={max}")]
    UnknownCommunity { community: usize, max: usize },
    #[error("journal {name:?} from the report is not a column of the network")]
    JournalNotInNetwork { name: String },
    #[error(transparent)]
    BiScore(#[from] BiScoreError),
}

impl KnowledgeError {
    pub(crate) fn kind(&self) -> ErrorKind {
        match self {
            KnowledgeError::BiScore(e) => e.kind(),
            _ => ErrorKind::Data,
        }
    }
}

/// Fit diagnostics for one candidate community count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "F: Serialize",
    deserialize = "F: serde::de::DeserializeOwned"
))]
pub struct SweepEntry<F: Scalar> {
    /// The candidate column-community count.
    #[serde(rename = "L")]
    pub l: usize,
    /// Within-cluster sum of squares of the row clustering.
    pub row_sse: F,
    /// Within-cluster sum of squares of the column clustering.
    pub col_sse: F,
    /// Row nodes with at least one ratio at the clip bound.
    pub clipped_row_nodes: usize,
    /// Column nodes with at least one ratio at the clip bound.
    pub clipped_col_nodes: usize,
    /// Row-cluster sizes, by cluster id.
    pub row_cluster_sizes: Vec<usize>,
    /// Column-cluster sizes, by cluster id.
    pub col_cluster_sizes: Vec<usize>,
}

/// One cited-journal community: its members ranked by weighted in-degree
/// (descending, ties by column order).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "F: Serialize",
    deserialize = "F: serde::de::DeserializeOwned"
))]
pub struct CommunitySummary<F: Scalar> {
    /// Community id in `1..=L`.
    pub id: usize,
    /// Number of member journals.
    pub size: usize,
    /// Every member with its weighted in-degree, strongest first.
    pub top: Vec<JournalRank<F>>,
}

/// A journal and its weighted in-degree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "F: Serialize",
    deserialize = "F: serde::de::DeserializeOwned"
))]
pub struct JournalRank<F: Scalar> {
    /// Column-node identifier.
    pub journal: String,
    /// Total citation weight received.
    pub in_degree: F,
}

/// Full output of community detection on a citation network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "F: Serialize",
    deserialize = "F: serde::de::DeserializeOwned"
))]
pub struct CommunityReport<F: Scalar> {
    /// The chosen column-community count.
    #[serde(rename = "L")]
    pub l: usize,
    /// Community id per cited journal.
    pub assignments: BTreeMap<String, usize>,
    /// Per-community member lists, by community id.
    pub communities: Vec<CommunitySummary<F>>,
    /// Citing-row × community citation mass, log-transformed and row-max
    /// normalized; entries in `[0, 1]`.
    pub heatmap: Vec<Vec<F>>,
    /// Sweep diagnostics; always covers the chosen count.
    pub diagnostics: Vec<SweepEntry<F>>,
}

/// Runs the clustering once per candidate `L` and tabulates fit diagnostics.
/// Candidates run on independent seeds derived from one draw of `rng`, so
/// the table does not depend on candidate order-of-execution.
///
/// No candidate is selected automatically; inspect the table (the natural
/// signal is a local minimum of `col_sse`) and pass the chosen count to
/// [`detect_communities`].
pub fn sweep_l<F: Scalar>(
    a: &BipartiteAdjacency<F>,
    k: usize,
    candidates: &[usize],
    rng: &mut (impl Rng + ?Sized),
) -> Result<Vec<SweepEntry<F>>, KnowledgeError> {
    if candidates.is_empty() {
        return Err(KnowledgeError::EmptyCandidates);
    }
    for &l in candidates {
        if l < 2 || l > a.ncols() {
            return Err(KnowledgeError::CandidateOutOfRange {
                candidate: l,
                max: a.ncols(),
            });
        }
    }
    let base = rng.next_u64();
    let mut entries = Vec::with_capacity(candidates.len());
    for &l in candidates {
        let mut run_rng = ChaCha8Rng::seed_from_u64(splitmix64(base ^ l as u64));
        let result = biscore(a, k, l, &BiScoreOptions::default(), &mut run_rng)?;
        entries.push(sweep_entry(l, &result));
    }
    Ok(entries)
}

/// Clusters the cited journals into `L` communities (and citing rows into
/// `K` groups) and assembles the full report: assignments, ranked member
/// lists, the transformed heatmap, and a single-row diagnostics table.
pub fn detect_communities<F: Scalar>(
    a: &BipartiteAdjacency<F>,
    k: usize,
    l: usize,
    rng: &mut (impl Rng + ?Sized),
) -> Result<CommunityReport<F>, KnowledgeError> {
    let result = biscore(a, k, l, &BiScoreOptions::default(), rng)?;
    let diagnostics = vec![sweep_entry(l, &result)];
    Ok(build_report(a, l, &result, diagnostics))
}

/// The full pipeline: sweep the candidates, then detect communities at the
/// fixed count `l`. The report's diagnostics carry the whole sweep table,
/// extended with the chosen count's own entry when it was not a candidate.
pub fn knowledge_pipeline<F: Scalar>(
    a: &BipartiteAdjacency<F>,
    k: usize,
    l: usize,
    candidates: &[usize],
    rng: &mut (impl Rng + ?Sized),
) -> Result<CommunityReport<F>, KnowledgeError> {
    let mut diagnostics = sweep_l(a, k, candidates, rng)?;
    let result = biscore(a, k, l, &BiScoreOptions::default(), rng)?;
    if !candidates.contains(&l) {
        diagnostics.push(sweep_entry(l, &result));
    }
    Ok(build_report(a, l, &result, diagnostics))
}

/// Raw heatmap: entry `(i, c)` is the total weight from row `i` into the
/// columns labeled `c + 1`, so each row sums to the row's total weight.
///
/// `labels` must assign one community per column.
pub fn community_column_sums<F: Scalar>(
    a: &BipartiteAdjacency<F>,
    labels: &Labeling,
) -> DMatrix<F> {
    assert_eq!(labels.len(), a.ncols(), "one label per column is required");
    let w = a.weights();
    let mut m = DMatrix::<F>::zeros(a.nrows(), labels.k());
    for j in 0..a.ncols() {
        let c = labels.values()[j] - 1;
        for i in 0..a.nrows() {
            m[(i, c)] += w[(i, j)];
        }
    }
    m
}

/// Entrywise `x → ln(1 + x)`, then each row divided by its maximum.
/// All-zero rows stay zero; outputs lie in `[0, 1]`.
pub fn heatmap_transform<F: Scalar>(m: &DMatrix<F>) -> DMatrix<F> {
    let mut out = DMatrix::<F>::zeros(m.nrows(), m.ncols());
    for i in 0..m.nrows() {
        let mut row_max = F::zero();
        for j in 0..m.ncols() {
            let v = Float::ln_1p(m[(i, j)]);
            out[(i, j)] = v;
            row_max = Float::max(row_max, v);
        }
        if row_max > F::zero() {
            for j in 0..m.ncols() {
                out[(i, j)] /= row_max;
            }
        }
    }
    out
}

/// Restricts the network to the columns of one community (rows unchanged,
/// column order preserved), ready for a second detection pass. Row and
/// column identifiers are materialized on the result so they keep referring
/// to the original nodes.
pub fn subnetwork<F: Scalar>(
    a: &BipartiteAdjacency<F>,
    report: &CommunityReport<F>,
    community: usize,
) -> Result<BipartiteAdjacency<F>, KnowledgeError> {
    if community < 1 || community > report.l {
        return Err(KnowledgeError::UnknownCommunity {
            community,
            max: report.l,
        });
    }
    let index_by_name: HashMap<String, usize> =
        (0..a.ncols()).map(|j| (a.col_name(j), j)).collect();
    let mut kept = Vec::new();
    for (name, &id) in &report.assignments {
        if id == community {
            match index_by_name.get(name) {
                Some(&j) => kept.push(j),
                None => return Err(KnowledgeError::JournalNotInNetwork { name: name.clone() }),
            }
        }
    }
    if kept.is_empty() {
        return Err(KnowledgeError::UnknownCommunity {
            community,
            max: report.l,
        });
    }
    kept.sort_unstable();
    let weights = a.weights().select_columns(kept.iter());
    let row_names = (0..a.nrows()).map(|i| a.row_name(i)).collect();
    let col_names = kept.iter().map(|&j| a.col_name(j)).collect();
    Ok(
        BipartiteAdjacency::with_names(weights, row_names, col_names)
            .expect("a column subset of a valid network is valid"),
    )
}

fn sweep_entry<F: Scalar>(l: usize, result: &BiScoreResult<F>) -> SweepEntry<F> {
    SweepEntry {
        l,
        row_sse: result.row_sse,
        col_sse: result.col_sse,
        clipped_row_nodes: result.ratios.clipped_row_nodes(),
        clipped_col_nodes: result.ratios.clipped_col_nodes(),
        row_cluster_sizes: cluster_sizes(&result.row_labels),
        col_cluster_sizes: cluster_sizes(&result.col_labels),
    }
}

fn cluster_sizes(labels: &Labeling) -> Vec<usize> {
    let mut sizes = vec![0usize; labels.k()];
    for &v in labels.values() {
        sizes[v - 1] += 1;
    }
    sizes
}

fn build_report<F: Scalar>(
    a: &BipartiteAdjacency<F>,
    l: usize,
    result: &BiScoreResult<F>,
    diagnostics: Vec<SweepEntry<F>>,
) -> CommunityReport<F> {
    let labels = result.col_labels.values();
    let in_degrees = weighted_in_degree(a);

    let mut assignments = BTreeMap::new();
    for (j, &label) in labels.iter().enumerate() {
        assignments.insert(a.col_name(j), label);
    }

    let mut communities = Vec::with_capacity(l);
    for id in 1..=l {
        let mut members: Vec<usize> = (0..a.ncols()).filter(|&j| labels[j] == id).collect();
        members.sort_by(|&x, &y| {
            in_degrees[y]
                .partial_cmp(&in_degrees[x])
                .expect("in-degrees are finite")
                .then(x.cmp(&y))
        });
        let top: Vec<JournalRank<F>> = members
            .iter()
            .map(|&j| JournalRank {
                journal: a.col_name(j),
                in_degree: in_degrees[j],
            })
            .collect();
        communities.push(CommunitySummary {
            id,
            size: top.len(),
            top,
        });
    }

    let transformed = heatmap_transform(&community_column_sums(a, &result.col_labels));
    let heatmap = (0..transformed.nrows())
        .map(|i| {
            (0..transformed.ncols())
                .map(|j| transformed[(i, j)])
                .collect()
        })
        .collect();

    CommunityReport {
        l,
        assignments,
        communities,
        heatmap,
        diagnostics,
    }
}
