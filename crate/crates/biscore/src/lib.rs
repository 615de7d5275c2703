//! Spectral community detection for weighted bipartite networks.
//!
//! The crate clusters the two node sets of a weighted bipartite network
//! (e.g. citing journals × cited journals) into `K` row and `L` column
//! communities under a degree-corrected block model, using entrywise ratios
//! of singular vectors to cancel nuisance degree heterogeneity. It ships:
//!
//! - [`biscore()`]: the ratio-based spectral method ([`mod@biscore`]),
//!   with [`nbisc`](baselines::nbisc) and
//!   [`spectral_coclustering`](baselines::spectral_coclustering) as
//!   comparison baselines;
//! - a Poisson block-model generator with exact population oracles
//!   ([`dcbm`]);
//! - permutation-minimized error rate and adjusted Rand index
//!   ([`metrics`]);
//! - a simulation harness with deterministic seeding and CSV output
//!   ([`experiments`]);
//! - a citation-network community-discovery pipeline ([`knowledge`]).
//!
//! All numeric code is generic over the floating-point scalar through
//! [`Scalar`]; `f64` is the default precision and `f32` is supported
//! throughout. The `*F64`/`*F32` aliases at the crate root pin the main
//! types to a concrete precision.
//!
//! # Quick start
//!
//! ```
//! use biscore::{BiScoreOptions, BipartiteAdjacencyF64};
//! use nalgebra::DMatrix;
//! use rand::SeedableRng;
//! use rand_chacha::ChaCha8Rng;
//!
//! // Two citing blocks and two cited blocks with clearly different rates.
//! let weights = DMatrix::from_fn(8, 10, |i, j| {
//!     if (i < 4) == (j < 5) { 9.0 } else { 1.0 }
//! });
//! let network = BipartiteAdjacencyF64::new(weights)?;
//! let mut rng = ChaCha8Rng::seed_from_u64(7);
//! let fit = biscore::biscore(&network, 2, 2, &BiScoreOptions::default(), &mut rng)?;
//! assert_eq!(fit.row_labels.values()[0], fit.row_labels.values()[3]);
//! assert_ne!(fit.row_labels.values()[0], fit.row_labels.values()[4]);
//! # Ok::<(), biscore::Error>(())
//! ```

pub mod baselines;
pub mod biscore;
pub mod cluster;
pub mod dcbm;
pub mod error;
pub mod experiments;
pub mod graph;
pub mod knowledge;
pub mod metrics;
pub mod scalar;
pub mod spectral;

pub use crate::biscore::{
    biscore, build_ratio_matrix, BiScoreError, BiScoreOptions, BiScoreResult, ClusterResultJson,
    RatioMatrices,
};
pub use baselines::{nbisc, spectral_coclustering, BaselineResult};
pub use cluster::{kmeans, ClusterError, KmeansOptions, KmeansResult};
pub use dcbm::{
    expected_adjacency, population_ratio_matrices, population_s, sample_adjacency,
    sample_degree_params, sample_labels, DcbmError, DcbmParams,
};
pub use error::{Error, ErrorKind, Result};
pub use experiments::{
    builtin_scenarios, emit_csv, run_scenario, CellResult, CellStats, ExperimentsError, GridPoint,
    Method, MetricSample, ScenarioConfig, ScenarioResult, DEFAULT_REPLICATIONS,
};
pub use graph::{
    filter_columns, giant_component, load_edge_list, save_edge_list, weighted_in_degree,
    BipartiteAdjacency, GraphError,
};
pub use knowledge::{
    community_column_sums, detect_communities, heatmap_transform, knowledge_pipeline, subnetwork,
    sweep_l, CommunityReport, CommunitySummary, JournalRank, KnowledgeError, SweepEntry,
};
pub use metrics::{ari, combined_ari, combined_error_rate, error_rate, Labeling, MetricsError};
pub use scalar::Scalar;
pub use spectral::{canonicalize_signs, truncated_svd, SpectralEmbedding, SpectralError};

/// Double-precision bipartite network.
pub type BipartiteAdjacencyF64 = graph::BipartiteAdjacency<f64>;
/// Single-precision bipartite network.
pub type BipartiteAdjacencyF32 = graph::BipartiteAdjacency<f32>;
/// Double-precision truncated decomposition.
pub type SpectralEmbeddingF64 = spectral::SpectralEmbedding<f64>;
/// Single-precision truncated decomposition.
pub type SpectralEmbeddingF32 = spectral::SpectralEmbedding<f32>;
/// Double-precision block-model parameters.
pub type DcbmParamsF64 = dcbm::DcbmParams<f64>;
/// Single-precision block-model parameters.
pub type DcbmParamsF32 = dcbm::DcbmParams<f32>;
/// Double-precision clustering options.
pub type BiScoreOptionsF64 = biscore::BiScoreOptions<f64>;
/// Single-precision clustering options.
pub type BiScoreOptionsF32 = biscore::BiScoreOptions<f32>;
/// Double-precision clustering result.
pub type BiScoreResultF64 = biscore::BiScoreResult<f64>;
/// Single-precision clustering result.
pub type BiScoreResultF32 = biscore::BiScoreResult<f32>;
/// Double-precision baseline result.
pub type BaselineResultF64 = baselines::BaselineResult<f64>;
/// Single-precision baseline result.
pub type BaselineResultF32 = baselines::BaselineResult<f32>;
/// Double-precision scenario configuration.
pub type ScenarioConfigF64 = experiments::ScenarioConfig<f64>;
/// Single-precision scenario configuration.
pub type ScenarioConfigF32 = experiments::ScenarioConfig<f32>;
/// Double-precision community report.
pub type CommunityReportF64 = knowledge::CommunityReport<f64>;
/// Single-precision community report.
pub type CommunityReportF32 = knowledge::CommunityReport<f32>;
