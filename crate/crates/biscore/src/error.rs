//! Crate-level error umbrella.
//!
//! Each module defines its own `thiserror` enum; this module aggregates them
//! so applications (notably the CLI) can match one type and classify failures
//! into broad kinds without inspecting every variant.

use thiserror::Error;

/// Coarse classification of an error, used to pick process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Malformed or inconsistent input: parse failures, invalid parameters,
    /// empty networks, mismatched lengths.
    Data,
    /// The computation itself degenerated: singular-vector sign ambiguity,
    /// non-convergence, unsupported rank configuration.
    Degeneracy,
}

/// Any error produced by this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Graph(#[from] crate::graph::GraphError),
    #[error(transparent)]
    Dcbm(#[from] crate::dcbm::DcbmError),
    #[error(transparent)]
    Spectral(#[from] crate::spectral::SpectralError),
    #[error(transparent)]
    Cluster(#[from] crate::cluster::ClusterError),
    #[error(transparent)]
    BiScore(#[from] crate::biscore::BiScoreError),
    #[error(transparent)]
    Metrics(#[from] crate::metrics::MetricsError),
    #[error(transparent)]
    Experiments(#[from] crate::experiments::ExperimentsError),
    #[error(transparent)]
    Knowledge(#[from] crate::knowledge::KnowledgeError),
}

impl Error {
    /// Classifies the error for exit-code selection.
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Graph(_) | Error::Metrics(_) => ErrorKind::Data,
            Error::Dcbm(e) => e.kind(),
            Error::Spectral(e) => e.kind(),
            Error::Cluster(e) => e.kind(),
            Error::BiScore(e) => e.kind(),
            Error::Experiments(e) => e.kind(),
            Error::Knowledge(e) => e.kind(),
        }
    }
}

/// Crate-wide result alias.
pub type Result<T, E = Error> = std::result::Result<T, E>;
