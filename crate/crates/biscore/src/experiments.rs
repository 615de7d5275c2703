//! Simulation harness: scenario grids, a seeded replication loop running
//! all three clustering methods on common draws, aggregation into per-cell
//! means and standard errors, and CSV emission.
//!
//! Determinism contract: every replication's draw is seeded purely from
//! `(master_seed, grid index, replication index)`, and every method run is
//! seeded purely from the replication seed and a per-method constant. The
//! result is therefore independent of worker count, scheduling, and of
//! which other methods run alongside.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baselines::{check_group_counts, nbisc_from_embedding, spectral_coclustering};
use crate::biscore::{biscore_from_embedding, validate_groups, BiScoreError, BiScoreOptions};
use crate::cluster::KmeansOptions;
use crate::dcbm::{sample_adjacency, validate_mixing, DcbmError, DcbmParams};
use crate::error::ErrorKind;
use crate::graph::{giant_component, BipartiteAdjacency};
use crate::metrics::{ari, error_rate, Labeling};
use crate::scalar::Scalar;
use crate::spectral::{truncated_svd, SpectralEmbedding};

/// Default replication count per grid point. Desk-scale; raise it in a
/// custom configuration for publication-quality error bars.
pub const DEFAULT_REPLICATIONS: usize = 100;

/// Errors from scenario configuration and execution.
#[derive(Debug, Error)]
pub enum ExperimentsError {
    #[error("scenario name must be non-empty and free of commas and line breaks")]
    InvalidName,
    #[error("scenario must list at least one method")]
    EmptyMethods,
    #[error("method {0} is listed more than once")]
    DuplicateMethod(Method),
    #[error("replication count must be at least 1")]
    ZeroReplications,
    #[error("grid point {index}: {source}")]
    InvalidGridPoint { index: usize, source: DcbmError },
    #[error(
        "grid point {index}: declared K={declared_k}, L={declared_l} do not match \
         the {rows}x{cols} mixing matrix"
    )]
    GridShapeMismatch {
        index: usize,
        declared_k: usize,
        declared_l: usize,
        rows: usize,
        cols: usize,
    },
    #[error("grid point {index}: rho = {rho} is outside (0, 1]")]
    InvalidRho { index: usize, rho: f64 },
    #[error("grid point {index}: {side} side has {nodes} nodes for {groups} communities")]
    NodeCountTooSmall {
        index: usize,
        side: &'static str,
        nodes: usize,
        groups: usize,
    },
    #[error(
        "grid point {index}: method {method} failed {failures} of {replications} \
         replications (limit 5%); first failure: {first}"
    )]
    TooManyFailures {
        index: usize,
        method: Method,
        failures: usize,
        replications: usize,
        first: String,
    },
    #[error("worker pool: {0}")]
    WorkerPool(String),
}

impl ExperimentsError {
    pub(crate) fn kind(&self) -> ErrorKind {
        match self {
            ExperimentsError::TooManyFailures { .. } => ErrorKind::Degeneracy,
            _ => ErrorKind::Data,
        }
    }
}

/// A clustering method the harness can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Ratio-based clustering of singular vectors (the primary algorithm).
    Biscore,
    /// Row-normalized singular-vector clustering.
    Nbisc,
    /// Degree-normalized spectral co-clustering.
    Spectral,
}

impl Method {
    /// All methods, in canonical reporting order.
    pub const ALL: [Method; 3] = [Method::Biscore, Method::Nbisc, Method::Spectral];

    /// Stable lowercase identifier used in CSV output and on the command
    /// line.
    pub fn name(self) -> &'static str {
        match self {
            Method::Biscore => "biscore",
            Method::Nbisc => "nbisc",
            Method::Spectral => "spectral",
        }
    }

    /// Distinct constant mixed into the replication seed so each method
    /// gets its own reproducible stream.
    fn tag(self) -> u64 {
        match self {
            Method::Biscore => 0xa30f_99b1_7c2d_4e01,
            Method::Nbisc => 0x5e8d_1b42_93f0_6a77,
            Method::Spectral => 0xc47a_d2e9_0b85_31cd,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "biscore" => Ok(Method::Biscore),
            "nbisc" => Ok(Method::Nbisc),
            "spectral" => Ok(Method::Spectral),
            other => Err(format!(
                "unknown method {other:?}; expected biscore, nbisc, or spectral"
            )),
        }
    }
}

/// One cell of a scenario grid: network size, signal level, and mixing
/// matrix. Community counts are the mixing matrix's dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint<F: Scalar> {
    /// Row-node count.
    pub n: usize,
    /// Column-node count.
    pub m: usize,
    /// Signal level in `(0, 1]`.
    pub rho: F,
    /// K×L mixing matrix.
    pub b: DMatrix<F>,
}

impl<F: Scalar> GridPoint<F> {
    /// Row-community count.
    pub fn k(&self) -> usize {
        self.b.nrows()
    }

    /// Column-community count.
    pub fn l(&self) -> usize {
        self.b.ncols()
    }
}

/// A full simulation plan: a named grid, the replication count per cell,
/// the master seed, and the methods to compare.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "ScenarioConfigJson<F>",
    into = "ScenarioConfigJson<F>",
    bound(
        serialize = "F: Serialize + Clone",
        deserialize = "F: serde::de::DeserializeOwned"
    )
)]
pub struct ScenarioConfig<F: Scalar> {
    name: String,
    grid: Vec<GridPoint<F>>,
    replications: usize,
    master_seed: u64,
    methods: Vec<Method>,
}

impl<F: Scalar> ScenarioConfig<F> {
    /// Validates and assembles a configuration. The grid may be empty; each
    /// point must carry a valid mixing matrix, a signal level in `(0, 1]`,
    /// and node counts no smaller than the community counts.
    pub fn new(
        name: impl Into<String>,
        grid: Vec<GridPoint<F>>,
        replications: usize,
        master_seed: u64,
        methods: Vec<Method>,
    ) -> Result<Self, ExperimentsError> {
        let name = name.into();
        if name.is_empty() || name.contains(',') || name.contains(|c: char| c.is_control()) {
            return Err(ExperimentsError::InvalidName);
        }
        if replications == 0 {
            return Err(ExperimentsError::ZeroReplications);
        }
        if methods.is_empty() {
            return Err(ExperimentsError::EmptyMethods);
        }
        for (i, &m) in methods.iter().enumerate() {
            if methods[..i].contains(&m) {
                return Err(ExperimentsError::DuplicateMethod(m));
            }
        }
        for (index, point) in grid.iter().enumerate() {
            validate_mixing(&point.b)
                .map_err(|source| ExperimentsError::InvalidGridPoint { index, source })?;
            let rho = point.rho.to_f64_lossy();
            if !(rho > 0.0 && rho <= 1.0) {
                return Err(ExperimentsError::InvalidRho { index, rho });
            }
            if point.n < point.k() {
                return Err(ExperimentsError::NodeCountTooSmall {
                    index,
                    side: "row",
                    nodes: point.n,
                    groups: point.k(),
                });
            }
            if point.m < point.l() {
                return Err(ExperimentsError::NodeCountTooSmall {
                    index,
                    side: "column",
                    nodes: point.m,
                    groups: point.l(),
                });
            }
        }
        Ok(Self {
            name,
            grid,
            replications,
            master_seed,
            methods,
        })
    }

    /// Scenario identifier, echoed in the CSV.
    pub fn name(&self) -> &str {
        &self.name
    }

    /// The grid cells in execution order.
    pub fn grid(&self) -> &[GridPoint<F>] {
        &self.grid
    }

    /// Replications per grid cell.
    pub fn replications(&self) -> usize {
        self.replications
    }

    /// Root of the deterministic seed tree.
    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    /// Methods to run, in reporting order.
    pub fn methods(&self) -> &[Method] {
        &self.methods
    }

    /// Returns the configuration with a different replication count.
    pub fn with_replications(self, replications: usize) -> Result<Self, ExperimentsError> {
        if replications == 0 {
            return Err(ExperimentsError::ZeroReplications);
        }
        Ok(Self {
            replications,
            ..self
        })
    }

    /// Returns the configuration with a different master seed.
    pub fn with_master_seed(self, master_seed: u64) -> Self {
        Self {
            master_seed,
            ..self
        }
    }
}

/// Plain-JSON shape of [`ScenarioConfig`]: mixing matrices as nested
/// row-major arrays with their dimensions spelled out.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound(
    serialize = "F: Serialize",
    deserialize = "F: serde::de::DeserializeOwned"
))]
struct ScenarioConfigJson<F> {
    name: String,
    grid: Vec<GridPointJson<F>>,
    replications: usize,
    master_seed: u64,
    methods: Vec<Method>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound(
    serialize = "F: Serialize",
    deserialize = "F: serde::de::DeserializeOwned"
))]
struct GridPointJson<F> {
    n: usize,
    m: usize,
    rho: F,
    #[serde(rename = "K")]
    k: usize,
    #[serde(rename = "L")]
    l: usize,
    #[serde(rename = "B")]
    b: Vec<Vec<F>>,
}

impl<F: Scalar> From<ScenarioConfig<F>> for ScenarioConfigJson<F> {
    fn from(cfg: ScenarioConfig<F>) -> Self {
        Self {
            name: cfg.name,
            grid: cfg
                .grid
                .into_iter()
                .map(|p| GridPointJson {
                    n: p.n,
                    m: p.m,
                    rho: p.rho,
                    k: p.b.nrows(),
                    l: p.b.ncols(),
                    b: (0..p.b.nrows())
                        .map(|i| (0..p.b.ncols()).map(|j| p.b[(i, j)]).collect())
                        .collect(),
                })
                .collect(),
            replications: cfg.replications,
            master_seed: cfg.master_seed,
            methods: cfg.methods,
        }
    }
}

impl<F: Scalar> TryFrom<ScenarioConfigJson<F>> for ScenarioConfig<F> {
    type Error = ExperimentsError;

    fn try_from(j: ScenarioConfigJson<F>) -> Result<Self, ExperimentsError> {
        let mut grid = Vec::with_capacity(j.grid.len());
        for (index, p) in j.grid.into_iter().enumerate() {
            let rows = p.b.len();
            let cols = p.b.first().map_or(0, Vec::len);
            if rows != p.k || cols != p.l || p.b.iter().any(|row| row.len() != cols) {
                return Err(ExperimentsError::GridShapeMismatch {
                    index,
                    declared_k: p.k,
                    declared_l: p.l,
                    rows,
                    cols,
                });
            }
            let mut b = DMatrix::<F>::zeros(rows, cols);
            for (i, row) in p.b.iter().enumerate() {
                for (jj, &value) in row.iter().enumerate() {
                    b[(i, jj)] = value;
                }
            }
            grid.push(GridPoint {
                n: p.n,
                m: p.m,
                rho: p.rho,
                b,
            });
        }
        ScenarioConfig::new(j.name, grid, j.replications, j.master_seed, j.methods)
    }
}

/// Metrics from one successful method run on one replication. Combined
/// values take the worse side (larger error, smaller agreement).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricSample {
    /// max(row, column) misclustered fraction, permutation-minimized.
    pub error_rate: f64,
    /// min(row, column) adjusted Rand index.
    pub ari: f64,
    /// Row-side misclustered fraction.
    pub row_error_rate: f64,
    /// Column-side misclustered fraction.
    pub col_error_rate: f64,
    /// Row-side adjusted Rand index.
    pub row_ari: f64,
    /// Column-side adjusted Rand index.
    pub col_ari: f64,
}

/// Per-(grid cell, method) aggregate: the retained samples plus the count
/// of failed replications.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CellStats {
    samples: Vec<MetricSample>,
    failures: usize,
}

impl CellStats {
    /// Number of successful replications.
    pub fn reps(&self) -> usize {
        self.samples.len()
    }

    /// Number of failed (quarantined) replications.
    pub fn failures(&self) -> usize {
        self.failures
    }

    /// The per-replication samples, in replication order.
    pub fn samples(&self) -> &[MetricSample] {
        &self.samples
    }

    /// Mean combined error rate.
    pub fn mean_error_rate(&self) -> f64 {
        self.mean(|s| s.error_rate)
    }

    /// Standard error of the combined error rate.
    pub fn stderr_error_rate(&self) -> f64 {
        self.stderr(|s| s.error_rate)
    }

    /// Mean combined adjusted Rand index.
    pub fn mean_ari(&self) -> f64 {
        self.mean(|s| s.ari)
    }

    /// Standard error of the combined adjusted Rand index.
    pub fn stderr_ari(&self) -> f64 {
        self.stderr(|s| s.ari)
    }

    /// Mean row-side error rate.
    pub fn mean_row_error_rate(&self) -> f64 {
        self.mean(|s| s.row_error_rate)
    }

    /// Mean column-side error rate.
    pub fn mean_col_error_rate(&self) -> f64 {
        self.mean(|s| s.col_error_rate)
    }

    /// Mean row-side adjusted Rand index.
    pub fn mean_row_ari(&self) -> f64 {
        self.mean(|s| s.row_ari)
    }

    /// Mean column-side adjusted Rand index.
    pub fn mean_col_ari(&self) -> f64 {
        self.mean(|s| s.col_ari)
    }

    fn mean(&self, f: impl Fn(&MetricSample) -> f64) -> f64 {
        if self.samples.is_empty() {
            return f64::NAN;
        }
        self.samples.iter().map(f).sum::<f64>() / self.samples.len() as f64
    }

    fn stderr(&self, f: impl Fn(&MetricSample) -> f64) -> f64 {
        let n = self.samples.len();
        if n < 2 {
            return 0.0;
        }
        let mean = self.mean(&f);
        let var = self
            .samples
            .iter()
            .map(|s| {
                let d = f(s) - mean;
                d * d
            })
            .sum::<f64>()
            / (n - 1) as f64;
        (var / n as f64).sqrt()
    }
}

/// All aggregates for one grid cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellResult<F: Scalar> {
    /// 0-based position in the grid.
    pub grid_index: usize,
    /// The cell's settings.
    pub point: GridPoint<F>,
    /// Per-method aggregates, in the configuration's method order.
    pub stats: Vec<(Method, CellStats)>,
}

/// Aggregated output of [`run_scenario`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioResult<F: Scalar> {
    /// The configuration's name.
    pub scenario: String,
    /// One entry per grid cell, in grid order.
    pub cells: Vec<CellResult<F>>,
}

/// SplitMix64 output scrambler: a bijection on `u64` with strong avalanche
/// behavior, used to turn structured indices into uncorrelated seeds.
pub(crate) fn splitmix64(value: u64) -> u64 {
    let mut z = value.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for one replication. `(grid_index + 1) << 32 ^ rep` is injective
/// for `rep < 2^32`, and SplitMix64 is a bijection, so seeds are pairwise
/// distinct across the whole run for any fixed master seed.
fn replication_seed(master_seed: u64, grid_index: usize, rep: usize) -> u64 {
    let cell = (((grid_index as u64) + 1) << 32) ^ rep as u64;
    splitmix64(master_seed ^ splitmix64(cell))
}

/// Seed for one method run within a replication. Tags are pairwise
/// distinct, so the three methods draw independent streams while method
/// subsets leave each other's streams untouched.
fn method_seed(rep_seed: u64, method: Method) -> u64 {
    splitmix64(rep_seed ^ method.tag())
}

enum RepOutcome {
    /// Sampling or component extraction failed; counts against every method.
    Shared(String),
    /// Per-method outcomes, in the configuration's method order.
    Methods(Vec<Result<MetricSample, String>>),
}

/// Draws one network, extracts its giant component, and runs every method
/// on it. Truth labels are restricted to the retained nodes; metrics are
/// computed on those nodes only.
fn run_replication<F: Scalar>(
    point: &GridPoint<F>,
    methods: &[Method],
    rep_seed: u64,
) -> RepOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(rep_seed);
    let params = match DcbmParams::sample(&point.b, point.n, point.m, point.rho, &mut rng) {
        Ok(p) => p,
        Err(e) => return RepOutcome::Shared(e.to_string()),
    };
    let a = sample_adjacency(&params, &mut rng);
    let (giant, kept_rows, kept_cols) = match giant_component(&a) {
        Ok(t) => t,
        Err(e) => return RepOutcome::Shared(e.to_string()),
    };
    let truth_rows = match params.row_labels().select(&kept_rows) {
        Ok(l) => l,
        Err(e) => return RepOutcome::Shared(e.to_string()),
    };
    let truth_cols = match params.col_labels().select(&kept_cols) {
        Ok(l) => l,
        Err(e) => return RepOutcome::Shared(e.to_string()),
    };
    let (k, l) = (point.k(), point.l());

    // Both singular-vector methods decompose the same matrix at
    // κ = min(K, L); compute that decomposition once and clone it.
    let mut svd_cache: Option<Result<SpectralEmbedding<F>, String>> = None;
    let mut cached_svd = |giant: &BipartiteAdjacency<F>| {
        svd_cache
            .get_or_insert_with(|| {
                truncated_svd(giant, k.min(l)).map_err(|e| BiScoreError::from(e).to_string())
            })
            .clone()
    };

    let outcomes = methods
        .iter()
        .map(|&method| {
            let mut method_rng = ChaCha8Rng::seed_from_u64(method_seed(rep_seed, method));
            let labels = match method {
                Method::Biscore => validate_groups(&giant, k, l)
                    .map_err(|e| e.to_string())
                    .and_then(|_| cached_svd(&giant))
                    .and_then(|emb| {
                        biscore_from_embedding(
                            emb,
                            k,
                            l,
                            &BiScoreOptions::default(),
                            &mut method_rng,
                        )
                        .map(|r| (r.row_labels, r.col_labels))
                        .map_err(|e| e.to_string())
                    }),
                Method::Nbisc => check_group_counts(&giant, k, l)
                    .map_err(|e| e.to_string())
                    .and_then(|_| cached_svd(&giant))
                    .and_then(|emb| {
                        nbisc_from_embedding(emb, k, l, &KmeansOptions::default(), &mut method_rng)
                            .map(|r| (r.row_labels, r.col_labels))
                            .map_err(|e| e.to_string())
                    }),
                Method::Spectral => {
                    spectral_coclustering(&giant, k, l, &KmeansOptions::default(), &mut method_rng)
                        .map(|r| (r.row_labels, r.col_labels))
                        .map_err(|e| e.to_string())
                }
            };
            labels.and_then(|(row_pred, col_pred)| {
                score(&truth_rows, &row_pred, &truth_cols, &col_pred)
            })
        })
        .collect();
    RepOutcome::Methods(outcomes)
}

fn score(
    truth_rows: &Labeling,
    row_pred: &Labeling,
    truth_cols: &Labeling,
    col_pred: &Labeling,
) -> Result<MetricSample, String> {
    let row_error_rate = error_rate(truth_rows, row_pred).map_err(|e| e.to_string())?;
    let col_error_rate = error_rate(truth_cols, col_pred).map_err(|e| e.to_string())?;
    let row_ari = ari(truth_rows, row_pred).map_err(|e| e.to_string())?;
    let col_ari = ari(truth_cols, col_pred).map_err(|e| e.to_string())?;
    Ok(MetricSample {
        error_rate: row_error_rate.max(col_error_rate),
        ari: row_ari.min(col_ari),
        row_error_rate,
        col_error_rate,
        row_ari,
        col_ari,
    })
}

/// Runs every grid cell for `cfg.replications()` replications on a private
/// worker pool of `jobs` threads (`0` = one per core). `progress` receives
/// strictly increasing `(completed, total)` replication counts.
///
/// A replication that fails (degenerate draw, method breakdown) is
/// quarantined and excluded from the aggregates; a cell where any method
/// loses more than 5% of its replications aborts the run.
pub fn run_scenario<F: Scalar>(
    cfg: &ScenarioConfig<F>,
    jobs: usize,
    progress: impl Fn(usize, usize) + Sync,
) -> Result<ScenarioResult<F>, ExperimentsError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| ExperimentsError::WorkerPool(e.to_string()))?;
    let total = cfg.grid.len() * cfg.replications;
    let done = AtomicUsize::new(0);
    let reported = Mutex::new(0usize);

    let mut cells = Vec::with_capacity(cfg.grid.len());
    for (grid_index, point) in cfg.grid.iter().enumerate() {
        let outcomes: Vec<RepOutcome> = pool.install(|| {
            (0..cfg.replications)
                .into_par_iter()
                .map(|rep| {
                    let outcome = run_replication(
                        point,
                        &cfg.methods,
                        replication_seed(cfg.master_seed, grid_index, rep),
                    );
                    let finished = done.fetch_add(1, Ordering::SeqCst) + 1;
                    let mut last = reported.lock().expect("progress lock");
                    if finished > *last {
                        *last = finished;
                        progress(finished, total);
                    }
                    outcome
                })
                .collect()
        });

        let mut stats: Vec<(Method, CellStats)> = cfg
            .methods
            .iter()
            .map(|&m| (m, CellStats::default()))
            .collect();
        let mut first_failure: Option<String> = None;
        for outcome in outcomes {
            match outcome {
                RepOutcome::Shared(reason) => {
                    for (_, cell) in &mut stats {
                        cell.failures += 1;
                    }
                    first_failure.get_or_insert(reason);
                }
                RepOutcome::Methods(list) => {
                    for ((_, cell), result) in stats.iter_mut().zip(list) {
                        match result {
                            Ok(sample) => cell.samples.push(sample),
                            Err(reason) => {
                                cell.failures += 1;
                                first_failure.get_or_insert(reason);
                            }
                        }
                    }
                }
            }
        }

        for (method, cell) in &stats {
            if cell.failures as f64 > cfg.replications as f64 * 0.05 {
                return Err(ExperimentsError::TooManyFailures {
                    index: grid_index,
                    method: *method,
                    failures: cell.failures,
                    replications: cfg.replications,
                    first: first_failure.unwrap_or_default(),
                });
            }
        }
        cells.push(CellResult {
            grid_index,
            point: point.clone(),
            stats,
        });
    }
    Ok(ScenarioResult {
        scenario: cfg.name.clone(),
        cells,
    })
}

/// Writes the aggregates as CSV: one header line, then one row per
/// (grid cell, method, metric) in grid → method → (ErrorRate, ARI) order.
/// Statistics are printed with 6 significant digits.
pub fn emit_csv<F: Scalar, W: Write>(result: &ScenarioResult<F>, sink: &mut W) -> io::Result<()> {
    writeln!(
        sink,
        "scenario,grid_index,n,m,rho,K,L,method,metric,mean,stderr,reps"
    )?;
    for cell in &result.cells {
        for (method, stats) in &cell.stats {
            for (metric, mean, stderr) in [
                (
                    "ErrorRate",
                    stats.mean_error_rate(),
                    stats.stderr_error_rate(),
                ),
                ("ARI", stats.mean_ari(), stats.stderr_ari()),
            ] {
                writeln!(
                    sink,
                    "{},{},{},{},{},{},{},{},{},{:.5e},{:.5e},{}",
                    result.scenario,
                    cell.grid_index,
                    cell.point.n,
                    cell.point.m,
                    cell.point.rho.to_f64_lossy(),
                    cell.point.k(),
                    cell.point.l(),
                    method,
                    metric,
                    mean,
                    stderr,
                    stats.reps(),
                )?;
            }
        }
    }
    Ok(())
}

fn matrix_from_rows<F: Scalar>(rows: &[&[f64]]) -> DMatrix<F> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut out = DMatrix::<F>::zeros(nrows, ncols);
    for (i, row) in rows.iter().enumerate() {
        for (j, &value) in row.iter().enumerate() {
            out[(i, j)] = F::from_f64_lossy(value);
        }
    }
    out
}

/// The four built-in scenario configurations: balanced sizes, unbalanced
/// sizes, a signal-level sweep, and growing community counts. All use 100
/// replications, master seed 0, and all three methods.
pub fn builtin_scenarios<F: Scalar>() -> Vec<ScenarioConfig<F>> {
    let all = Method::ALL.to_vec();

    let b1 = matrix_from_rows::<F>(&[&[1.0, 0.1, 0.2], &[0.3, 0.9, 0.1]]);
    let sizes1 = [
        (500, 525),
        (1000, 1050),
        (1500, 1575),
        (2000, 2100),
        (2500, 2625),
        (3000, 3150),
    ];
    let scenario1 = ScenarioConfig::new(
        "1",
        sizes1
            .into_iter()
            .map(|(n, m)| GridPoint {
                n,
                m,
                rho: F::from_f64_lossy(0.2),
                b: b1.clone(),
            })
            .collect(),
        DEFAULT_REPLICATIONS,
        0,
        all.clone(),
    )
    .expect("built-in scenario 1 is valid");

    let b2 = matrix_from_rows::<F>(&[&[0.9, 0.1, 0.2], &[0.2, 1.0, 0.1]]);
    let sizes2 = [
        (50, 1500),
        (100, 3000),
        (150, 4500),
        (200, 6000),
        (250, 7500),
        (300, 9000),
    ];
    let scenario2 = ScenarioConfig::new(
        "2",
        sizes2
            .into_iter()
            .map(|(n, m)| GridPoint {
                n,
                m,
                rho: F::from_f64_lossy(0.9),
                b: b2.clone(),
            })
            .collect(),
        DEFAULT_REPLICATIONS,
        0,
        all.clone(),
    )
    .expect("built-in scenario 2 is valid");

    let b3 = matrix_from_rows::<F>(&[&[1.0, 0.2, 0.1], &[0.2, 0.9, 0.3]]);
    let rhos = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0];
    let scenario3 = ScenarioConfig::new(
        "3",
        rhos.into_iter()
            .map(|rho| GridPoint {
                n: 1000,
                m: 1050,
                rho: F::from_f64_lossy(rho),
                b: b3.clone(),
            })
            .collect(),
        DEFAULT_REPLICATIONS,
        0,
        all.clone(),
    )
    .expect("built-in scenario 3 is valid");

    let b4_1 = matrix_from_rows::<F>(&[&[1.0, 0.3, 0.1], &[0.3, 1.0, 0.1]]);
    let b4_2 = matrix_from_rows::<F>(&[
        &[1.0, 0.2, 0.3, 0.1, 0.3],
        &[0.3, 0.1, 1.0, 0.1, 0.3],
        &[0.3, 0.1, 0.3, 0.2, 1.0],
    ]);
    let b4_3 = matrix_from_rows::<F>(&[
        &[1.0, 0.2, 0.1, 0.3, 0.1, 0.3, 0.1],
        &[0.3, 0.1, 0.3, 1.0, 0.2, 0.3, 0.1],
        &[0.3, 0.1, 0.1, 0.3, 0.1, 1.0, 0.3],
    ]);
    let scenario4 = ScenarioConfig::new(
        "4",
        [b4_1, b4_2, b4_3]
            .into_iter()
            .map(|b| GridPoint {
                n: 1000,
                m: 1050,
                rho: F::from_f64_lossy(0.9),
                b,
            })
            .collect(),
        DEFAULT_REPLICATIONS,
        0,
        all,
    )
    .expect("built-in scenario 4 is valid");

    vec![scenario1, scenario2, scenario3, scenario4]
}
