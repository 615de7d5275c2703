//! Command-line front end for bipartite community detection.
//!
//! Five subcommands cover the full workflow: `generate` samples a network
//! from block-model parameters, `cluster` runs one detection method on an
//! edge list, `simulate` sweeps a benchmark scenario into a CSV, `knowledge`
//! runs the citation-network pipeline, and `metrics` scores a predicted
//! labeling against a reference. Everything is deterministic given `--seed`.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error (unreadable or
//! inconsistent input), 3 numerical degeneracy (the computation itself
//! cannot proceed, e.g. an embedding with fewer than two directions).

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind as ClapErrorKind;
use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use biscore::{
    builtin_scenarios, combined_ari, combined_error_rate, emit_csv, filter_columns,
    giant_component, knowledge_pipeline, load_edge_list, nbisc, run_scenario, sample_adjacency,
    save_edge_list, spectral_coclustering, BiScoreOptions, ClusterResultJson, DcbmParams,
    ErrorKind, KmeansOptions, Labeling, Method, ScenarioConfig,
};

#[derive(Parser)]
#[command(
    name = "biscore",
    version,
    about = "Community detection for weighted bipartite networks",
    long_about = "Community detection for weighted bipartite networks.\n\n\
        Samples degree-corrected block-model networks, clusters them with\n\
        ratio-based spectral methods, benchmarks the methods over simulation\n\
        scenarios, and extracts cited-journal communities from citation data."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

const EDGE_LIST_HELP: &str =
    "Edge lists are TSV with one `citing<TAB>cited<TAB>count` edge per line;\n\
    `#` starts a comment, blank lines are skipped, duplicate pairs are summed,\n\
    and nodes are numbered in order of first appearance.";

#[derive(Subcommand)]
enum Command {
    /// Sample a weighted bipartite network from block-model parameters.
    #[command(after_help = format!(
        "The parameter file is JSON with fields K, L, B, theta, gamma, row_labels,\n\
         col_labels: B is a K-by-L nested array of block rates (row-major), theta\n\
         and gamma are per-node activity weights, and the labels are 1-based\n\
         community ids. Each cell of the output is an independent Poisson draw\n\
         with mean theta[i] * gamma[j] * B[label(i)][label(j)].\n\n\
         {EDGE_LIST_HELP}\n\
         Zero cells are omitted. A `<out>.labels.json` sidecar records the planted\n\
         communities as {{\"K\", \"L\", \"row_labels\", \"col_labels\"}}."
    ))]
    Generate {
        /// Block-model parameter file (JSON).
        #[arg(long, value_name = "FILE")]
        params: PathBuf,
        /// RNG seed; the same seed always yields the same network.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output edge-list path (TSV).
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },

    /// Cluster an edge list into K row and L column communities.
    #[command(after_help = format!(
        "{EDGE_LIST_HELP}\n\n\
         The result JSON has fields row_labels, col_labels (1-based community\n\
         ids), sigma (leading singular values), row_sse, col_sse (k-means\n\
         objectives), and tau_n, tau_m (ratio clipping bounds; null for nbisc\n\
         and spectral, which do not clip)."
    ))]
    Cluster {
        /// Input edge list (TSV).
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        /// Detection method: biscore, nbisc, or spectral.
        #[arg(long, default_value = "biscore")]
        method: Method,
        /// Number of row communities.
        #[arg(long = "K", value_name = "NUM")]
        k: usize,
        /// Number of column communities.
        #[arg(long = "L", value_name = "NUM")]
        l: usize,
        /// RNG seed for the k-means restarts.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output result path (JSON).
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },

    /// Run a simulation scenario and write per-cell summary statistics.
    #[command(
        after_help = "A scenario file is JSON with fields name, grid, replications, master_seed,\n\
         and methods. Each grid entry is {\"n\", \"m\", \"rho\", \"K\", \"L\", \"B\"} with B a\n\
         K-by-L nested array; methods is a list drawn from [\"biscore\", \"nbisc\",\n\
         \"spectral\"]. Built-in scenarios 1-4 cover growing size, aspect ratio 30,\n\
         a sparsity sweep, and growing community counts.\n\n\
         The CSV has columns scenario,grid_index,n,m,rho,K,L,method,metric,mean,\n\
         stderr,reps with one row per (grid point, method, metric); the metrics\n\
         are ErrorRate and ARI. Output bytes are identical for any --jobs value."
    )]
    Simulate {
        /// Built-in scenario number (1-4) or path to a scenario JSON file.
        #[arg(long, value_name = "NUM|FILE")]
        scenario: String,
        /// Replications per grid point (default: the scenario's own count).
        #[arg(long, value_name = "NUM")]
        reps: Option<usize>,
        /// Master seed (default: the scenario's own seed).
        #[arg(long, value_name = "NUM")]
        seed: Option<u64>,
        /// Worker threads; 0 means one per CPU core.
        #[arg(long, default_value_t = 1, value_name = "NUM")]
        jobs: usize,
        /// Output CSV path.
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },

    /// Discover cited-journal communities in a citation edge list.
    #[command(after_help = format!(
        "{EDGE_LIST_HELP}\n\n\
         Pipeline: drop cited columns whose largest single count is below\n\
         --threshold, keep the giant component, tabulate the --L-sweep\n\
         candidates, then cluster with the chosen --L. The report JSON has\n\
         fields L, assignments (journal -> community id), communities (id,\n\
         size, top: members ranked by received citation weight), heatmap\n\
         (citing-row by community citation mass, log-transformed and row-max\n\
         normalized), and diagnostics (the sweep table; always includes the\n\
         chosen L)."
    ))]
    Knowledge {
        /// Input citation edge list (TSV).
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        /// Keep a cited column only if some single count reaches this value.
        #[arg(long, default_value_t = 40.0, value_name = "NUM")]
        threshold: f64,
        /// Candidate community counts: `a..b` (inclusive) or `3,5,7`.
        #[arg(long = "L-sweep", value_name = "RANGE")]
        l_sweep: Option<String>,
        /// Column-community count for the final clustering.
        #[arg(long = "L", value_name = "NUM")]
        l: usize,
        /// Row-community count (default: min of the row count and L).
        #[arg(long = "K", value_name = "NUM")]
        k: Option<usize>,
        /// RNG seed for sweep and final clustering.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output report path (JSON).
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },

    /// Score a predicted labeling against a reference labeling.
    #[command(
        after_help = "Both files are JSON holding row_labels and col_labels arrays (1-based\n\
         community ids); the `generate` sidecar and the `cluster` result both\n\
         qualify. Community counts are taken from K/L fields when present and\n\
         from the largest label otherwise. Prints the combined error rate (the\n\
         worse side's misclustering fraction under the best label matching) and\n\
         the combined adjusted Rand index (the worse side's agreement)."
    )]
    Metrics {
        /// Reference labeling (JSON).
        #[arg(long, value_name = "FILE")]
        truth: PathBuf,
        /// Predicted labeling (JSON).
        #[arg(long, value_name = "FILE")]
        pred: PathBuf,
    },
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error(transparent)]
    Lib(#[from] biscore::Error),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Io { .. } | CliError::Json { .. } => 2,
            CliError::Lib(e) => match e.kind() {
                ErrorKind::Data => 2,
                ErrorKind::Degeneracy => 3,
            },
        }
    }
}

/// Routes module errors through the library's umbrella enum so exit-code
/// classification lives in one place.
macro_rules! lib_error {
    ($($ty:ty),* $(,)?) => {$(
        impl From<$ty> for CliError {
            fn from(e: $ty) -> Self {
                CliError::Lib(biscore::Error::from(e))
            }
        }
    )*};
}

lib_error!(
    biscore::GraphError,
    biscore::BiScoreError,
    biscore::KnowledgeError,
    biscore::ExperimentsError,
    biscore::MetricsError,
);

fn main() -> ExitCode {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap already routes help to stdout and diagnostics to stderr.
            let _ = e.print();
            return match e.kind() {
                ClapErrorKind::DisplayHelp | ClapErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Generate { params, seed, out } => generate(&params, seed, &out),
        Command::Cluster {
            input,
            method,
            k,
            l,
            seed,
            out,
        } => cluster(&input, method, k, l, seed, &out),
        Command::Simulate {
            scenario,
            reps,
            seed,
            jobs,
            out,
        } => simulate(&scenario, reps, seed, jobs, &out),
        Command::Knowledge {
            input,
            threshold,
            l_sweep,
            l,
            k,
            seed,
            out,
        } => knowledge(&input, threshold, l_sweep.as_deref(), l, k, seed, &out),
        Command::Metrics { truth, pred } => metrics(&truth, &pred),
    }
}

/// Truth-labels sidecar written next to a generated edge list.
#[derive(Serialize, Deserialize)]
struct LabelsFile {
    #[serde(rename = "K", default)]
    k: Option<usize>,
    #[serde(rename = "L", default)]
    l: Option<usize>,
    row_labels: Vec<usize>,
    col_labels: Vec<usize>,
}

fn generate(params_path: &Path, seed: u64, out: &Path) -> Result<(), CliError> {
    let params: DcbmParams<f64> = read_json(params_path)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let network = sample_adjacency(&params, &mut rng);

    let mut sink = create_file(out)?;
    save_edge_list(&network, &mut sink)?;
    finish(sink, out)?;

    // An edge list carries only positive counts, so reading the file back
    // numbers nodes by first appearance and drops isolated ones. Reload what
    // was just written and carry the planted labels over by node name, so the
    // sidecar lines up index-for-index with any later `cluster` run.
    let reloaded = load_edge_list::<f64>(open_file(out)?)?;
    let row_labels = carry_labels(
        params.row_labels().values(),
        |i| reloaded.row_name(i),
        reloaded.nrows(),
    );
    let col_labels = carry_labels(
        params.col_labels().values(),
        |j| reloaded.col_name(j),
        reloaded.ncols(),
    );
    if reloaded.nrows() < params.n() || reloaded.ncols() < params.m() {
        log::warn!(
            "{} all-zero rows and {} all-zero columns were dropped from the edge list",
            params.n() - reloaded.nrows(),
            params.m() - reloaded.ncols()
        );
    }

    let sidecar = LabelsFile {
        k: Some(params.k()),
        l: Some(params.l()),
        row_labels,
        col_labels,
    };
    let sidecar_path = out.with_extension("labels.json");
    write_json(&sidecar_path, &sidecar)?;
    log::info!(
        "wrote {} ({} x {}) and {}",
        out.display(),
        reloaded.nrows(),
        reloaded.ncols(),
        sidecar_path.display()
    );
    Ok(())
}

/// Reorders planted labels to the node numbering an edge-list reader sees;
/// names are the writer's synthesized `r<i>`/`c<j>`, so the digits index the
/// original parameter arrays.
fn carry_labels(labels: &[usize], name_of: impl Fn(usize) -> String, count: usize) -> Vec<usize> {
    (0..count)
        .map(|i| {
            let name = name_of(i);
            let original: usize = name[1..]
                .parse()
                .expect("generated edge lists use synthesized node names");
            labels[original - 1]
        })
        .collect()
}

fn cluster(
    input: &Path,
    method: Method,
    k: usize,
    l: usize,
    seed: u64,
    out: &Path,
) -> Result<(), CliError> {
    let network = load_edge_list::<f64>(open_file(input)?)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let result = match method {
        Method::Biscore => {
            let r = biscore::biscore(&network, k, l, &BiScoreOptions::default(), &mut rng)?;
            ClusterResultJson::from(&r)
        }
        Method::Nbisc | Method::Spectral => {
            let opts = KmeansOptions::default();
            let r = match method {
                Method::Nbisc => nbisc(&network, k, l, &opts, &mut rng)?,
                _ => spectral_coclustering(&network, k, l, &opts, &mut rng)?,
            };
            ClusterResultJson {
                row_labels: r.row_labels.values().to_vec(),
                col_labels: r.col_labels.values().to_vec(),
                sigma: r.sigma,
                row_sse: r.row_sse,
                col_sse: r.col_sse,
                tau_n: None,
                tau_m: None,
            }
        }
    };
    write_json(out, &result)
}

fn simulate(
    scenario: &str,
    reps: Option<usize>,
    seed: Option<u64>,
    jobs: usize,
    out: &Path,
) -> Result<(), CliError> {
    let mut config = resolve_scenario(scenario)?;
    if let Some(reps) = reps {
        if reps == 0 {
            return Err(CliError::Usage("--reps must be at least 1".into()));
        }
        config = config.with_replications(reps)?;
    }
    if let Some(seed) = seed {
        config = config.with_master_seed(seed);
    }

    let result = run_scenario(&config, jobs, |done, total| {
        if done == total || done % 50 == 0 {
            log::info!("{done}/{total} replications");
        }
    })?;

    let mut sink = create_file(out)?;
    emit_csv(&result, &mut sink).map_err(|source| CliError::Io {
        path: out.to_owned(),
        source,
    })?;
    finish(sink, out)
}

fn resolve_scenario(spec: &str) -> Result<ScenarioConfig<f64>, CliError> {
    if let Ok(index) = spec.parse::<usize>() {
        let mut all = builtin_scenarios::<f64>();
        if (1..=all.len()).contains(&index) {
            return Ok(all.swap_remove(index - 1));
        }
        return Err(CliError::Usage(format!(
            "scenario {index} is out of range; built-in scenarios are 1-{}",
            all.len()
        )));
    }
    let path = Path::new(spec);
    if !path.is_file() {
        return Err(CliError::Usage(format!(
            "scenario {spec:?} is neither a built-in number nor a readable file"
        )));
    }
    read_json(path)
}

fn knowledge(
    input: &Path,
    threshold: f64,
    l_sweep: Option<&str>,
    l: usize,
    k: Option<usize>,
    seed: u64,
    out: &Path,
) -> Result<(), CliError> {
    let raw = load_edge_list::<f64>(open_file(input)?)?;
    let filtered = filter_columns(&raw, threshold)?;
    let (network, _, _) = giant_component(&filtered)?;
    log::info!(
        "{} of {} columns, {} of {} rows survive filtering",
        network.ncols(),
        raw.ncols(),
        network.nrows(),
        raw.nrows()
    );

    let k = k.unwrap_or_else(|| network.nrows().min(l));
    let candidates = match l_sweep {
        Some(spec) => parse_sweep(spec)?,
        None => vec![l],
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let report = knowledge_pipeline(&network, k, l, &candidates, &mut rng)?;
    write_json(out, &report)
}

fn parse_sweep(spec: &str) -> Result<Vec<usize>, CliError> {
    let bad = |what: &str| {
        CliError::Usage(format!(
            "--L-sweep expects `a..b` (inclusive) or a comma list like `3,5,7`; {what} in {spec:?}"
        ))
    };
    if let Some((lo, hi)) = spec.split_once("..") {
        let lo: usize = lo.trim().parse().map_err(|_| bad("bad lower bound"))?;
        let hi: usize = hi.trim().parse().map_err(|_| bad("bad upper bound"))?;
        if lo > hi {
            return Err(bad("empty range"));
        }
        return Ok((lo..=hi).collect());
    }
    spec.split(',')
        .map(|item| item.trim().parse::<usize>().map_err(|_| bad("bad count")))
        .collect()
}

fn metrics(truth_path: &Path, pred_path: &Path) -> Result<(), CliError> {
    let truth: LabelsFile = read_json(truth_path)?;
    let pred: LabelsFile = read_json(pred_path)?;

    let side = |declared: &[Option<usize>], labels: [&[usize]; 2]| {
        declared
            .iter()
            .flatten()
            .copied()
            .chain(labels.iter().flat_map(|l| l.iter().copied()))
            .max()
            .unwrap_or(0)
    };
    let k = side(&[truth.k, pred.k], [&truth.row_labels, &pred.row_labels]);
    let l = side(&[truth.l, pred.l], [&truth.col_labels, &pred.col_labels]);

    let row_truth = Labeling::new(truth.row_labels, k).map_err(lib)?;
    let row_pred = Labeling::new(pred.row_labels, k).map_err(lib)?;
    let col_truth = Labeling::new(truth.col_labels, l).map_err(lib)?;
    let col_pred = Labeling::new(pred.col_labels, l).map_err(lib)?;

    let rate = combined_error_rate(&row_truth, &row_pred, &col_truth, &col_pred).map_err(lib)?;
    let agreement = combined_ari(&row_truth, &row_pred, &col_truth, &col_pred).map_err(lib)?;
    println!("ErrorRate {rate}");
    println!("ARI {agreement}");
    Ok(())
}

fn lib(e: biscore::MetricsError) -> CliError {
    e.into()
}

fn open_file(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|source| CliError::Io {
            path: path.to_owned(),
            source,
        })
}

fn create_file(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| CliError::Io {
            path: path.to_owned(),
            source,
        })
}

/// Flushes a buffered writer, surfacing deferred write errors with the path.
fn finish(mut sink: BufWriter<File>, path: &Path) -> Result<(), CliError> {
    sink.flush().map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let reader = open_file(path)?;
    serde_json::from_reader(reader).map_err(|source| CliError::Json {
        path: path.to_owned(),
        source,
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut sink = create_file(path)?;
    serde_json::to_writer_pretty(&mut sink, value).map_err(|source| CliError::Json {
        path: path.to_owned(),
        source,
    })?;
    sink.write_all(b"\n").map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })?;
    finish(sink, path)
}
