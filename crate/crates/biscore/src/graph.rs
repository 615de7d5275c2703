//! Bipartite network representation, edge-list ingestion, filtering,
//! connectivity, and degree statistics.
//!
//! A network is a dense `n x m` non-negative weight matrix: rows are one node
//! set (e.g. citing journals), columns the other (cited journals). Dense
//! storage is deliberate — the citation networks this crate targets are
//! small, and the simulation matrices (up to 3000 x 3150) fit comfortably.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use nalgebra::DMatrix;
use thiserror::Error;

use crate::scalar::Scalar;

/// Errors from network construction and edge-list handling.
#[derive(Debug, Error)]
pub enum GraphError {
    #[error("edge list line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("edge list contains no edges")]
    EmptyInput,
    #[error("adjacency matrix must have at least one row and one column")]
    EmptyMatrix,
    #[error("weight at row {row}, column {col} is negative or non-finite")]
    InvalidWeight { row: usize, col: usize },
    #[error("{side} name list has length {got}, expected {expected}")]
    NameLength {
        side: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("duplicate {side} name {name:?}")]
    DuplicateName { side: &'static str, name: String },
    #[error("column filter at threshold {threshold} removed every column")]
    AllColumnsFiltered { threshold: f64 },
    #[error("giant component contains no {0} nodes; the network has no edges")]
    DegenerateComponent(&'static str),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

/// A weighted bipartite network: the observed adjacency `A`.
///
/// Invariants (enforced at construction): all weights finite and `>= 0`,
/// both dimensions at least 1, and name lists — when present — match the
/// dimensions exactly with no duplicates.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteAdjacency<F: Scalar> {
    weights: DMatrix<F>,
    row_names: Option<Vec<String>>,
    col_names: Option<Vec<String>>,
}

impl<F: Scalar> BipartiteAdjacency<F> {
    /// Wraps a weight matrix without names.
    pub fn new(weights: DMatrix<F>) -> Result<Self, GraphError> {
        Self::build(weights, None, None)
    }

    /// Wraps a weight matrix with row and column identifiers.
    pub fn with_names(
        weights: DMatrix<F>,
        row_names: Vec<String>,
        col_names: Vec<String>,
    ) -> Result<Self, GraphError> {
        Self::build(weights, Some(row_names), Some(col_names))
    }

    fn build(
        weights: DMatrix<F>,
        row_names: Option<Vec<String>>,
        col_names: Option<Vec<String>>,
    ) -> Result<Self, GraphError> {
        if weights.nrows() == 0 || weights.ncols() == 0 {
            return Err(GraphError::EmptyMatrix);
        }
        for j in 0..weights.ncols() {
            for i in 0..weights.nrows() {
                let w = weights[(i, j)];
                if !w.is_finite() || w < F::zero() {
                    return Err(GraphError::InvalidWeight { row: i, col: j });
                }
            }
        }
        check_names("row", &row_names, weights.nrows())?;
        check_names("column", &col_names, weights.ncols())?;
        Ok(Self {
            weights,
            row_names,
            col_names,
        })
    }

    /// Number of row nodes `n`.
    pub fn nrows(&self) -> usize {
        self.weights.nrows()
    }

    /// Number of column nodes `m`.
    pub fn ncols(&self) -> usize {
        self.weights.ncols()
    }

    /// The weight matrix.
    pub fn weights(&self) -> &DMatrix<F> {
        &self.weights
    }

    /// Row identifiers, if any were attached.
    pub fn row_names(&self) -> Option<&[String]> {
        self.row_names.as_deref()
    }

    /// Column identifiers, if any were attached.
    pub fn col_names(&self) -> Option<&[String]> {
        self.col_names.as_deref()
    }

    /// Name of row `i`, synthesizing `r1`, `r2`, ... when no names are stored.
    pub fn row_name(&self, i: usize) -> String {
        match &self.row_names {
            Some(names) => names[i].clone(),
            None => format!("r{}", i + 1),
        }
    }

    /// Name of column `j`, synthesizing `c1`, `c2`, ... when no names are stored.
    pub fn col_name(&self, j: usize) -> String {
        match &self.col_names {
            Some(names) => names[j].clone(),
            None => format!("c{}", j + 1),
        }
    }

    /// Total weight over all entries.
    pub fn total_weight(&self) -> F {
        let mut sum = F::zero();
        for &w in self.weights.iter() {
            sum += w;
        }
        sum
    }
}

fn check_names(
    side: &'static str,
    names: &Option<Vec<String>>,
    expected: usize,
) -> Result<(), GraphError> {
    let Some(names) = names else { return Ok(()) };
    if names.len() != expected {
        return Err(GraphError::NameLength {
            side,
            expected,
            got: names.len(),
        });
    }
    let mut seen = HashMap::with_capacity(names.len());
    for name in names {
        if seen.insert(name.as_str(), ()).is_some() {
            return Err(GraphError::DuplicateName {
                side,
                name: name.clone(),
            });
        }
    }
    Ok(())
}

/// Parses a tab-separated edge list: `citing<TAB>cited<TAB>count` per line,
/// with `#`-prefixed comment lines and blank lines ignored.
///
/// Rows are indexed by distinct citing names in first-appearance order,
/// columns by distinct cited names in first-appearance order; duplicate
/// `(citing, cited)` pairs have their counts summed.
pub fn load_edge_list<F: Scalar>(
    source: impl BufRead,
) -> Result<BipartiteAdjacency<F>, GraphError> {
    let mut row_index: HashMap<String, usize> = HashMap::new();
    let mut col_index: HashMap<String, usize> = HashMap::new();
    let mut row_names: Vec<String> = Vec::new();
    let mut col_names: Vec<String> = Vec::new();
    let mut edges: Vec<(usize, usize, u64)> = Vec::new();

    for (line_no, line) in source.lines().enumerate() {
        let line_no = line_no + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(GraphError::Parse {
                line: line_no,
                reason: format!("expected 3 tab-separated fields, found {}", fields.len()),
            });
        }
        let count: u64 = fields[2].trim().parse().map_err(|_| GraphError::Parse {
            line: line_no,
            reason: format!("count {:?} is not a non-negative integer", fields[2].trim()),
        })?;
        let citing = fields[0].trim();
        let cited = fields[1].trim();
        if citing.is_empty() || cited.is_empty() {
            return Err(GraphError::Parse {
                line: line_no,
                reason: "empty node name".to_string(),
            });
        }
        let i = *row_index.entry(citing.to_string()).or_insert_with(|| {
            row_names.push(citing.to_string());
            row_names.len() - 1
        });
        let j = *col_index.entry(cited.to_string()).or_insert_with(|| {
            col_names.push(cited.to_string());
            col_names.len() - 1
        });
        edges.push((i, j, count));
    }

    if edges.is_empty() {
        return Err(GraphError::EmptyInput);
    }
    let mut weights = DMatrix::<F>::zeros(row_names.len(), col_names.len());
    for (i, j, count) in edges {
        weights[(i, j)] += F::from_f64_lossy(count as f64);
    }
    BipartiteAdjacency::with_names(weights, row_names, col_names)
}

/// Writes the edge-list format read by [`load_edge_list`]: one line per
/// nonzero entry, row-major, using stored names or the synthesized
/// `r{i}`/`c{j}` defaults.
///
/// All-zero rows or columns produce no lines and are therefore not
/// representable in this format; loading the output back reconstructs the
/// network restricted to nodes with at least one edge.
pub fn save_edge_list<F: Scalar>(
    a: &BipartiteAdjacency<F>,
    mut sink: impl Write,
) -> Result<(), GraphError> {
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            let w = a.weights()[(i, j)];
            if w > F::zero() {
                writeln!(sink, "{}\t{}\t{}", a.row_name(i), a.col_name(j), w)?;
            }
        }
    }
    Ok(())
}

/// Keeps column `j` iff `max_i A_ij >= threshold`; rows are unchanged and
/// surviving entries are bit-identical, in their original order.
pub fn filter_columns<F: Scalar>(
    a: &BipartiteAdjacency<F>,
    threshold: F,
) -> Result<BipartiteAdjacency<F>, GraphError> {
    let kept: Vec<usize> = (0..a.ncols())
        .filter(|&j| (0..a.nrows()).any(|i| a.weights()[(i, j)] >= threshold))
        .collect();
    if kept.is_empty() {
        return Err(GraphError::AllColumnsFiltered {
            threshold: threshold.to_f64_lossy(),
        });
    }
    let weights = a.weights().select_columns(kept.iter());
    let col_names = a
        .col_names()
        .map(|names| kept.iter().map(|&j| names[j].clone()).collect());
    BipartiteAdjacency::build(weights, a.row_names.clone(), col_names)
}

/// Extracts the connected component with the most total nodes (rows plus
/// columns), treating every positive weight as an edge.
///
/// Ties go to the component containing the smallest row index, then the
/// smallest column index. Returns the induced submatrix together with the
/// kept row and column indices (ascending).
///
/// A network with no edges at all has only single-node components, whose
/// induced submatrix would be empty on one side; that corner is reported as
/// [`GraphError::DegenerateComponent`] because an adjacency matrix with a
/// zero dimension is not representable.
#[allow(clippy::type_complexity)]
pub fn giant_component<F: Scalar>(
    a: &BipartiteAdjacency<F>,
) -> Result<(BipartiteAdjacency<F>, Vec<usize>, Vec<usize>), GraphError> {
    let n = a.nrows();
    let m = a.ncols();
    // Node ids: 0..n are rows, n..n+m are columns.
    let mut visited = vec![false; n + m];
    let mut best: Option<(usize, usize, usize, Vec<usize>)> = None; // (size, min_row, min_col, members)

    for start in 0..n + m {
        if visited[start] {
            continue;
        }
        let mut stack = vec![start];
        visited[start] = true;
        let mut members = Vec::new();
        while let Some(node) = stack.pop() {
            members.push(node);
            if node < n {
                for j in 0..m {
                    if a.weights()[(node, j)] > F::zero() && !visited[n + j] {
                        visited[n + j] = true;
                        stack.push(n + j);
                    }
                }
            } else {
                let j = node - n;
                // Indexed loop kept to mirror the row branch above.
                #[allow(clippy::needless_range_loop)]
                for i in 0..n {
                    if a.weights()[(i, j)] > F::zero() && !visited[i] {
                        visited[i] = true;
                        stack.push(i);
                    }
                }
            }
        }
        let size = members.len();
        let min_row = members
            .iter()
            .filter(|&&v| v < n)
            .min()
            .copied()
            .unwrap_or(usize::MAX);
        let min_col = members
            .iter()
            .filter(|&&v| v >= n)
            .min()
            .map(|&v| v - n)
            .unwrap_or(usize::MAX);
        let better = match &best {
            None => true,
            Some((bs, br, bc, _)) => {
                (size, std::cmp::Reverse(min_row), std::cmp::Reverse(min_col))
                    > (*bs, std::cmp::Reverse(*br), std::cmp::Reverse(*bc))
            }
        };
        if better {
            best = Some((size, min_row, min_col, members));
        }
    }

    let (_, _, _, members) = best.expect("at least one node exists");
    let mut kept_rows: Vec<usize> = members.iter().filter(|&&v| v < n).copied().collect();
    let mut kept_cols: Vec<usize> = members
        .iter()
        .filter(|&&v| v >= n)
        .map(|&v| v - n)
        .collect();
    kept_rows.sort_unstable();
    kept_cols.sort_unstable();
    if kept_rows.is_empty() {
        return Err(GraphError::DegenerateComponent("row"));
    }
    if kept_cols.is_empty() {
        return Err(GraphError::DegenerateComponent("column"));
    }

    let weights = a
        .weights()
        .select_rows(kept_rows.iter())
        .select_columns(kept_cols.iter());
    let row_names = a
        .row_names()
        .map(|names| kept_rows.iter().map(|&i| names[i].clone()).collect());
    let col_names = a
        .col_names()
        .map(|names| kept_cols.iter().map(|&j| names[j].clone()).collect());
    let sub = BipartiteAdjacency::build(weights, row_names, col_names)?;
    Ok((sub, kept_rows, kept_cols))
}

/// Weighted in-degree of every column: `C_w(j) = sum_i A_ij`.
pub fn weighted_in_degree<F: Scalar>(a: &BipartiteAdjacency<F>) -> Vec<F> {
    (0..a.ncols())
        .map(|j| {
            let mut sum = F::zero();
            for i in 0..a.nrows() {
                sum += a.weights()[(i, j)];
            }
            sum
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn load(text: &str) -> Result<BipartiteAdjacency<f64>, GraphError> {
        load_edge_list(Cursor::new(text.as_bytes()))
    }

    #[test]
    fn load_preserves_first_appearance_order() {
        let a = load("a\tx\t3\na\ty\t1\nb\tx\t2").unwrap();
        assert_eq!(a.row_names().unwrap(), &["a", "b"]);
        assert_eq!(a.col_names().unwrap(), &["x", "y"]);
        assert_eq!(
            a.weights(),
            &DMatrix::from_row_slice(2, 2, &[3.0, 1.0, 2.0, 0.0])
        );
    }

    #[test]
    fn load_sums_duplicate_pairs() {
        let a = load("a\tx\t3\na\tx\t4").unwrap();
        assert_eq!(a.weights(), &DMatrix::from_row_slice(1, 1, &[7.0]));
    }

    #[test]
    fn load_rejects_negative_count() {
        match load("a\tx\t-1") {
            Err(GraphError::Parse { line: 1, .. }) => {}
            other => panic!("expected parse error at line 1, got {other:?}"),
        }
    }

    #[test]
    fn load_rejects_wrong_field_count_with_line_number() {
        match load("a\tx\t1\nb\tx") {
            Err(GraphError::Parse { line: 2, .. }) => {}
            other => panic!("expected parse error at line 2, got {other:?}"),
        }
    }

    #[test]
    fn load_skips_comments_and_blank_lines() {
        let a = load("# header\n\na\tx\t5\n   \n# trailing\n").unwrap();
        assert_eq!(a.weights(), &DMatrix::from_row_slice(1, 1, &[5.0]));
    }

    #[test]
    fn load_rejects_empty_input() {
        assert!(matches!(
            load("# only comments\n"),
            Err(GraphError::EmptyInput)
        ));
    }

    #[test]
    fn save_then_load_roundtrips_up_to_merging() {
        let a = load("a\tx\t3\na\ty\t1\nb\tx\t2").unwrap();
        let mut buf = Vec::new();
        save_edge_list(&a, &mut buf).unwrap();
        let b = load(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(a.weights(), b.weights());
        assert_eq!(a.row_names(), b.row_names());
        assert_eq!(a.col_names(), b.col_names());
    }

    #[test]
    fn save_synthesizes_names_when_absent() {
        let a = BipartiteAdjacency::new(DMatrix::from_row_slice(1, 2, &[1.5, 0.0])).unwrap();
        let mut buf = Vec::new();
        save_edge_list(&a, &mut buf).unwrap();
        assert_eq!(std::str::from_utf8(&buf).unwrap(), "r1\tc1\t1.5\n");
    }

    #[test]
    fn construction_rejects_negative_and_non_finite() {
        assert!(matches!(
            BipartiteAdjacency::new(DMatrix::from_row_slice(1, 2, &[1.0, -0.5])),
            Err(GraphError::InvalidWeight { row: 0, col: 1 })
        ));
        assert!(BipartiteAdjacency::new(DMatrix::from_row_slice(1, 1, &[f64::NAN])).is_err());
        assert!(matches!(
            BipartiteAdjacency::<f64>::new(DMatrix::zeros(0, 3)),
            Err(GraphError::EmptyMatrix)
        ));
    }

    #[test]
    fn construction_rejects_bad_names() {
        let w = DMatrix::from_row_slice(1, 2, &[1.0, 2.0]);
        assert!(matches!(
            BipartiteAdjacency::with_names(w.clone(), vec!["a".into()], vec!["x".into()]),
            Err(GraphError::NameLength { side: "column", .. })
        ));
        assert!(matches!(
            BipartiteAdjacency::with_names(w, vec!["a".into()], vec!["x".into(), "x".into()]),
            Err(GraphError::DuplicateName { side: "column", .. })
        ));
    }

    #[test]
    fn filter_drops_columns_below_threshold() {
        let a = load("a\tx\t3\na\ty\t1\nb\tx\t2").unwrap();
        let f = filter_columns(&a, 2.0).unwrap();
        assert_eq!(f.col_names().unwrap(), &["x"]);
        assert_eq!(f.weights(), &DMatrix::from_row_slice(2, 1, &[3.0, 2.0]));
    }

    #[test]
    fn filter_at_zero_is_identity() {
        let a = load("a\tx\t3\na\ty\t1\nb\tx\t2").unwrap();
        let f = filter_columns(&a, 0.0).unwrap();
        assert_eq!(f.weights(), a.weights());
    }

    #[test]
    fn filter_errors_when_everything_drops() {
        let a = load("a\tx\t1\na\ty\t1").unwrap();
        assert!(matches!(
            filter_columns(&a, 5.0),
            Err(GraphError::AllColumnsFiltered { .. })
        ));
    }

    #[test]
    fn filter_is_idempotent() {
        let a = load("a\tx\t3\na\ty\t1\nb\tx\t2\nb\tz\t9").unwrap();
        let once = filter_columns(&a, 2.0).unwrap();
        let twice = filter_columns(&once, 2.0).unwrap();
        assert_eq!(once.weights(), twice.weights());
        assert_eq!(once.col_names(), twice.col_names());
    }

    #[test]
    fn giant_component_is_identity_on_connected_input() {
        let a = load("a\tx\t3\na\ty\t1\nb\tx\t2").unwrap();
        let (sub, rows, cols) = giant_component(&a).unwrap();
        assert_eq!(sub.weights(), a.weights());
        assert_eq!(rows, vec![0, 1]);
        assert_eq!(cols, vec![0, 1]);
    }

    #[test]
    fn giant_component_keeps_larger_component() {
        // row0-col0 connected; row1 and col1 isolated.
        let w = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let a = BipartiteAdjacency::new(w).unwrap();
        let (sub, rows, cols) = giant_component(&a).unwrap();
        assert_eq!(rows, vec![0]);
        assert_eq!(cols, vec![0]);
        assert_eq!(sub.weights(), &DMatrix::from_row_slice(1, 1, &[1.0]));
    }

    #[test]
    fn giant_component_tie_goes_to_smallest_row_index() {
        // Two disjoint 1-row-1-col components of equal size.
        let w = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        let a = BipartiteAdjacency::new(w).unwrap();
        let (_, rows, cols) = giant_component(&a).unwrap();
        assert_eq!((rows, cols), (vec![0], vec![0]));
    }

    #[test]
    fn giant_component_on_edgeless_network_reports_degeneracy() {
        let a = BipartiteAdjacency::new(DMatrix::<f64>::zeros(2, 3)).unwrap();
        assert!(matches!(
            giant_component(&a),
            Err(GraphError::DegenerateComponent(_))
        ));
    }

    #[test]
    fn giant_component_output_is_connected() {
        // Random-ish sparse pattern with several components.
        let mut w = DMatrix::zeros(6, 7);
        for &(i, j) in &[
            (0usize, 0usize),
            (0, 2),
            (2, 2),
            (2, 5),
            (4, 5),
            (1, 1),
            (3, 3),
        ] {
            w[(i, j)] = 1.0;
        }
        let a = BipartiteAdjacency::new(w).unwrap();
        let (sub, rows, cols) = giant_component(&a).unwrap();
        assert_eq!(rows, vec![0, 2, 4]);
        assert_eq!(cols, vec![0, 2, 5]);
        // BFS over the submatrix must reach every node from node 0.
        let n = sub.nrows();
        let m = sub.ncols();
        let mut seen = vec![false; n + m];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            #[allow(clippy::needless_range_loop)]
            for u in 0..n + m {
                let connected = if v < n && u >= n {
                    sub.weights()[(v, u - n)] > 0.0
                } else if v >= n && u < n {
                    sub.weights()[(u, v - n)] > 0.0
                } else {
                    false
                };
                if connected && !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        assert!(seen.iter().all(|&s| s), "giant component must be connected");
    }

    #[test]
    fn weighted_in_degree_matches_column_sums() {
        let a = load("a\tx\t3\na\ty\t1\nb\tx\t2").unwrap();
        assert_eq!(weighted_in_degree(&a), vec![5.0, 1.0]);
        let single = BipartiteAdjacency::new(DMatrix::from_row_slice(1, 2, &[4.0, 7.0])).unwrap();
        assert_eq!(weighted_in_degree(&single), vec![4.0, 7.0]);
        let zero = BipartiteAdjacency::new(DMatrix::from_row_slice(2, 2, &[0.0; 4])).unwrap();
        assert_eq!(weighted_in_degree(&zero), vec![0.0, 0.0]);
    }

    #[test]
    fn weighted_in_degree_sums_to_total_weight() {
        let a = load("a\tx\t3\na\ty\t1\nb\tx\t2\nb\tz\t9").unwrap();
        let total: f64 = weighted_in_degree(&a).iter().sum();
        assert_eq!(total, a.total_weight());
    }
}
