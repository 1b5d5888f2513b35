//! Walk graphs and their dissipation operators.
//!
//! The walks live on a line segment of `n` vertices (labels `1..=n`) or on a
//! truncated line (labels `-m..=m`, used as a finite stand-in for the infinite
//! line). The Hamiltonian is always the adjacency matrix, which for these
//! graphs is tridiagonal with unit off-diagonals.
//!
//! Two dissipation models are supported:
//! * a local set with one jump operator per directed edge, weighted by the
//!   inverse degree of the source vertex (continuous local measurement /
//!   energy damping), and
//! * a single global operator with 1/2 on both off-diagonals (continuous
//!   position measurement).

use ndarray::Array2;

use crate::error::{Error, Result};

/// Which graph family an adjacency matrix belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphKind {
    /// Line segment with vertices labeled `1..=n`.
    Segment,
    /// Odd-length line with vertices labeled `-(n-1)/2 ..= (n-1)/2`.
    TruncatedLine,
}

/// Adjacency matrix of the walk graph together with its vertex labeling.
#[derive(Debug, Clone)]
pub struct AdjacencySpec {
    n: usize,
    kind: GraphKind,
    matrix: Array2<f64>,
}

impl AdjacencySpec {
    /// Number of vertices.
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn kind(&self) -> GraphKind {
        self.kind
    }

    /// The adjacency matrix (symmetric, zero diagonal, 0/1 entries).
    pub fn matrix(&self) -> &Array2<f64> {
        &self.matrix
    }

    /// Smallest vertex label.
    pub fn min_label(&self) -> i64 {
        match self.kind {
            GraphKind::Segment => 1,
            GraphKind::TruncatedLine => -((self.n as i64 - 1) / 2),
        }
    }

    /// Largest vertex label.
    pub fn max_label(&self) -> i64 {
        match self.kind {
            GraphKind::Segment => self.n as i64,
            GraphKind::TruncatedLine => (self.n as i64 - 1) / 2,
        }
    }

    /// Map a vertex label to its matrix index.
    pub fn index_of(&self, label: i64) -> Result<usize> {
        if label < self.min_label() || label > self.max_label() {
            return Err(Error::VertexOutOfRange {
                label,
                min: self.min_label(),
                max: self.max_label(),
            });
        }
        Ok((label - self.min_label()) as usize)
    }

    /// Map a matrix index back to its vertex label.
    pub fn label_of(&self, index: usize) -> i64 {
        self.min_label() + index as i64
    }

    /// Vertex degree (1 at segment ends, otherwise 2; 0 for a single vertex).
    pub fn degree(&self, index: usize) -> usize {
        let mut deg = 0;
        if index > 0 {
            deg += 1;
        }
        if index + 1 < self.n {
            deg += 1;
        }
        deg
    }
}

/// Which dissipation model a [`DissipatorSpec`] encodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DissipatorKind {
    /// One jump operator per directed edge, degree-weighted.
    LocalSet,
    /// Single symmetric operator, constant 1/2 on the off-diagonals.
    GlobalSum,
}

/// A set of Lindblad jump operators acting on the walk graph.
#[derive(Debug, Clone)]
pub struct DissipatorSpec {
    kind: DissipatorKind,
    operators: Vec<Array2<f64>>,
}

impl DissipatorSpec {
    pub fn kind(&self) -> DissipatorKind {
        self.kind
    }

    pub fn operators(&self) -> &[Array2<f64>] {
        &self.operators
    }
}

/// Build the adjacency matrix of a line segment with vertices `1..=n`.
pub fn build_segment(n: usize) -> Result<AdjacencySpec> {
    tridiagonal_adjacency(n, GraphKind::Segment)
}

/// Build a truncated line with `2 * half_width + 1` vertices labeled
/// `-half_width ..= half_width`.
pub fn build_truncated_line(half_width: usize) -> Result<AdjacencySpec> {
    tridiagonal_adjacency(2 * half_width + 1, GraphKind::TruncatedLine)
}

fn tridiagonal_adjacency(n: usize, kind: GraphKind) -> Result<AdjacencySpec> {
    if n == 0 {
        return Err(Error::InvalidSize("graph needs at least one vertex".into()));
    }
    let mut matrix = Array2::zeros((n, n));
    for i in 0..n.saturating_sub(1) {
        matrix[[i, i + 1]] = 1.0;
        matrix[[i + 1, i]] = 1.0;
    }
    Ok(AdjacencySpec { n, kind, matrix })
}

/// Build the local jump-operator set: `L = |target><source| / deg(source)`
/// for every directed edge. Interior line vertices get coefficient 1/2,
/// segment endpoints coefficient 1.
pub fn build_local_dissipators(adj: &AdjacencySpec) -> DissipatorSpec {
    let n = adj.len();
    let mut operators = Vec::new();
    for source in 0..n {
        for target in 0..n {
            if adj.matrix[[target, source]] != 0.0 {
                let mut op = Array2::zeros((n, n));
                op[[target, source]] = 1.0 / adj.degree(source) as f64;
                operators.push(op);
            }
        }
    }
    DissipatorSpec {
        kind: DissipatorKind::LocalSet,
        operators,
    }
}

/// Build the single global dissipation operator with matrix elements 1/2 on
/// both off-diagonals and 0 elsewhere, so that twice the operator equals the
/// adjacency matrix exactly.
pub fn build_global_dissipator(adj: &AdjacencySpec) -> DissipatorSpec {
    let op = adj.matrix.mapv(|a| 0.5 * a);
    DissipatorSpec {
        kind: DissipatorKind::GlobalSum,
        operators: vec![op],
    }
}
