//! Realized graphs and expected (edge-probability) matrices.
//!
//! Vertices are `0..n`. Adjacency is stored densely; the target scale is a few
//! thousand vertices, where dense eigensolves dominate cost anyway.

use std::collections::VecDeque;

use thiserror::Error;

use crate::linalg::Matrix;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("vertex {vertex} out of range for graph with {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("self-loop at vertex {0} but self-loops are disabled")]
    SelfLoopNotAllowed(usize),
    #[error(transparent)]
    Matrix(#[from] MatrixViolation),
}

/// First problem found while validating a candidate expected matrix.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum MatrixViolation {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("NaN entry at ({i}, {j})")]
    NaN { i: usize, j: usize },
    #[error("entry {value} at ({i}, {j}) is outside [0, 1]")]
    OutOfRange { i: usize, j: usize, value: f64 },
    #[error("asymmetry at ({i}, {j}): {upper} vs {lower}")]
    Asymmetric {
        i: usize,
        j: usize,
        upper: f64,
        lower: f64,
    },
}

/// Undirected, unweighted graph on `n` vertices.
#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    adjacency: Vec<bool>,
    allow_self_loops: bool,
}

impl std::fmt::Debug for Graph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Graph")
            .field("n", &self.n)
            .field("edges", &self.edges().collect::<Vec<_>>())
            .field("allow_self_loops", &self.allow_self_loops)
            .finish()
    }
}

impl Graph {
    pub fn empty(n: usize, allow_self_loops: bool) -> Self {
        Self {
            n,
            adjacency: vec![false; n * n],
            allow_self_loops,
        }
    }

    pub fn from_edges(
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
        allow_self_loops: bool,
    ) -> Result<Self, GraphError> {
        let mut g = Self::empty(n, allow_self_loops);
        for (u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Self::empty(n, false);
        for i in 0..n {
            for j in (i + 1)..n {
                g.set(i, j, true);
            }
        }
        g
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn allows_self_loops(&self) -> bool {
        self.allow_self_loops
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency[u * self.n + v]
    }

    #[inline]
    fn set(&mut self, u: usize, v: usize, present: bool) {
        self.adjacency[u * self.n + v] = present;
        self.adjacency[v * self.n + u] = present;
    }

    fn check_pair(&self, u: usize, v: usize) -> Result<(), GraphError> {
        for w in [u, v] {
            if w >= self.n {
                return Err(GraphError::VertexOutOfRange { vertex: w, n: self.n });
            }
        }
        if u == v && !self.allow_self_loops {
            return Err(GraphError::SelfLoopNotAllowed(u));
        }
        Ok(())
    }

    /// Inserts the undirected edge `{u, v}`; inserting an existing edge is a no-op.
    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<(), GraphError> {
        self.check_pair(u, v)?;
        self.set(u, v, true);
        Ok(())
    }

    pub fn remove_edge(&mut self, u: usize, v: usize) -> Result<(), GraphError> {
        self.check_pair(u, v)?;
        self.set(u, v, false);
        Ok(())
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.adjacency[v * self.n..(v + 1) * self.n]
            .iter()
            .enumerate()
            .filter_map(|(j, &e)| e.then_some(j))
    }

    /// Adjacency lists, one `Vec` per vertex, neighbors ascending.
    pub fn adjacency_lists(&self) -> Vec<Vec<usize>> {
        (0..self.n).map(|v| self.neighbors(v).collect()).collect()
    }

    /// Edges `(u, v)` with `u <= v`, in row-major order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |u| (u..self.n).filter(move |&v| self.has_edge(u, v)).map(move |v| (u, v)))
    }

    /// Number of edges, self-loops included.
    pub fn edge_count(&self) -> usize {
        self.edges().count()
    }

    pub fn self_loop_count(&self) -> usize {
        (0..self.n).filter(|&i| self.has_edge(i, i)).count()
    }

    pub fn to_matrix(&self) -> Matrix {
        Matrix::from_fn(self.n, self.n, |i, j| if self.has_edge(i, j) { 1.0 } else { 0.0 })
    }

    /// Subgraph induced by `vertices`; new vertex `k` is `vertices[k]`.
    pub fn induced_subgraph(&self, vertices: &[usize]) -> Graph {
        let mut g = Graph::empty(vertices.len(), self.allow_self_loops);
        for (a, &u) in vertices.iter().enumerate() {
            for (b, &v) in vertices.iter().enumerate().skip(a) {
                if self.has_edge(u, v) {
                    g.set(a, b, true);
                }
            }
        }
        g
    }
}

/// Symmetric matrix of edge probabilities in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectedMatrix {
    entries: Matrix,
}

impl ExpectedMatrix {
    /// Validates `matrix` and symmetrizes it exactly (entries within `symmetry_tol`
    /// of their mirror are replaced by the pair average).
    pub fn new(matrix: Matrix, symmetry_tol: f64) -> Result<Self, MatrixViolation> {
        validate(&matrix, symmetry_tol)?;
        let n = matrix.rows();
        let entries = Matrix::from_fn(n, n, |i, j| 0.5 * (matrix[(i, j)] + matrix[(j, i)]));
        Ok(Self { entries })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            entries: Matrix::zeros(n, n),
        }
    }

    pub fn n(&self) -> usize {
        self.entries.rows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn matrix(&self) -> &Matrix {
        &self.entries
    }

    pub fn into_matrix(self) -> Matrix {
        self.entries
    }

    pub fn without_diagonal(&self) -> Self {
        let mut entries = self.entries.clone();
        for i in 0..entries.rows() {
            entries[(i, i)] = 0.0;
        }
        Self { entries }
    }
}

/// Number of incident edges per vertex; a self-loop counts once.
pub fn degree_vector(g: &Graph) -> Vec<usize> {
    (0..g.n()).map(|v| g.neighbors(v).count()).collect()
}

pub fn expected_degree_vector(m: &ExpectedMatrix) -> Vec<f64> {
    m.matrix().row_sums()
}

/// Checks that `matrix` could be an expected matrix: square, no NaN, entries in
/// `[0, 1]` and symmetric within `symmetry_tol`. Reports the first offending pair
/// in row-major order.
pub fn validate(matrix: &Matrix, symmetry_tol: f64) -> Result<(), MatrixViolation> {
    if !matrix.is_square() {
        return Err(MatrixViolation::NotSquare {
            rows: matrix.rows(),
            cols: matrix.cols(),
        });
    }
    let n = matrix.rows();
    for i in 0..n {
        for j in 0..n {
            let v = matrix[(i, j)];
            if v.is_nan() {
                return Err(MatrixViolation::NaN { i, j });
            }
            if !(0.0..=1.0).contains(&v) {
                return Err(MatrixViolation::OutOfRange { i, j, value: v });
            }
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let (v, w) = (matrix[(i, j)], matrix[(j, i)]);
            if (v - w).abs() > symmetry_tol {
                return Err(MatrixViolation::Asymmetric {
                    i,
                    j,
                    upper: v,
                    lower: w,
                });
            }
        }
    }
    Ok(())
}

/// Component label per vertex. Labels are assigned in order of each component's
/// smallest vertex, so label 0 always contains vertex 0.
pub fn connected_components(g: &Graph) -> Vec<usize> {
    const UNSEEN: usize = usize::MAX;
    let mut labels = vec![UNSEEN; g.n()];
    let mut next = 0;
    let mut queue = VecDeque::new();
    for s in 0..g.n() {
        if labels[s] != UNSEEN {
            continue;
        }
        labels[s] = next;
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            for v in g.neighbors(u) {
                if labels[v] == UNSEEN {
                    labels[v] = next;
                    queue.push_back(v);
                }
            }
        }
        next += 1;
    }
    labels
}

#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    /// Original vertex ids, ascending; subgraph vertex `k` is `vertices[k]`.
    pub vertices: Vec<usize>,
    pub subgraph: Graph,
}

/// Largest connected component; ties go to the component holding the smallest vertex.
pub fn largest_connected_component(g: &Graph) -> Component {
    let labels = connected_components(g);
    let count = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut sizes = vec![0usize; count];
    for &l in &labels {
        sizes[l] += 1;
    }
    // Labels are ordered by smallest member, so the first maximum wins the tie.
    let best = sizes
        .iter()
        .enumerate()
        .fold(None, |acc: Option<(usize, usize)>, (l, &s)| match acc {
            Some((_, bs)) if bs >= s => acc,
            _ => Some((l, s)),
        })
        .map(|(l, _)| l);
    let vertices: Vec<usize> = match best {
        Some(b) => (0..g.n()).filter(|&v| labels[v] == b).collect(),
        None => Vec::new(),
    };
    let subgraph = g.induced_subgraph(&vertices);
    Component { vertices, subgraph }
}

/// Group membership for every vertex, groups numbered `0..count`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Groups {
    labels: Vec<usize>,
    count: usize,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupsError {
    #[error("group {0} has no members")]
    EmptyGroup(usize),
    #[error("label vector has length {got}, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
}

impl Groups {
    /// Every label in `0..=max` must be used by at least one vertex.
    pub fn from_labels(labels: Vec<usize>) -> Result<Self, GroupsError> {
        let count = labels.iter().copied().max().map_or(0, |m| m + 1);
        let mut seen = vec![false; count];
        for &l in &labels {
            seen[l] = true;
        }
        if let Some(empty) = seen.iter().position(|s| !s) {
            return Err(GroupsError::EmptyGroup(empty));
        }
        Ok(Self { labels, count })
    }

    /// Contiguous blocks: the first `sizes[0]` vertices form group 0, and so on.
    pub fn from_sizes(sizes: &[usize]) -> Result<Self, GroupsError> {
        if let Some(empty) = sizes.iter().position(|&s| s == 0) {
            return Err(GroupsError::EmptyGroup(empty));
        }
        let labels = sizes
            .iter()
            .enumerate()
            .flat_map(|(g, &s)| std::iter::repeat(g).take(s))
            .collect();
        Ok(Self {
            labels,
            count: sizes.len(),
        })
    }

    pub fn check_len(&self, n: usize) -> Result<(), GroupsError> {
        if self.labels.len() != n {
            return Err(GroupsError::LengthMismatch {
                expected: n,
                got: self.labels.len(),
            });
        }
        Ok(())
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label(&self, v: usize) -> usize {
        self.labels[v]
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.count];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }

    /// Members of each group, ascending.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.count];
        for (v, &l) in self.labels.iter().enumerate() {
            out[l].push(v);
        }
        out
    }

    /// Expands an `m x m` block matrix to `n x n`.
    pub fn tile(&self, block: &Matrix) -> Matrix {
        let n = self.labels.len();
        Matrix::from_fn(n, n, |i, j| block[(self.labels[i], self.labels[j])])
    }

    /// Like [`Groups::tile`] with a zero diagonal, matching a loop-free model.
    pub fn tile_without_loops(&self, block: &Matrix) -> Matrix {
        let mut m = self.tile(block);
        for i in 0..m.rows() {
            m[(i, i)] = 0.0;
        }
        m
    }

    /// Observed edge density of every group pair. Self-loops are ignored;
    /// within a group the denominator is `s (s - 1) / 2`, and a singleton
    /// group gets density 0.
    pub fn block_densities(&self, g: &Graph) -> Matrix {
        let m = self.count;
        let sizes = self.sizes();
        let mut counts = Matrix::zeros(m, m);
        for (u, v) in g.edges() {
            if u == v {
                continue;
            }
            let (a, b) = (self.labels[u], self.labels[v]);
            counts[(a, b)] += 1.0;
            if a != b {
                counts[(b, a)] += 1.0;
            }
        }
        Matrix::from_fn(m, m, |a, b| {
            let pairs = if a == b {
                (sizes[a] * sizes[a].saturating_sub(1) / 2) as f64
            } else {
                (sizes[a] * sizes[b]) as f64
            };
            if pairs == 0.0 {
                0.0
            } else {
                counts[(a, b)] / pairs
            }
        })
    }
}
