//! Topological graphs of posterior factor graphs.
//!
//! A [`Topology`] is the simple undirected graph whose nodes are robot poses
//! and whose edges are relative-pose constraints (odometry or loop closures).
//! Node 0 is the anchored pose; it is the row/column removed by default when
//! forming the reduced Laplacian.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::spectral::SparseSymmetric;

/// Errors raised while building or querying a [`Topology`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("a pose graph needs at least 2 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("self-loop on node {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("node index {index} out of range for {node_count} nodes")]
    IndexOutOfRange { index: usize, node_count: usize },
    #[error("graph is disconnected ({components} components)")]
    Disconnected { components: usize },
    #[error("reduction index {index} out of range for {node_count} nodes")]
    ReductionIndexOutOfRange { index: usize, node_count: usize },
    #[error("graph with {0} nodes is too large for exhaustive spanning-tree enumeration (max 10)")]
    TooLargeForEnumeration(usize),
}

/// Node degrees `d(i)` of a topology.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeVector(Vec<usize>);

impl DegreeVector {
    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn get(&self, node: usize) -> usize {
        self.0[node]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }
}

/// A connected simple undirected graph over pose indices `0..n`.
///
/// Edges are stored as `(min, max)` pairs in sorted order, so iteration order
/// (and therefore every derived matrix and factorization ordering) is
/// deterministic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    node_count: usize,
    edges: Vec<(usize, usize)>,
    degrees: Vec<usize>,
}

impl Topology {
    /// Validates and canonicalizes an edge list.
    ///
    /// Rejects self-loops, duplicate edges (in either orientation),
    /// out-of-range indices and disconnected graphs.
    pub fn new<I>(node_count: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        if node_count < 2 {
            return Err(GraphError::TooFewNodes(node_count));
        }
        let mut canonical = Vec::new();
        for (a, b) in edges {
            for index in [a, b] {
                if index >= node_count {
                    return Err(GraphError::IndexOutOfRange { index, node_count });
                }
            }
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            canonical.push((a.min(b), a.max(b)));
        }
        canonical.sort_unstable();
        if let Some(w) = canonical.windows(2).find(|w| w[0] == w[1]) {
            return Err(GraphError::DuplicateEdge(w[0].0, w[0].1));
        }

        let components = count_components(node_count, &canonical);
        if components != 1 {
            return Err(GraphError::Disconnected { components });
        }

        let mut degrees = vec![0; node_count];
        for &(i, j) in &canonical {
            degrees[i] += 1;
            degrees[j] += 1;
        }
        Ok(Self {
            node_count,
            edges: canonical,
            degrees,
        })
    }

    /// Path `0 - 1 - ... - (n-1)`, the topology of a pure odometry chain.
    pub fn chain(node_count: usize) -> Result<Self, GraphError> {
        Self::new(node_count, (1..node_count).map(|i| (i - 1, i)))
    }

    /// Cycle over `n` nodes.
    pub fn cycle(node_count: usize) -> Result<Self, GraphError> {
        Self::new(
            node_count,
            (0..node_count).map(|i| (i, (i + 1) % node_count)),
        )
    }

    /// Complete graph on `n` nodes.
    pub fn complete(node_count: usize) -> Result<Self, GraphError> {
        let edges = (0..node_count).flat_map(|i| (i + 1..node_count).map(move |j| (i, j)));
        Self::new(node_count, edges)
    }

    /// Star with hub 0 and `leaves` leaves.
    pub fn star(leaves: usize) -> Result<Self, GraphError> {
        Self::new(leaves + 1, (1..=leaves).map(|i| (0, i)))
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Canonical `(min, max)` edges in ascending order.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn degrees(&self) -> DegreeVector {
        DegreeVector(self.degrees.clone())
    }

    pub fn degree(&self, node: usize) -> usize {
        self.degrees[node]
    }

    pub fn degree_slice(&self) -> &[usize] {
        &self.degrees
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.binary_search(&(a.min(b), a.max(b))).is_ok()
    }

    /// Returns a new topology with one more edge.
    pub fn with_edge(&self, a: usize, b: usize) -> Result<Self, GraphError> {
        Self::new(
            self.node_count,
            self.edges.iter().copied().chain(std::iter::once((a, b))),
        )
    }

    /// Graph Laplacian `L = D - A`.
    pub fn laplacian(&self) -> DMatrix<f64> {
        let n = self.node_count;
        let mut l = DMatrix::zeros(n, n);
        for (i, &d) in self.degrees.iter().enumerate() {
            l[(i, i)] = d as f64;
        }
        for &(i, j) in &self.edges {
            l[(i, j)] = -1.0;
            l[(j, i)] = -1.0;
        }
        l
    }

    /// Laplacian with row and column `r` removed.
    pub fn reduced_laplacian(&self, r: usize) -> Result<DMatrix<f64>, GraphError> {
        self.check_root(r)?;
        let l = self.laplacian();
        Ok(l.remove_row(r).remove_column(r))
    }

    /// Sparse form of [`Topology::reduced_laplacian`], optionally with `shift`
    /// added to every diagonal entry (`L̃ + ΨI`).
    ///
    /// Node `i > r` maps to row `i - 1`.
    pub fn reduced_laplacian_sparse(
        &self,
        r: usize,
        shift: f64,
    ) -> Result<SparseSymmetric, GraphError> {
        self.check_root(r)?;
        let dim = self.node_count - 1;
        let map = |i: usize| if i > r { i - 1 } else { i };
        // Canonical edges are sorted, so each node's higher neighbors are a
        // contiguous ascending run.
        let mut col_ptr = Vec::with_capacity(dim + 1);
        let mut row_idx = Vec::with_capacity(dim + self.edges.len());
        let mut values = Vec::with_capacity(dim + self.edges.len());
        col_ptr.push(0);
        let mut e = 0;
        for i in 0..self.node_count {
            let start = e;
            while e < self.edges.len() && self.edges[e].0 == i {
                e += 1;
            }
            if i == r {
                continue;
            }
            row_idx.push(map(i));
            values.push(self.degrees[i] as f64 + shift);
            for &(_, j) in &self.edges[start..e] {
                if j != r {
                    row_idx.push(map(j));
                    values.push(-1.0);
                }
            }
            col_ptr.push(row_idx.len());
        }
        Ok(SparseSymmetric::from_sorted_csc(
            dim, col_ptr, row_idx, values,
        ))
    }

    /// Normalized Laplacian `D^{-1/2} L D^{-1/2}`.
    ///
    /// Every node of a connected topology has degree at least one, so this
    /// is always defined.
    pub fn normalized_laplacian(&self) -> DMatrix<f64> {
        let n = self.node_count;
        let d = &self.degrees;
        let mut l = DMatrix::identity(n, n);
        for &(i, j) in &self.edges {
            let v = -1.0 / ((d[i] * d[j]) as f64).sqrt();
            l[(i, j)] = v;
            l[(j, i)] = v;
        }
        l
    }

    /// Neighbor lists, ascending.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.node_count];
        for &(i, j) in &self.edges {
            adj[i].push(j);
            adj[j].push(i);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    fn check_root(&self, r: usize) -> Result<(), GraphError> {
        if r >= self.node_count {
            return Err(GraphError::ReductionIndexOutOfRange {
                index: r,
                node_count: self.node_count,
            });
        }
        Ok(())
    }
}

fn count_components(n: usize, edges: &[(usize, usize)]) -> usize {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut components = n;
    for &(a, b) in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
            components -= 1;
        }
    }
    components
}

/// Counts spanning trees by exhaustive search over `(n-1)`-edge subsets.
///
/// Independent of any determinant; intended as a test oracle. Subsets that
/// would close a cycle are pruned as soon as the offending edge is added, so
/// the cost is proportional to the number of forests visited rather than
/// `C(m, n-1)`.
pub fn spanning_tree_count_bruteforce(g: &Topology) -> Result<u64, GraphError> {
    const MAX_NODES: usize = 10;
    let n = g.node_count();
    if n > MAX_NODES {
        return Err(GraphError::TooLargeForEnumeration(n));
    }
    let mut labels = [0u8; MAX_NODES];
    for (i, l) in labels.iter_mut().enumerate().take(n) {
        *l = i as u8;
    }
    Ok(count_trees(g.edges(), 0, n - 1, labels, n))
}

fn count_trees(
    edges: &[(usize, usize)],
    next: usize,
    needed: usize,
    labels: [u8; 10],
    n: usize,
) -> u64 {
    if needed == 0 {
        return 1;
    }
    if edges.len() - next < needed {
        return 0;
    }
    let (a, b) = edges[next];
    let mut total = count_trees(edges, next + 1, needed, labels, n);
    let (la, lb) = (labels[a], labels[b]);
    if la != lb {
        let mut merged = labels;
        for l in merged.iter_mut().take(n) {
            if *l == lb {
                *l = la;
            }
        }
        total += count_trees(edges, next + 1, needed - 1, merged, n);
    }
    total
}
