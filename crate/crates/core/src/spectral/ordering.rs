use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::{SparsityPattern, SpectralError};

const NONE: usize = usize::MAX;

// Cliques up to this size are merged into neighbor lists by sorted insertion.
const SMALL_CLIQUE: usize = 8;

/// Fill-reducing permutation plus the symbolic structure of the `LDLᵀ`
/// factor it induces.
///
/// A plan depends on the sparsity pattern only, so it can be reused for any
/// matrix whose pattern is contained in the planned one, e.g. `L̃` and
/// `L̃ + ΨI`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorizationPlan {
    pattern: SparsityPattern,
    /// `perm[k]` is the original index eliminated at step `k`.
    perm: Vec<usize>,
    /// Inverse of `perm`.
    pinv: Vec<usize>,
    /// Elimination tree of the permuted matrix, `NONE` for roots.
    parent: Vec<usize>,
    /// Column pointers of the strictly-lower factor.
    l_ptr: Vec<usize>,
}

impl FactorizationPlan {
    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    pub fn inverse_permutation(&self) -> &[usize] {
        &self.pinv
    }

    pub fn pattern(&self) -> &SparsityPattern {
        &self.pattern
    }

    /// Parent of each permuted column in the elimination tree.
    pub fn etree_parent(&self, k: usize) -> Option<usize> {
        (self.parent[k] != NONE).then_some(self.parent[k])
    }

    /// Strictly-lower nonzeros of the factor.
    pub fn factor_nnz(&self) -> usize {
        self.l_ptr[self.dim()]
    }

    /// Entries of the factor that are structurally zero in the matrix.
    pub fn fill_in(&self) -> usize {
        self.factor_nnz() - self.pattern.off_diagonal_len()
    }

    pub(crate) fn parent_raw(&self) -> &[usize] {
        &self.parent
    }

    pub(crate) fn l_ptr(&self) -> &[usize] {
        &self.l_ptr
    }
}

/// Minimum-degree ordering followed by symbolic analysis.
///
/// Ties in degree go to the smallest index, so the result is a pure
/// function of the pattern.
pub fn plan_factorization(pattern: &SparsityPattern) -> Result<FactorizationPlan, SpectralError> {
    check_diagonal(pattern)?;
    let perm = minimum_degree_ordering(pattern);
    plan_with_ordering(pattern, perm)
}

/// Symbolic analysis under a caller-supplied elimination order.
pub fn plan_with_ordering(
    pattern: &SparsityPattern,
    perm: Vec<usize>,
) -> Result<FactorizationPlan, SpectralError> {
    check_diagonal(pattern)?;
    let dim = pattern.dim();
    let mut pinv = vec![NONE; dim];
    if perm.len() != dim {
        return Err(SpectralError::InvalidPermutation);
    }
    for (k, &old) in perm.iter().enumerate() {
        if old >= dim || pinv[old] != NONE {
            return Err(SpectralError::InvalidPermutation);
        }
        pinv[old] = k;
    }

    // Elimination tree and column counts (Liu's algorithm, as in LDL).
    let (adj_ptr, adj_idx) = pattern.adjacency_compressed();
    let mut parent = vec![NONE; dim];
    let mut flag = vec![NONE; dim];
    let mut counts = vec![0usize; dim];
    for k in 0..dim {
        flag[k] = k;
        for &old in &adj_idx[adj_ptr[perm[k]]..adj_ptr[perm[k] + 1]] {
            let mut i = pinv[old];
            if i >= k {
                continue;
            }
            while flag[i] != k {
                if parent[i] == NONE {
                    parent[i] = k;
                }
                counts[i] += 1;
                flag[i] = k;
                i = parent[i];
            }
        }
    }
    let mut l_ptr = vec![0; dim + 1];
    for k in 0..dim {
        l_ptr[k + 1] = l_ptr[k] + counts[k];
    }
    Ok(FactorizationPlan {
        pattern: pattern.clone(),
        perm,
        pinv,
        parent,
        l_ptr,
    })
}

/// Repeats each entry of a node ordering for the `block` scalar indices of
/// that node.
pub fn expand_ordering(node_perm: &[usize], block: usize) -> Vec<usize> {
    node_perm
        .iter()
        .flat_map(|&i| (0..block).map(move |a| block * i + a))
        .collect()
}

fn check_diagonal(pattern: &SparsityPattern) -> Result<(), SpectralError> {
    match pattern.missing_diagonal() {
        Some(index) => Err(SpectralError::StructurallySingular { index }),
        None => Ok(()),
    }
}

/// Exact minimum degree on the elimination graph; ties go to the smallest
/// index.
pub fn minimum_degree_ordering(pattern: &SparsityPattern) -> Vec<usize> {
    let dim = pattern.dim();
    let mut adj = pattern.adjacency();
    // Lazy deletion: an entry is live when its degree is still current.
    let mut heap: BinaryHeap<Reverse<(usize, usize)>> =
        (0..dim).map(|i| Reverse((adj[i].len(), i))).collect();
    let mut eliminated = vec![false; dim];
    let mut order = Vec::with_capacity(dim);
    let mut merged = Vec::new();

    while let Some(Reverse((deg, v))) = heap.pop() {
        if eliminated[v] || deg != adj[v].len() {
            continue;
        }
        eliminated[v] = true;
        order.push(v);
        let clique = std::mem::take(&mut adj[v]);
        for &u in &clique {
            // adj[u] becomes adj[u] ∪ clique \ {u, v}, sorted.
            let before = adj[u].len();
            if clique.len() <= SMALL_CLIQUE {
                let list = &mut adj[u];
                if let Ok(p) = list.binary_search(&v) {
                    list.remove(p);
                }
                for &w in &clique {
                    if w != u {
                        if let Err(p) = list.binary_search(&w) {
                            list.insert(p, w);
                        }
                    }
                }
            } else {
                merged.clear();
                merge_excluding(&adj[u], &clique, u, v, &mut merged);
                std::mem::swap(&mut adj[u], &mut merged);
            }
            if adj[u].len() != before {
                heap.push(Reverse((adj[u].len(), u)));
            }
        }
    }
    order
}

/// Sorted union of `a` and `b` without `u` and `v`.
fn merge_excluding(a: &[usize], b: &[usize], u: usize, v: usize, out: &mut Vec<usize>) {
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let next = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) if x == y => {
                i += 1;
                j += 1;
                x
            }
            (Some(&x), Some(&y)) if x < y => {
                i += 1;
                x
            }
            (Some(_), Some(&y)) => {
                j += 1;
                y
            }
            (Some(&x), None) => {
                i += 1;
                x
            }
            (None, Some(&y)) => {
                j += 1;
                y
            }
            (None, None) => unreachable!(),
        };
        if next != u && next != v {
            out.push(next);
        }
    }
}
