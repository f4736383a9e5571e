use nalgebra::DMatrix;

use super::SpectralError;

/// Symmetric sparse matrix, lower triangle stored column by column.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymmetric {
    dim: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseSymmetric {
    /// Builds a matrix from `(row, col, value)` triplets.
    ///
    /// Entries may be given in either triangle; `(r, c)` and `(c, r)` refer to
    /// the same stored value and duplicates are summed.
    pub fn from_triplets<I>(dim: usize, triplets: I) -> Result<Self, SpectralError>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        if dim == 0 {
            return Err(SpectralError::EmptyMatrix);
        }
        let mut entries: Vec<(usize, usize, f64)> = Vec::new();
        let mut counts = vec![0usize; dim + 1];
        for (r, c, v) in triplets {
            if r >= dim || c >= dim {
                return Err(SpectralError::IndexOutOfRange {
                    index: r.max(c),
                    dim,
                });
            }
            if !v.is_finite() {
                return Err(SpectralError::NonFinite);
            }
            counts[c.min(r) + 1] += 1;
            entries.push((c.min(r), r.max(c), v));
        }
        // Bucket by column, then sort and merge each column.
        for c in 0..dim {
            counts[c + 1] += counts[c];
        }
        let mut next = counts.clone();
        let mut bucketed = vec![(0usize, 0.0f64); entries.len()];
        for (c, r, v) in entries {
            bucketed[next[c]] = (r, v);
            next[c] += 1;
        }

        let mut col_ptr = vec![0; dim + 1];
        let mut row_idx = Vec::with_capacity(bucketed.len());
        let mut values: Vec<f64> = Vec::with_capacity(bucketed.len());
        for c in 0..dim {
            let column = &mut bucketed[counts[c]..counts[c + 1]];
            column.sort_by_key(|&(r, _)| r);
            let start = row_idx.len();
            for &(r, v) in column.iter() {
                if row_idx.len() > start && row_idx.last() == Some(&r) {
                    *values.last_mut().expect("entry exists") += v;
                } else {
                    row_idx.push(r);
                    values.push(v);
                }
            }
            col_ptr[c + 1] = row_idx.len();
        }
        Ok(Self {
            dim,
            col_ptr,
            row_idx,
            values,
        })
    }

    /// From compressed lower columns whose rows are ascending, each starting
    /// at or below the diagonal.
    pub(crate) fn from_sorted_csc(
        dim: usize,
        col_ptr: Vec<usize>,
        row_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Self {
        debug_assert_eq!(col_ptr.len(), dim + 1);
        debug_assert!((0..dim).all(|c| {
            let rows = &row_idx[col_ptr[c]..col_ptr[c + 1]];
            rows.windows(2).all(|w| w[0] < w[1]) && rows.first().is_none_or(|&r| r >= c)
        }));
        Self {
            dim,
            col_ptr,
            row_idx,
            values,
        }
    }

    pub fn identity(dim: usize) -> Result<Self, SpectralError> {
        Self::from_triplets(dim, (0..dim).map(|i| (i, i, 1.0)))
    }

    /// Converts a dense symmetric matrix, keeping exact nonzeros of the lower
    /// triangle. Diagonal entries are always stored.
    pub fn from_dense(m: &DMatrix<f64>) -> Result<Self, SpectralError> {
        let dim = m.nrows();
        if m.ncols() != dim {
            return Err(SpectralError::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        let triplets = (0..dim).flat_map(|c| {
            (c..dim).filter_map(move |r| (r == c || m[(r, c)] != 0.0).then_some((r, c, m[(r, c)])))
        });
        Self::from_triplets(dim, triplets)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of stored lower-triangle entries, diagonal included.
    pub fn stored_len(&self) -> usize {
        self.values.len()
    }

    /// Iterates stored `(row, col, value)` entries with `row >= col`.
    pub fn lower_entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.dim).flat_map(move |c| {
            (self.col_ptr[c]..self.col_ptr[c + 1])
                .map(move |p| (self.row_idx[p], c, self.values[p]))
        })
    }

    pub fn max_abs_diagonal(&self) -> f64 {
        self.lower_entries()
            .filter(|&(r, c, _)| r == c)
            .fold(0.0, |acc, (_, _, v)| acc.max(v.abs()))
    }

    /// Same matrix with `shift` added to every diagonal entry.
    pub fn with_diagonal_shift(&self, shift: f64) -> Result<Self, SpectralError> {
        if !shift.is_finite() {
            return Err(SpectralError::NonFinite);
        }
        let mut out = self.clone();
        for c in 0..self.dim {
            let p = self.col_ptr[c];
            // Rows within a column are ascending, so a stored diagonal is first.
            if p < self.col_ptr[c + 1] && self.row_idx[p] == c {
                out.values[p] += shift;
            } else {
                let diag = (0..self.dim).map(|i| (i, i, shift));
                return Self::from_triplets(self.dim, self.lower_entries().chain(diag));
            }
        }
        Ok(out)
    }

    pub fn pattern(&self) -> SparsityPattern {
        let mut diagonal = vec![false; self.dim];
        let mut lower_ptr = Vec::with_capacity(self.dim + 1);
        let mut lower_idx = Vec::with_capacity(self.row_idx.len());
        lower_ptr.push(0);
        for (c, has_diagonal) in diagonal.iter_mut().enumerate() {
            let rows = &self.row_idx[self.col_ptr[c]..self.col_ptr[c + 1]];
            match rows.first() {
                Some(&r) if r == c => {
                    *has_diagonal = true;
                    lower_idx.extend_from_slice(&rows[1..]);
                }
                _ => lower_idx.extend_from_slice(rows),
            }
            lower_ptr.push(lower_idx.len());
        }
        SparsityPattern::from_sorted_columns(self.dim, diagonal, lower_ptr, lower_idx)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (r, c, v) in self.lower_entries() {
            m[(r, c)] = v;
            m[(c, r)] = v;
        }
        m
    }
}

/// Structural nonzeros of a symmetric matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparsityPattern {
    dim: usize,
    diagonal: Vec<bool>,
    // Strictly-lower rows of column c are lower_idx[lower_ptr[c]..lower_ptr[c + 1]], ascending.
    lower_ptr: Vec<usize>,
    lower_idx: Vec<usize>,
}

impl SparsityPattern {
    /// Builds a pattern from `(row, col)` positions in either triangle.
    pub fn from_entries<I>(dim: usize, entries: I) -> Result<Self, SpectralError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        if dim == 0 {
            return Err(SpectralError::EmptyMatrix);
        }
        let mut diagonal = vec![false; dim];
        let mut off = Vec::new();
        let mut counts = vec![0usize; dim + 1];
        for (r, c) in entries {
            if r >= dim || c >= dim {
                return Err(SpectralError::IndexOutOfRange {
                    index: r.max(c),
                    dim,
                });
            }
            if r == c {
                diagonal[r] = true;
            } else {
                counts[r.min(c) + 1] += 1;
                off.push((r.min(c), r.max(c)));
            }
        }
        for c in 0..dim {
            counts[c + 1] += counts[c];
        }
        let mut next = counts.clone();
        let mut bucketed = vec![0usize; off.len()];
        for (c, r) in off {
            bucketed[next[c]] = r;
            next[c] += 1;
        }
        let mut lower_ptr = vec![0; dim + 1];
        let mut lower_idx = Vec::with_capacity(bucketed.len());
        for c in 0..dim {
            let rows = &mut bucketed[counts[c]..counts[c + 1]];
            rows.sort_unstable();
            let start = lower_idx.len();
            for &r in rows.iter() {
                if lower_idx.len() == start || lower_idx.last() != Some(&r) {
                    lower_idx.push(r);
                }
            }
            lower_ptr[c + 1] = lower_idx.len();
        }
        Ok(Self {
            dim,
            diagonal,
            lower_ptr,
            lower_idx,
        })
    }

    /// From per-column strictly-lower rows that are already ascending.
    fn from_sorted_columns(
        dim: usize,
        diagonal: Vec<bool>,
        lower_ptr: Vec<usize>,
        lower_idx: Vec<usize>,
    ) -> Self {
        debug_assert!((0..dim).all(|c| {
            let rows = &lower_idx[lower_ptr[c]..lower_ptr[c + 1]];
            rows.windows(2).all(|w| w[0] < w[1]) && rows.first().is_none_or(|&r| r > c)
        }));
        Self {
            dim,
            diagonal,
            lower_ptr,
            lower_idx,
        }
    }

    /// Fully dense `dim x dim` pattern.
    pub fn dense(dim: usize) -> Result<Self, SpectralError> {
        Self::from_entries(dim, (0..dim).flat_map(|c| (c..dim).map(move |r| (r, c))))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn has_full_diagonal(&self) -> bool {
        self.diagonal.iter().all(|&d| d)
    }

    pub(crate) fn missing_diagonal(&self) -> Option<usize> {
        self.diagonal.iter().position(|&d| !d)
    }

    /// Number of strictly-lower structural nonzeros.
    pub fn off_diagonal_len(&self) -> usize {
        self.lower_idx.len()
    }

    fn column(&self, c: usize) -> &[usize] {
        &self.lower_idx[self.lower_ptr[c]..self.lower_ptr[c + 1]]
    }

    pub fn contains(&self, r: usize, c: usize) -> bool {
        if r == c {
            return self.diagonal.get(r).copied().unwrap_or(false);
        }
        let (lo, hi) = (r.min(c), r.max(c));
        lo < self.dim && self.column(lo).binary_search(&hi).is_ok()
    }

    /// Symmetric adjacency in compressed form: the neighbors of `i` are
    /// `idx[ptr[i]..ptr[i + 1]]`, ascending.
    pub(crate) fn adjacency_compressed(&self) -> (Vec<usize>, Vec<usize>) {
        let mut ptr = vec![0usize; self.dim + 1];
        for c in 0..self.dim {
            ptr[c + 1] += self.column(c).len();
            for &r in self.column(c) {
                ptr[r + 1] += 1;
            }
        }
        for i in 0..self.dim {
            ptr[i + 1] += ptr[i];
        }
        let mut next = ptr.clone();
        let mut idx = vec![0usize; ptr[self.dim]];
        // Columns are visited in order, so every list comes out ascending.
        for c in 0..self.dim {
            for &r in self.column(c) {
                idx[next[r]] = c;
                next[r] += 1;
            }
            for &r in self.column(c) {
                idx[next[c]] = r;
                next[c] += 1;
            }
        }
        (ptr, idx)
    }

    /// Symmetric adjacency lists of the off-diagonal structure, ascending.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let (ptr, idx) = self.adjacency_compressed();
        (0..self.dim)
            .map(|i| idx[ptr[i]..ptr[i + 1]].to_vec())
            .collect()
    }

    /// Pattern of the Kronecker product with a dense `block x block` block:
    /// node `i` becomes indices `block*i .. block*(i+1)`.
    pub fn expand_blocks(&self, block: usize) -> Self {
        let dim = self.dim * block;
        let mut lower_ptr = Vec::with_capacity(dim + 1);
        let mut lower_idx =
            Vec::with_capacity(block * block * self.off_diagonal_len() + dim * block / 2);
        lower_ptr.push(0);
        for c in 0..self.dim {
            for b in 0..block {
                // Rest of the diagonal block, then every neighbor block below.
                lower_idx.extend(block * c + b + 1..block * (c + 1));
                for &r in self.column(c) {
                    lower_idx.extend(block * r..block * (r + 1));
                }
                lower_ptr.push(lower_idx.len());
            }
        }
        let diagonal = (0..dim).map(|i| self.diagonal[i / block]).collect();
        Self::from_sorted_columns(dim, diagonal, lower_ptr, lower_idx)
    }
}
