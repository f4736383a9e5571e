//! Numerical kernels: dense symmetric spectra and sparse log-determinants.
//!
//! Log-determinants of sparse symmetric positive-definite matrices go through
//! two steps. [`plan_factorization`] looks only at the sparsity pattern and
//! produces a [`FactorizationPlan`] (a minimum-degree permutation and the
//! elimination tree). [`logdet_spd`] then runs the numeric `LDLᵀ` and sums the
//! logs of the pivots. Since `L̃` and `L̃ + ΨI` share a pattern, one plan
//! serves both.

mod ldl;
mod ordering;
mod sparse;

use nalgebra::{DMatrix, SymmetricEigen};
use thiserror::Error;

pub use ldl::{ldl_pivots, logdet_spd, PIVOT_TOLERANCE};
pub use ordering::{
    expand_ordering, minimum_degree_ordering, plan_factorization, plan_with_ordering,
    FactorizationPlan,
};
pub use sparse::{SparseSymmetric, SparsityPattern};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectralError {
    #[error("matrix has no rows")]
    EmptyMatrix,
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("structurally singular pattern: no diagonal entry in row {index}")]
    StructurallySingular { index: usize },
    #[error("permutation is not a bijection")]
    InvalidPermutation,
    #[error("matrix does not fit the factorization plan's pattern")]
    PlanMismatch,
    #[error("matrix is not positive definite (pivot {pivot:e} at row {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },
}

/// All eigenvalues of a dense symmetric matrix, ascending.
pub fn eigenvalues_symmetric(m: &DMatrix<f64>) -> Result<Vec<f64>, SpectralError> {
    let (rows, cols) = m.shape();
    if rows != cols {
        return Err(SpectralError::NotSquare { rows, cols });
    }
    if rows == 0 {
        return Err(SpectralError::EmptyMatrix);
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(SpectralError::NonFinite);
    }
    let scale = m.amax().max(1.0);
    for c in 0..cols {
        for r in c + 1..rows {
            if (m[(r, c)] - m[(c, r)]).abs() > 1e-12 * scale {
                return Err(SpectralError::NotSymmetric);
            }
        }
    }
    let mut values: Vec<f64> = SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .copied()
        .collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}
