use super::{FactorizationPlan, SparseSymmetric, SpectralError};

const NONE: usize = usize::MAX;

/// Relative pivot threshold: a pivot at or below this times the largest
/// diagonal magnitude means the matrix is not positive definite.
pub const PIVOT_TOLERANCE: f64 = 1e-12;

/// `ln det(m)` from the pivots of an up-looking `LDLᵀ` factorization under
/// `plan`.
///
/// The determinant is never formed in linear scale. Entries of `m` must lie
/// inside the planned pattern.
pub fn logdet_spd(m: &SparseSymmetric, plan: &FactorizationPlan) -> Result<f64, SpectralError> {
    Ok(ldl_pivots(m, plan)?.iter().map(|d| d.ln()).sum())
}

/// Diagonal `D` of `P m Pᵀ = L D Lᵀ`, in elimination order.
pub fn ldl_pivots(
    m: &SparseSymmetric,
    plan: &FactorizationPlan,
) -> Result<Vec<f64>, SpectralError> {
    let dim = m.dim();
    if dim != plan.dim() {
        return Err(SpectralError::PlanMismatch);
    }
    let pinv = plan.inverse_permutation();
    let perm = plan.permutation();
    let pattern = plan.pattern();

    // Upper triangle of the permuted matrix, by column.
    let mut counts = vec![0usize; dim + 1];
    for (r, c, _) in m.lower_entries() {
        if !pattern.contains(r, c) {
            return Err(SpectralError::PlanMismatch);
        }
        counts[pinv[r].max(pinv[c]) + 1] += 1;
    }
    for k in 0..dim {
        counts[k + 1] += counts[k];
    }
    let mut next = counts.clone();
    let mut up_row = vec![0usize; m.stored_len()];
    let mut up_val = vec![0.0; m.stored_len()];
    for (r, c, v) in m.lower_entries() {
        let (pr, pc) = (pinv[r], pinv[c]);
        let col = pr.max(pc);
        up_row[next[col]] = pr.min(pc);
        up_val[next[col]] = v;
        next[col] += 1;
    }

    let parent = plan.parent_raw();
    let l_ptr = plan.l_ptr();
    let mut l_idx = vec![0usize; plan.factor_nnz()];
    let mut l_val = vec![0.0; plan.factor_nnz()];
    let mut l_len = vec![0usize; dim];
    let mut d = vec![0.0; dim];
    let mut y = vec![0.0; dim];
    let mut flag = vec![NONE; dim];
    let mut stack = vec![0usize; dim];
    let tolerance = PIVOT_TOLERANCE * m.max_abs_diagonal();

    for k in 0..dim {
        let mut top = dim;
        flag[k] = k;
        for p in counts[k]..counts[k + 1] {
            let mut i = up_row[p];
            y[i] += up_val[p];
            let mut len = 0;
            while flag[i] != k {
                stack[len] = i;
                len += 1;
                flag[i] = k;
                i = parent[i];
                if i == NONE {
                    return Err(SpectralError::PlanMismatch);
                }
            }
            while len > 0 {
                top -= 1;
                len -= 1;
                stack[top] = stack[len];
            }
        }
        d[k] = y[k];
        y[k] = 0.0;
        for &i in &stack[top..dim] {
            let yi = y[i];
            y[i] = 0.0;
            let start = l_ptr[i];
            for p in start..start + l_len[i] {
                y[l_idx[p]] -= l_val[p] * yi;
            }
            let l_ki = yi / d[i];
            d[k] -= l_ki * yi;
            let slot = start + l_len[i];
            if slot >= l_ptr[i + 1] {
                return Err(SpectralError::PlanMismatch);
            }
            l_idx[slot] = k;
            l_val[slot] = l_ki;
            l_len[i] += 1;
        }
        // Negated so that a NaN pivot is rejected too.
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(d[k] > tolerance) {
            return Err(SpectralError::NotPositiveDefinite {
                index: perm[k],
                pivot: d[k],
            });
        }
    }
    Ok(d)
}
